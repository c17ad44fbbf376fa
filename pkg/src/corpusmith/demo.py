"""Deterministic synthetic corpus for demos and end-to-end tests.

Three topic domains plus a task drawn from a narrow subtopic of one of
them. Text is built from fixed multi-word phrases rather than independent
word draws, so n-gram models have real sequential structure to learn:
in-domain text repeats phrase internals heavily while foreign text
collapses to out-of-vocabulary events. The target domain mixes in the
subtopic phrases at a low rate, so nearest-neighbor selection has a
genuinely task-relevant subcorpus to find. All draws come from seeded
streams: same seed, same corpus, byte for byte.
"""

from __future__ import annotations

from pathlib import Path

from .corpus import Document, write_documents
from .rng import Xoshiro256StarStar, stream

TASK_DOMAIN = "exoplanets"
TARGET_DOMAIN = "astro"

# Content banks. The exoplanet bank is the task subtopic; astro documents
# draw from it at a low rate.
_EXO = (
    "exoplanet", "exomoon", "exoplanetary", "planetesimal", "protoplanet",
    "protoplanetary", "habitability", "biosignature", "superearth", "subneptune",
    "circumbinary", "insolation", "eccentricity", "obliquity", "resonance",
    "migration", "perturbation", "doppler", "wobble", "lightcurve", "starspot",
    "limb", "darkening", "radial", "velocity", "orbit", "orbital", "period",
    "dwarf", "terrestrial",
)

_ASTRO = (
    "telescope", "observatory", "galaxy", "nebula", "quasar", "pulsar",
    "supernova", "photon", "spectrum", "spectra", "redshift", "luminosity",
    "parallax", "magnitude", "aperture", "interferometer", "photometry",
    "astrometry", "cosmology", "inflation", "singularity", "accretion",
    "magnetar", "blazar", "parsec", "zenith", "azimuth", "equinox", "solstice",
    "perihelion", "aphelion", "albedo", "meteorite", "asteroid", "comet",
    "heliosphere", "magnetosphere", "ionosphere", "chromosphere", "corona",
    "photosphere", "sunspot", "flare", "prominence", "granulation",
    "convection", "radiation", "synchrotron", "cepheid", "binary", "cluster",
    "globular", "elliptical", "spiral", "barred", "halo", "bulge", "filament",
    "void", "extinction", "reddening", "occultation", "transit", "eclipse",
    "conjunction", "opposition", "retrograde", "ephemeris", "almanac",
    "catalog", "survey", "calibration", "detector", "grating", "prism",
    "refractor", "reflector", "tracking", "guiding", "seeing", "airmass",
)

_COOKING = (
    "recipe", "kitchen", "oven", "skillet", "saute", "simmer", "braise",
    "roast", "whisk", "knead", "dough", "batter", "yeast", "sourdough",
    "flour", "sugar", "butter", "cream", "custard", "caramel", "ganache",
    "pastry", "croissant", "brioche", "risotto", "polenta", "gnocchi", "ragu",
    "marinara", "pesto", "basil", "oregano", "thyme", "rosemary", "saffron",
    "cumin", "coriander", "turmeric", "paprika", "vinegar", "brine",
    "marinade", "glaze", "reduction", "stock", "broth", "consomme",
    "julienne", "brunoise", "chiffonade", "blanch", "poach", "sear",
    "deglaze", "emulsify", "temper", "proof", "ferment", "pickle", "cure",
    "grill", "griddle", "mandoline", "zester", "spatula", "ladle", "colander",
    "ramekin", "springform", "galette",
)

_LAW = (
    "statute", "plaintiff", "defendant", "tort", "negligence", "liability",
    "contract", "covenant", "easement", "estoppel", "injunction", "subpoena",
    "deposition", "affidavit", "testimony", "verdict", "acquittal",
    "indictment", "arraignment", "bail", "parole", "probation", "felony",
    "misdemeanor", "litigation", "arbitration", "mediation", "settlement",
    "damages", "restitution", "jurisdiction", "venue", "appellate", "remand",
    "precedent", "dicta", "holding", "certiorari", "habeas", "mandamus",
    "amicus", "brief", "motion", "discovery", "interrogatory", "privilege",
    "waiver", "consideration", "breach", "rescission", "novation",
    "assignment", "bailment", "fiduciary", "trustee", "beneficiary",
    "probate", "intestate", "codicil", "escrow", "lien", "foreclosure",
    "garnishment", "replevin", "trover", "conversion", "trespass", "nuisance",
    "defamation", "chattel",
)

_SHARED = (
    "data", "method", "result", "analysis", "report", "study", "review",
    "table", "figure", "model", "sample", "measure", "metric", "error",
    "rate", "trend", "pattern", "series", "record", "source", "note",
    "draft", "version", "update", "summary", "detail", "context", "scope",
    "range", "limit", "factor", "effect", "impact", "change", "process",
    "stage", "phase", "level", "degree", "unit", "value", "index",
)

_CONNECTIVES = ("of", "and", "for", "with", "on", "in")
_LEADS = ("the", "a", "this", "each")

_BANKS = {
    "exo": _EXO,
    "astro": _ASTRO,
    "cooking": _COOKING,
    "law": _LAW,
    "shared": _SHARED,
}

_PHRASES_PER_BANK = 90

# Phrase pool mix per domain: ten slots mapped to phrase banks.
_MIXES = {
    "astro": ("astro",) * 7 + ("exo",) + ("shared",) * 2,
    "cooking": ("cooking",) * 8 + ("shared",) * 2,
    "law": ("law",) * 8 + ("shared",) * 2,
    TASK_DOMAIN: ("exo",) * 6 + ("astro",) * 2 + ("shared",) * 2,
}

DOMAIN_DOCS = {"astro": 800, "cooking": 320, "law": 320}
TASK_DOCS = 60
TASK_SENTENCES_PER_DOC = 4


def _build_phrases(bank_name: str, seed: int) -> tuple[tuple[str, ...], ...]:
    """Fixed phrase inventory for one bank: 2-4 word chunks, some with a
    leading article or an inner connective."""
    bank = _BANKS[bank_name]
    gen = stream(seed, "phrases", bank_name)
    phrases = []
    for _ in range(_PHRASES_PER_BANK):
        w1 = bank[gen.next_below(len(bank))]
        w2 = bank[gen.next_below(len(bank))]
        shape = gen.next_below(4)
        if shape == 0:
            words = (w1, w2)
        elif shape == 1:
            words = (_LEADS[gen.next_below(len(_LEADS))], w1, w2)
        elif shape == 2:
            words = (w1, _CONNECTIVES[gen.next_below(len(_CONNECTIVES))], w2)
        else:
            words = (w1, w2, bank[gen.next_below(len(bank))])
        phrases.append(words)
    return tuple(phrases)


def _phrase_table(seed: int) -> dict[str, tuple[tuple[str, ...], ...]]:
    return {name: _build_phrases(name, seed) for name in _BANKS}


def _sentence(gen: Xoshiro256StarStar, mix, table) -> str:
    n_phrases = 2 + gen.next_below(3)
    words: list[str] = []
    for _ in range(n_phrases):
        pool = table[mix[gen.next_below(10)]]
        words.extend(pool[gen.next_below(len(pool))])
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def _document(doc_id: str, domain: str, n_sentences: int, gen, table) -> Document:
    mix = _MIXES[domain]
    sentences = [_sentence(gen, mix, table) for _ in range(n_sentences)]
    return Document(id=doc_id, domain=domain, text=" ".join(sentences))


def demo_domain_documents(domain: str, n_docs: int, seed: int) -> list[Document]:
    """n_docs synthetic documents of 13-18 sentences for a domain."""
    table = _phrase_table(seed)
    docs = []
    for i in range(n_docs):
        gen = stream(seed, "demo", domain, i)
        n_sentences = 13 + gen.next_below(6)
        docs.append(_document(f"{domain}-{i:04d}", domain, n_sentences, gen, table))
    return docs


def demo_task_documents(seed: int, n_docs: int = TASK_DOCS) -> list[Document]:
    """Task documents: a fixed number of short subtopic documents."""
    table = _phrase_table(seed)
    docs = []
    for i in range(n_docs):
        gen = stream(seed, "demo", TASK_DOMAIN, i)
        docs.append(
            _document(
                f"task-{i:04d}", TASK_DOMAIN, TASK_SENTENCES_PER_DOC, gen, table
            )
        )
    return docs


def generate_demo_corpus(out_dir: str | Path, seed: int) -> dict[str, Path]:
    """Write the demo corpora under out_dir and return their paths.

    Produces one documents.jsonl per domain plus the task corpus. The
    target domain ("astro") is sized to yield well over ten thousand
    sentences; the task corpus has 240 sentences.
    """
    out_dir = Path(out_dir)
    paths: dict[str, Path] = {}
    for domain, n_docs in DOMAIN_DOCS.items():
        path = out_dir / f"{domain}_documents.jsonl"
        write_documents(path, demo_domain_documents(domain, n_docs, seed))
        paths[domain] = path
    task_path = out_dir / "task_documents.jsonl"
    write_documents(task_path, demo_task_documents(seed))
    paths[TASK_DOMAIN] = task_path
    return paths
