"""Domain vocabularies and cross-domain term overlap.

A domain vocabulary is the top-k unigrams of a document sample by raw
count, after stopword filtering, ranked with lexicographic tie-breaking.
Overlap between two vocabularies is the percentage of shared terms.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document, analysis_tokens
from .errors import DataError
from .fileio import atomic_write

DEFAULT_VOCAB_K = 10_000
DEFAULT_SAMPLE_DOCS = 50_000


@dataclass
class DomainVocabulary:
    domain: str
    k: int
    terms: list[str]
    sample_docs: int
    counts: dict[str, int] = field(default_factory=dict)


@dataclass
class OverlapMatrix:
    domains: list[str]
    pct: list[list[float]]


def _bundled_stopwords_path():
    return resources.files("corpusmith").joinpath("data/stopwords.txt")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword set from the given file, or the bundled list."""
    if path is None:
        raw = _bundled_stopwords_path().read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    words = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def stopwords_sha256(path: str | Path | None = None) -> str:
    """sha256 of the stopword file bytes, for pinning a run's list."""
    if path is None:
        data = _bundled_stopwords_path().read_bytes()
    else:
        data = Path(path).read_bytes()
    return hashlib.sha256(data).hexdigest()


def build_vocabulary(
    sample: Sequence[Document],
    k: int = DEFAULT_VOCAB_K,
    stopwords: frozenset[str] | None = None,
    domain: str | None = None,
) -> DomainVocabulary:
    """Top-k unigram vocabulary of a document sample.

    Stopwords are filtered before ranking. Terms rank by count descending
    with lexicographic tie-breaking, so the result does not depend on
    document order. Fewer than k surviving terms yields a smaller
    vocabulary rather than an error.
    """
    if k < 1:
        raise DataError(f"vocabulary size k must be >= 1, got {k}")
    if not sample:
        raise DataError("cannot build a vocabulary from an empty sample")
    if stopwords is None:
        stopwords = load_stopwords()
    if domain is None:
        domain = sample[0].domain
    counts: Counter[str] = Counter()
    for doc in sample:
        counts.update(t for t in analysis_tokens(doc.text) if t not in stopwords)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:k]
    terms = [term for term, _ in ranked]
    return DomainVocabulary(
        domain=domain,
        k=k,
        terms=terms,
        sample_docs=len(sample),
        counts={term: count for term, count in ranked},
    )


def overlap(a: DomainVocabulary, b: DomainVocabulary) -> float:
    """Shared-term percentage: 100 * |a.terms & b.terms| / |a.terms|.

    Requires both vocabularies to have been built with the same k. The
    denominator is a's actual term count, so the diagonal is exactly
    100.0 even for undersized vocabularies. An empty vocabulary overlaps
    nothing: 0.0.
    """
    if a.k != b.k:
        raise DataError(f"vocabulary size mismatch: k={a.k} vs k={b.k}")
    if not a.terms:
        return 0.0
    shared = len(set(a.terms) & set(b.terms))
    return 100.0 * shared / len(a.terms)


def overlap_matrix(vocabs: Sequence[DomainVocabulary]) -> OverlapMatrix:
    """Pairwise overlap of the given vocabularies, in input order."""
    if len(vocabs) < 2:
        raise DataError("overlap matrix needs at least two vocabularies")
    domains = [v.domain for v in vocabs]
    if len(set(domains)) != len(domains):
        raise DataError("duplicate domain labels in overlap matrix")
    pct = [[overlap(a, b) for b in vocabs] for a in vocabs]
    return OverlapMatrix(domains=domains, pct=pct)


def pick_irrelevant_domain(matrix: OverlapMatrix, target: str) -> str:
    """The domain with the least vocabulary overlap against target.

    Ties resolve to the lexicographically smallest domain name.
    """
    if target not in matrix.domains:
        raise DataError(f"domain '{target}' not in overlap matrix")
    row = matrix.pct[matrix.domains.index(target)]
    candidates = [
        (value, name) for name, value in zip(matrix.domains, row) if name != target
    ]
    if not candidates:
        raise DataError("overlap matrix has no other domain to pick from")
    return min(candidates)[1]


def write_vocabulary(path: str | Path, vocab: DomainVocabulary) -> None:
    """Write terms as "term<TAB>count" lines in rank order."""
    with atomic_write(path) as handle:
        for term in vocab.terms:
            handle.write(f"{term}\t{vocab.counts.get(term, 0)}\n")


def read_vocabulary(
    path: str | Path, domain: str, k: int, sample_docs: int = 0
) -> DomainVocabulary:
    """Read a "term<TAB>count" file back into a DomainVocabulary."""
    terms = []
    counts = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'term<TAB>count'")
            try:
                count = int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: count must be an integer") from None
            terms.append(parts[0])
            counts[parts[0]] = count
    return DomainVocabulary(
        domain=domain, k=k, terms=terms, sample_docs=sample_docs, counts=counts
    )


def write_overlap_tsv(path: str | Path, matrix: OverlapMatrix) -> None:
    """Overlap percentages as a TSV with one decimal place."""
    with atomic_write(path) as handle:
        handle.write("domain\t" + "\t".join(matrix.domains) + "\n")
        for name, row in zip(matrix.domains, matrix.pct):
            cells = "\t".join(f"{value:.1f}" for value in row)
            handle.write(f"{name}\t{cells}\n")


def sample_for_vocab(
    docs: Sequence[Document], sample_size: int | None, seed: int
) -> list[Document]:
    """Document sample used for vocabulary building.

    sample_size of None means the default cap; a corpus smaller than the
    cap is used whole.
    """
    from .corpus import sample_documents

    if sample_size is None:
        sample_size = DEFAULT_SAMPLE_DOCS
    if sample_size >= len(docs):
        return list(docs)
    return sample_documents(docs, sample_size, seed)
