"""End-to-end pipeline: documents in, curated masked corpus and reports out.

Stages: ingest task and domain documents, build the deduplicated domain
sentence pool, fit the embedder on the pool, embed both sides, select
task-relevant candidates, assemble the augmented corpus, pack and mask
it, then produce the vocabulary overlap matrix, the cross-domain loss
matrix, and the compute plans. Every artifact lands under one output
directory and is a pure function of (config, seed), which the manifest
pins with sha256 digests.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import corpus, embed, lmproxy, mask, plan, select, vocab
from .demo import TARGET_DOMAIN, TASK_DOMAIN, generate_demo_corpus
from .errors import DataError
from .fileio import atomic_write, sha256_file
from .rng import derive_seed

DEFAULTS = {
    "seed": 0,
    "vocab_k": vocab.DEFAULT_VOCAB_K,
    "vocab_sample": None,
    "dim": embed.DEFAULT_DIM,
    "max_vocab": embed.DEFAULT_MAX_VOCAB,
    "method": "knn",
    "k": select.DEFAULT_K,
    "dump_neighbors": 10,
    "mask_prob": mask.DEFAULT_MASK_PROB,
    "mask_epochs": 3,
    "max_len": corpus.DEFAULT_MAX_LEN,
    "pool_sentences": 1_000_000,
    "lm": {
        "order": lmproxy.DEFAULT_ORDER,
        "alpha": lmproxy.DEFAULT_ALPHA,
        "holdout_fraction": lmproxy.DEFAULT_HOLDOUT_FRACTION,
    },
    "plan": {"dapt_fixed_steps": plan.DAPT_FIXED_STEPS, "tapt_epochs": plan.DEFAULT_EPOCHS},
}


def load_config(spec: str | Path) -> dict:
    """Load a pipeline config; the name "demo" loads the bundled one."""
    if str(spec) == "demo":
        raw = resources.files("corpusmith").joinpath("data/demo.json").read_text("utf-8")
        config = json.loads(raw)
        config["_config_dir"] = None
    else:
        path = Path(spec)
        if not path.exists():
            raise DataError(f"{path}: no such config file")
        try:
            config = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc.msg})") from exc
        if not isinstance(config, dict):
            raise DataError(f"{path}: config must be a JSON object")
        config["_config_dir"] = str(path.parent)
    return config


def _merged(config: dict) -> dict:
    merged = dict(DEFAULTS)
    merged["lm"] = dict(DEFAULTS["lm"])
    merged["plan"] = dict(DEFAULTS["plan"])
    for key, value in config.items():
        if key in ("lm", "plan") and isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def _resolve_inputs(cfg: dict, out_dir: Path, seed: int) -> tuple[Path, Path, dict[str, Path]]:
    """(task_documents, domain_documents, extra domain corpora by name)."""
    if cfg.get("demo"):
        paths = generate_demo_corpus(out_dir / "inputs", seed)
        target = cfg.get("target_domain", TARGET_DOMAIN)
        if target not in paths:
            raise DataError(f"demo corpus has no domain '{target}'")
        extras = {
            name: path
            for name, path in paths.items()
            if name not in (TASK_DOMAIN, target)
        }
        return paths[TASK_DOMAIN], paths[target], extras
    inputs = cfg.get("inputs")
    if not isinstance(inputs, dict):
        raise DataError("config needs either demo: true or an inputs object")
    base = Path(cfg.get("_config_dir") or ".")

    def resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else base / path

    for field in ("task_documents", "domain_documents"):
        if field not in inputs:
            raise DataError(f"config inputs missing '{field}'")
    extras = {
        name: resolve(p) for name, p in (inputs.get("extra_domains") or {}).items()
    }
    return resolve(inputs["task_documents"]), resolve(inputs["domain_documents"]), extras


def run_pipeline(
    config: dict, out_dir: str | Path, threads: int = 1, seed_override: int | None = None
) -> dict:
    """Run every stage under out_dir and return the manifest."""
    cfg = _merged(config)
    seed = seed_override if seed_override is not None else int(cfg.get("seed", 0))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts: dict[str, object] = {}
    artifacts: list[Path] = []

    def done(path: Path) -> Path:
        artifacts.append(path)
        return path

    # 1. Inputs.
    task_docs_path, domain_docs_path, extra_paths = _resolve_inputs(cfg, out_dir, seed)
    if cfg.get("demo"):
        artifacts.extend([task_docs_path, domain_docs_path, *extra_paths.values()])
    task_docs = corpus.read_documents(task_docs_path)
    domain_docs = corpus.read_documents(domain_docs_path)
    if not task_docs:
        raise DataError(f"{task_docs_path}: task corpus is empty")
    if not domain_docs:
        raise DataError(f"{domain_docs_path}: domain corpus is empty")
    counts["task_documents"] = len(task_docs)
    counts["domain_documents"] = len(domain_docs)

    # 2. Sentences.
    task_sentences = [s for d in task_docs for s in corpus.split_sentences(d)]
    domain_sentences = [s for d in domain_docs for s in corpus.split_sentences(d)]
    task_sents_path = done(out_dir / "task_sentences.jsonl")
    corpus.write_sentences(task_sents_path, task_sentences)
    domain_sents_path = done(out_dir / "domain_sentences.jsonl")
    corpus.write_sentences(domain_sents_path, domain_sentences)
    counts["task_sentences"] = len(task_sentences)
    counts["domain_sentences"] = len(domain_sentences)

    # 3. Candidate pool: sample cap, then exact-text dedup.
    cap = int(cfg["pool_sentences"])
    sampled = (
        domain_sentences
        if len(domain_sentences) <= cap
        else corpus.sample_items(domain_sentences, cap, derive_seed(seed, "pool"))
    )
    pool = corpus.dedup_sentences(sampled)
    pool_path = done(out_dir / "pool_sentences.jsonl")
    corpus.write_sentences(pool_path, pool)
    counts["pool_sampled"] = len(sampled)
    counts["pool_sentences"] = len(pool)

    # 4. Embeddings: fit on the pool, embed both sides.
    model = embed.fit_embedder(
        pool,
        dim=int(cfg["dim"]),
        max_vocab=int(cfg["max_vocab"]),
        seed=derive_seed(seed, "embed"),
    )
    pool_emb = embed.embed_batch(model, pool)
    task_emb = embed.embed_batch(model, task_sentences)
    pool_emb_path = done(out_dir / "pool.emb")
    embed.write_embeddings(pool_emb_path, pool_emb)
    task_emb_path = done(out_dir / "task.emb")
    embed.write_embeddings(task_emb_path, task_emb)
    for extra in (".ids", ".meta.json"):
        artifacts.append(pool_emb_path.with_name(pool_emb_path.name + extra))
        artifacts.append(task_emb_path.with_name(task_emb_path.name + extra))
    counts["embedder_vocab"] = len(model.terms)
    counts["model_fingerprint"] = model.fingerprint()
    counts["task_zero_rows"] = len(task_emb.zero_rows)
    counts["pool_zero_rows"] = len(pool_emb.zero_rows)

    # 5. Selection.
    method = str(cfg["method"])
    k = int(cfg["k"])
    if method == "knn":
        selection = select.select_knn(task_emb, pool_emb, k, threads=threads)
    elif method == "rand":
        selection = select.select_random(
            len(task_emb.ids),
            pool_emb.ids,
            k,
            seed=derive_seed(seed, "select"),
            query_ids=task_emb.ids,
        )
    else:
        raise DataError(f"unknown selection method '{method}'")
    selection_path = done(out_dir / "selection.jsonl")
    select.write_selection(selection_path, selection)
    pool_ids_path = done(out_dir / "selected_pool.txt")
    select.write_pool(pool_ids_path, selection)
    dump_limit = int(cfg["dump_neighbors"])
    if dump_limit > 0:
        dump_path = done(out_dir / "neighbors.txt")
        select.write_neighbor_dump(
            dump_path,
            selection,
            {s.sent_id: s.text for s in task_sentences},
            {s.sent_id: s.text for s in pool},
            limit=dump_limit,
        )
    counts["selection_queries"] = selection.stats.queries
    counts["selected_candidates"] = selection.stats.unique_candidates

    # 6. Augmented corpus, packed into training sequences.
    by_id = {s.sent_id: s for s in pool}
    augmented = select.assemble_corpus(task_sentences, selection, by_id)
    augmented_path = done(out_dir / "augmented.jsonl")
    write_augmented(augmented_path, augmented)
    seq_docs = corpus.sentences_to_documents(augmented.sentences, "augmented")
    sequences = list(
        corpus.pack_sequences(seq_docs, int(cfg["max_len"]), derive_seed(seed, "pack"))
    )
    sequences_path = done(out_dir / "augmented_sequences.jsonl")
    corpus.write_sequences(sequences_path, sequences)
    counts["augmented_sentences"] = len(augmented.sentences)
    counts["augmented_provenance"] = augmented.counts()
    counts["sequences"] = len(sequences)

    # 7. Masking.
    masked_path = done(out_dir / "masked.jsonl")
    masked_count = mask.write_masked(
        masked_path,
        mask.augment_epochs(
            sequences,
            int(cfg["mask_epochs"]),
            float(cfg["mask_prob"]),
            derive_seed(seed, "mask"),
        ),
    )
    counts["masked_records"] = masked_count

    # 8. Vocabulary overlap across every corpus with a distinct domain.
    corpora: dict[str, list[corpus.Document]] = {}
    task_domain = task_docs[0].domain
    corpora[task_domain] = task_docs
    domain_name = domain_docs[0].domain
    corpora[domain_name] = domain_docs
    for name, path in extra_paths.items():
        corpora[name] = corpus.read_documents(path)
    stopwords = vocab.load_stopwords()
    if len(corpora) >= 2:
        vocab_dir = out_dir / "vocab"
        vocabs = []
        for name, docs in corpora.items():
            sample = vocab.sample_for_vocab(
                docs, cfg["vocab_sample"], derive_seed(seed, "vocab", name)
            )
            v = vocab.build_vocabulary(
                sample, int(cfg["vocab_k"]), stopwords, domain=name
            )
            vocab.write_vocabulary(done(vocab_dir / f"{name}.tsv"), v)
            vocabs.append(v)
        matrix = vocab.overlap_matrix(vocabs)
        overlap_path = done(out_dir / "overlap.tsv")
        vocab.write_overlap_tsv(overlap_path, matrix)
        counts["overlap_domains"] = matrix.domains
        counts["irrelevant_domain"] = vocab.pick_irrelevant_domain(matrix, task_domain)

    # 9. Cross-domain loss matrix over the domain corpora (not the task).
    lm_corpora = {name: docs for name, docs in corpora.items() if name != task_domain}
    if len(lm_corpora) >= 2:
        lm_cfg = cfg["lm"]
        loss = lmproxy.cross_domain_matrix(
            lm_corpora,
            order=int(lm_cfg["order"]),
            alpha=float(lm_cfg["alpha"]),
            holdout_fraction=float(lm_cfg["holdout_fraction"]),
            seed=derive_seed(seed, "lm"),
        )
        lmproxy.write_loss_tsv(done(out_dir / "loss_matrix.tsv"), loss)
        lmproxy.write_loss_json(done(out_dir / "loss_matrix.json"), loss)
        counts["loss_domains"] = loss.domains

    # 10. Compute plans and the cost comparison.
    plan_cfg = cfg["plan"]
    tapt_epochs = int(plan_cfg["tapt_epochs"])
    plans = [
        plan.plan_phase(
            "TAPT",
            len(task_sentences),
            epochs=tapt_epochs,
            storage_bytes=task_sents_path.stat().st_size,
        ),
        plan.plan_phase(
            "KNN_TAPT" if method == "knn" else "RAND_TAPT",
            len(augmented.sentences),
            epochs=tapt_epochs,
            storage_bytes=augmented_path.stat().st_size,
            k=k,
        ),
        plan.plan_phase(
            "DAPT",
            len(domain_docs),
            storage_bytes=domain_docs_path.stat().st_size,
            overrides={"fixed_steps": int(plan_cfg["dapt_fixed_steps"])},
        ),
        plan.plan_phase(
            "DAPT_THEN_TAPT",
            len(domain_docs),
            storage_bytes=domain_docs_path.stat().st_size
            + task_sents_path.stat().st_size,
            overrides={
                "fixed_steps": int(plan_cfg["dapt_fixed_steps"]),
                "task_docs": len(task_sentences),
                "task_epochs": tapt_epochs,
            },
        ),
    ]
    plan_dir = out_dir / "plans"
    for p in plans:
        name = p.phase.lower().replace("(", "_").replace(")", "")
        plan.write_plan_json(done(plan_dir / f"{name}.json"), p)
    report = plan.compare_plans(plans)
    plan.write_compare_json(done(out_dir / "cost_report.json"), report)
    counts["cheapest_phase"] = report["baseline"]

    # 11. Manifest.
    manifest = {
        "seed": seed,
        "config": {key: value for key, value in cfg.items() if key != "_config_dir"},
        "counts": counts,
        "stopwords_sha256": vocab.stopwords_sha256(),
        "artifacts": {
            str(path.relative_to(out_dir)): {
                "bytes": path.stat().st_size,
                "sha256": sha256_file(path),
            }
            for path in sorted(artifacts)
        },
    }
    manifest_path = out_dir / "manifest.json"
    with atomic_write(manifest_path) as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")
    return manifest


def write_augmented(path: Path, augmented: select.AugmentedCorpus) -> int:
    """Sentence records plus a provenance field per line."""
    from .fileio import write_jsonl

    return write_jsonl(
        path,
        (
            {
                "sent_id": s.sent_id,
                "doc_id": s.doc_id,
                "idx": s.idx,
                "text": s.text,
                "token_count": s.token_count,
                "provenance": tag,
            }
            for s, tag in zip(augmented.sentences, augmented.provenance)
        ),
    )
