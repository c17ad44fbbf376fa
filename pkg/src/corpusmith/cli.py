"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error. Every subcommand
writes its outputs atomically and prints a single JSON summary line to
stdout; errors go to stderr as a JSON object with an "error" key.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, embed, lmproxy, mask, pipeline, plan, select, vocab
from .errors import CorpusmithError, DataError, UsageError
from .rng import derive_seed


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_seed(parser, default=0):
    parser.add_argument("--seed", type=int, default=default, help="base PRNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corpusmith", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="split documents into sentences and sequences")
    p.add_argument("--input", required=True, help="documents.jsonl")
    p.add_argument("--sentences-out", required=True, help="sentence records out")
    p.add_argument("--sequences-out", help="packed training sequences out")
    p.add_argument("--max-len", type=int, default=corpus.DEFAULT_MAX_LEN)
    _add_seed(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("vocab", help="build a top-k domain vocabulary")
    p.add_argument("--input", required=True, help="documents.jsonl")
    p.add_argument("--output", required=True, help="term<TAB>count out")
    p.add_argument("--vocab-k", type=int, default=vocab.DEFAULT_VOCAB_K)
    p.add_argument("--sample", type=int, default=None, help="document sample cap")
    p.add_argument("--stopwords", help="stopword file (default: bundled list)")
    p.add_argument("--domain", help="domain label (default: from the documents)")
    _add_seed(p)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("overlap", help="vocabulary overlap matrix across corpora")
    p.add_argument("--corpora", nargs="+", required=True, help="one documents.jsonl per domain")
    p.add_argument("--output", required=True, help="overlap TSV out")
    p.add_argument("--vocab-k", type=int, default=vocab.DEFAULT_VOCAB_K)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--stopwords")
    p.add_argument("--pick-irrelevant", metavar="DOMAIN", help="also report the least-overlapping domain for DOMAIN")
    _add_seed(p)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("dedup", help="drop exact duplicate sentences")
    p.add_argument("--input", required=True, help="sentences.jsonl")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("embed", help="fit the embedder and embed sentence files")
    p.add_argument("--fit", required=True, help="sentences.jsonl to fit on")
    p.add_argument("--embed", nargs="*", default=None, metavar="SENTENCES",
                   help="sentence files to embed (default: the fit corpus)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dim", type=int, default=embed.DEFAULT_DIM)
    p.add_argument("--max-vocab", type=int, default=embed.DEFAULT_MAX_VOCAB)
    _add_seed(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("select", help="select task-relevant candidates")
    p.add_argument("--task-emb", required=True, help="task EMB1 file")
    p.add_argument("--domain-emb", required=True, help="candidate pool EMB1 file")
    p.add_argument("--method", choices=("knn", "rand"), default="knn")
    p.add_argument("--k", type=int, default=select.DEFAULT_K)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--selection-out", required=True)
    p.add_argument("--pool-out", required=True)
    p.add_argument("--dump-out", help="human-readable neighbor dump")
    p.add_argument("--dump-limit", type=int, default=10)
    p.add_argument("--task-sentences", help="sentence texts for the dump")
    p.add_argument("--domain-sentences", help="sentence texts for the dump")
    _add_seed(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("assemble", help="merge task, selected, and curated sentences")
    p.add_argument("--task-sentences", required=True)
    p.add_argument("--candidates", required=True, help="sentences the selection ids point into")
    p.add_argument("--selection", required=True, help="selection.jsonl")
    p.add_argument("--curated", help="extra curated sentences.jsonl")
    p.add_argument("--output", required=True, help="augmented corpus out")
    p.add_argument("--sequences-out", help="also pack into training sequences")
    p.add_argument("--max-len", type=int, default=corpus.DEFAULT_MAX_LEN)
    _add_seed(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("mask", help="masking augmentation over sequences")
    p.add_argument("--sequences", required=True, help="sequences.jsonl")
    p.add_argument("--output", required=True, help="masked.jsonl out")
    p.add_argument("--mask-prob", type=float, default=mask.DEFAULT_MASK_PROB)
    p.add_argument("--epochs", type=int, default=plan.DEFAULT_EPOCHS)
    _add_seed(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("lm-matrix", help="cross-domain n-gram loss matrix")
    p.add_argument("--corpora", nargs="+", required=True, help="one documents.jsonl per domain")
    p.add_argument("--tsv-out", required=True)
    p.add_argument("--json-out", required=True)
    p.add_argument("--order", type=int, default=lmproxy.DEFAULT_ORDER)
    p.add_argument("--alpha", type=float, default=lmproxy.DEFAULT_ALPHA)
    p.add_argument("--holdout", type=float, default=lmproxy.DEFAULT_HOLDOUT_FRACTION)
    _add_seed(p)
    p.set_defaults(func=cmd_lm_matrix)

    p = sub.add_parser("plan", help="step plans and cost comparisons")
    p.add_argument("--phase", choices=plan.PHASES)
    p.add_argument("--docs", type=int, help="phase corpus size in documents")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--k", type=int, default=None, help="selection k, for the kNN/rand phases")
    p.add_argument("--storage-bytes", type=int, default=None)
    p.add_argument("--storage-from", metavar="FILE", help="use FILE's size as storage_bytes")
    p.add_argument("--fixed-steps", type=int, default=None)
    p.add_argument("--formula", action="store_true",
                   help="use the ceil formula even for DAPT")
    p.add_argument("--task-docs", type=int, help="TAPT corpus size for DAPT_THEN_TAPT")
    p.add_argument("--task-epochs", type=int, default=None)
    p.add_argument("--compare", nargs="+", metavar="PLAN_JSON",
                   help="compare existing plan files instead of planning a phase")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config")
    p.add_argument("--config", required=True, help='config JSON path, or "demo"')
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_pipeline)

    return parser


# ---------------------------------------------------------------------------
# Subcommand bodies. Each returns the summary dict for stdout.


def cmd_ingest(args) -> dict:
    docs = corpus.read_documents(args.input)
    sentences = [s for d in docs for s in corpus.split_sentences(d)]
    corpus.write_sentences(args.sentences_out, sentences)
    summary = {
        "command": "ingest",
        "documents": len(docs),
        "sentences": len(sentences),
        "sentences_out": args.sentences_out,
    }
    if args.sequences_out:
        seqs = list(corpus.pack_sequences(docs, args.max_len, args.seed))
        corpus.write_sequences(args.sequences_out, seqs)
        summary["sequences"] = len(seqs)
        summary["sequences_out"] = args.sequences_out
    return summary


def cmd_vocab(args) -> dict:
    docs = corpus.read_documents(args.input)
    if not docs:
        raise DataError(f"{args.input}: corpus is empty")
    stopwords = vocab.load_stopwords(args.stopwords)
    sample = vocab.sample_for_vocab(docs, args.sample, args.seed)
    built = vocab.build_vocabulary(sample, args.vocab_k, stopwords, domain=args.domain)
    vocab.write_vocabulary(args.output, built)
    return {
        "command": "vocab",
        "domain": built.domain,
        "k": built.k,
        "terms": len(built.terms),
        "sample_docs": built.sample_docs,
        "stopwords_sha256": vocab.stopwords_sha256(args.stopwords),
        "output": args.output,
    }


def _single_domain_corpus(path: str) -> tuple[str, list[corpus.Document]]:
    docs = corpus.read_documents(path)
    if not docs:
        raise DataError(f"{path}: corpus is empty")
    domains = {d.domain for d in docs}
    if len(domains) != 1:
        raise DataError(
            f"{path}: expected a single-domain corpus, found {', '.join(sorted(domains))}"
        )
    return docs[0].domain, docs


def cmd_overlap(args) -> dict:
    stopwords = vocab.load_stopwords(args.stopwords)
    vocabs = []
    for path in args.corpora:
        domain, docs = _single_domain_corpus(path)
        sample = vocab.sample_for_vocab(
            docs, args.sample, derive_seed(args.seed, "vocab", domain)
        )
        vocabs.append(
            vocab.build_vocabulary(sample, args.vocab_k, stopwords, domain=domain)
        )
    matrix = vocab.overlap_matrix(vocabs)
    vocab.write_overlap_tsv(args.output, matrix)
    summary = {
        "command": "overlap",
        "domains": matrix.domains,
        "k": args.vocab_k,
        "output": args.output,
    }
    if args.pick_irrelevant:
        summary["irrelevant_domain"] = vocab.pick_irrelevant_domain(
            matrix, args.pick_irrelevant
        )
    return summary


def cmd_dedup(args) -> dict:
    records = corpus.read_sentences(args.input)
    deduped = corpus.dedup_sentences(records)
    corpus.write_sentences(args.output, deduped)
    return {
        "command": "dedup",
        "input_sentences": len(records),
        "kept_sentences": len(deduped),
        "output": args.output,
    }


def cmd_embed(args) -> dict:
    fit_records = corpus.read_sentences(args.fit)
    model = embed.fit_embedder(fit_records, args.dim, args.max_vocab, args.seed)
    targets = args.embed if args.embed else [args.fit]
    out_dir = Path(args.out_dir)
    outputs = []
    for target in targets:
        records = fit_records if target == args.fit else corpus.read_sentences(target)
        matrix = embed.embed_batch(model, records)
        out_path = out_dir / (Path(target).stem + ".emb")
        embed.write_embeddings(out_path, matrix)
        outputs.append(
            {"input": target, "output": str(out_path), "rows": len(matrix.ids),
             "zero_rows": len(matrix.zero_rows)}
        )
    return {
        "command": "embed",
        "fit_sentences": len(fit_records),
        "vocab": len(model.terms),
        "dim": model.dim,
        "model_fingerprint": model.fingerprint(),
        "outputs": outputs,
    }


def cmd_select(args) -> dict:
    task_emb = embed.read_embeddings(args.task_emb)
    domain_emb = embed.read_embeddings(args.domain_emb)
    if args.method == "knn":
        result = select.select_knn(task_emb, domain_emb, args.k, threads=args.threads)
    else:
        result = select.select_random(
            len(task_emb.ids),
            domain_emb.ids,
            args.k,
            seed=args.seed,
            query_ids=task_emb.ids,
        )
    select.write_selection(args.selection_out, result)
    select.write_pool(args.pool_out, result)
    if args.dump_out:
        query_texts = {}
        candidate_texts = {}
        if args.task_sentences:
            query_texts = {s.sent_id: s.text for s in corpus.read_sentences(args.task_sentences)}
        if args.domain_sentences:
            candidate_texts = {s.sent_id: s.text for s in corpus.read_sentences(args.domain_sentences)}
        select.write_neighbor_dump(
            args.dump_out, result, query_texts, candidate_texts, args.dump_limit
        )
    return {
        "command": "select",
        "method": result.method,
        "k": result.k,
        "queries": result.stats.queries,
        "unique_candidates": result.stats.unique_candidates,
        "total_pairs": result.stats.total_pairs,
        "selection_out": args.selection_out,
        "pool_out": args.pool_out,
    }


def cmd_assemble(args) -> dict:
    task_sentences = corpus.read_sentences(args.task_sentences)
    candidates = corpus.read_sentences(args.candidates)
    selection = select.read_selection(args.selection)
    curated = corpus.read_sentences(args.curated) if args.curated else None
    augmented = select.assemble_corpus(
        task_sentences, selection, {s.sent_id: s for s in candidates}, curated
    )
    pipeline.write_augmented(Path(args.output), augmented)
    summary = {
        "command": "assemble",
        "sentences": len(augmented.sentences),
        "provenance": augmented.counts(),
        "output": args.output,
    }
    if args.sequences_out:
        seq_docs = corpus.sentences_to_documents(augmented.sentences, "augmented")
        seqs = list(corpus.pack_sequences(seq_docs, args.max_len, args.seed))
        corpus.write_sequences(args.sequences_out, seqs)
        summary["sequences"] = len(seqs)
        summary["sequences_out"] = args.sequences_out
    return summary


def cmd_mask(args) -> dict:
    seqs = corpus.read_sequences(args.sequences)
    if not seqs:
        raise DataError(f"{args.sequences}: no sequences to mask")
    total_positions = sum(len(s.tokens) for s in seqs) * args.epochs
    masked_positions = 0

    def stream():
        nonlocal masked_positions
        for m in mask.augment_epochs(seqs, args.epochs, args.mask_prob, args.seed):
            masked_positions += len(m.masked_positions)
            yield m

    records = mask.write_masked(args.output, stream())
    return {
        "command": "mask",
        "sequences": len(seqs),
        "epochs": args.epochs,
        "mask_prob": args.mask_prob,
        "records": records,
        "masked_positions": masked_positions,
        "total_positions": total_positions,
        "output": args.output,
    }


def cmd_lm_matrix(args) -> dict:
    corpora = {}
    for path in args.corpora:
        domain, docs = _single_domain_corpus(path)
        if domain in corpora:
            raise DataError(f"{path}: duplicate domain '{domain}'")
        corpora[domain] = docs
    matrix = lmproxy.cross_domain_matrix(
        corpora,
        order=args.order,
        alpha=args.alpha,
        holdout_fraction=args.holdout,
        seed=args.seed,
    )
    lmproxy.write_loss_tsv(args.tsv_out, matrix)
    lmproxy.write_loss_json(args.json_out, matrix)
    return {
        "command": "lm-matrix",
        "domains": matrix.domains,
        "order": args.order,
        "alpha": args.alpha,
        "tsv_out": args.tsv_out,
        "json_out": args.json_out,
    }


def cmd_plan(args) -> dict:
    if args.compare:
        plans = [plan.read_plan_json(path) for path in args.compare]
        report = plan.compare_plans(plans)
        plan.write_compare_json(args.output, report)
        return {
            "command": "plan",
            "mode": "compare",
            "baseline": report["baseline"],
            "plans": len(plans),
            "output": args.output,
        }
    if not args.phase or args.docs is None:
        raise UsageError("plan needs either --compare or both --phase and --docs")
    storage = args.storage_bytes or 0
    if args.storage_from:
        source = Path(args.storage_from)
        if not source.exists():
            raise DataError(f"{source}: no such file")
        storage = source.stat().st_size
    overrides: dict[str, object] = {}
    if args.formula:
        overrides["fixed_steps"] = None
    elif args.fixed_steps is not None:
        overrides["fixed_steps"] = args.fixed_steps
    if args.task_docs is not None:
        overrides["task_docs"] = args.task_docs
    if args.task_epochs is not None:
        overrides["task_epochs"] = args.task_epochs
    planned = plan.plan_phase(
        args.phase,
        args.docs,
        epochs=args.epochs,
        storage_bytes=storage,
        k=args.k,
        overrides=overrides,
    )
    plan.write_plan_json(args.output, planned)
    summary = planned.to_dict()
    summary["command"] = "plan"
    summary["output"] = args.output
    return summary


def cmd_pipeline(args) -> dict:
    config = pipeline.load_config(args.config)
    manifest = pipeline.run_pipeline(
        config, args.out_dir, threads=args.threads, seed_override=args.seed
    )
    return {
        "command": "pipeline",
        "out_dir": args.out_dir,
        "seed": manifest["seed"],
        "artifacts": len(manifest["artifacts"]),
        "counts": manifest["counts"],
        "manifest": str(Path(args.out_dir) / "manifest.json"),
    }


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        summary = args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": str(exc), "exit": 1}), file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(json.dumps({"error": str(exc), "exit": 2}), file=sys.stderr)
        return 2
    except CorpusmithError as exc:
        print(json.dumps({"error": str(exc), "exit": 2}), file=sys.stderr)
        return 2
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
