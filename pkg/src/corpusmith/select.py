"""Nearest-neighbor selection of domain sentences for task queries.

The index is an exact flat scan: no approximation, no training. Index
rows are held sorted by sentence id, so the kernel tie-break (ascending
row on equal score) is an ascending-id tie-break, identical across
backends and worker counts. Selection deduplicates neighbor ids across
queries into a first-occurrence-ordered pool.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import SentenceRecord
from .embed import EmbeddingMatrix
from .errors import DataError
from .fileio import atomic_write, iter_jsonl, require_field, write_jsonl
from .rng import Xoshiro256StarStar

DEFAULT_K = 50

_QUERY_BLOCK = 256


@dataclass
class FlatIndex:
    ids: list[str]
    vectors: np.ndarray
    dropped_zero_rows: int = 0


@dataclass
class SelectionStats:
    queries: int
    unique_candidates: int
    total_pairs: int
    skipped_zero_queries: int = 0


@dataclass
class SelectionResult:
    method: str
    k: int
    per_query: dict[str, list[tuple[str, float]]]
    selected_pool: list[str]
    stats: SelectionStats


def build_index(matrix: EmbeddingMatrix) -> FlatIndex:
    """Index an embedding matrix for exact cosine search.

    Zero rows (sentences with no in-vocabulary terms) are dropped, NaNs
    are rejected, duplicate ids are rejected, and the surviving rows are
    sorted by id.
    """
    if matrix.vectors.ndim != 2:
        raise DataError("embedding matrix must be 2-dimensional")
    if np.isnan(matrix.vectors).any():
        raise DataError("embedding matrix contains NaN values")
    zero = set(matrix.zero_rows)
    keep = [i for i in range(len(matrix.ids)) if i not in zero]
    ids = [matrix.ids[i] for i in keep]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate ids in embedding matrix")
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    sorted_ids = [ids[i] for i in order]
    vectors = np.ascontiguousarray(
        matrix.vectors[[keep[i] for i in order]], dtype=np.float32
    )
    return FlatIndex(ids=sorted_ids, vectors=vectors, dropped_zero_rows=len(zero))


def knn_query(
    index: FlatIndex, queries: np.ndarray, k: int, threads: int = 1
) -> list[list[tuple[str, float]]]:
    """Top-k ids and cosine scores for each query row.

    Returns min(k, index size) hits per query, score descending, ties by
    ascending id. With threads > 1 query blocks run in parallel; results
    are identical to the single-threaded scan.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    queries = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float32)
    if queries.shape[1] != index.vectors.shape[1]:
        raise DataError(
            f"query dim {queries.shape[1]} does not match index dim {index.vectors.shape[1]}"
        )
    blocks = [queries[i : i + _QUERY_BLOCK] for i in range(0, len(queries), _QUERY_BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda b: kernels.topk_cosine(index.vectors, b, k), blocks)
            )
    else:
        parts = [kernels.topk_cosine(index.vectors, b, k) for b in blocks]
    out: list[list[tuple[str, float]]] = []
    for idx, scores in parts:
        for row in range(idx.shape[0]):
            out.append(
                [
                    (index.ids[int(i)], float(s))
                    for i, s in zip(idx[row], scores[row])
                ]
            )
    return out


def select_knn(
    task: EmbeddingMatrix,
    domain: EmbeddingMatrix,
    k: int = DEFAULT_K,
    threads: int = 1,
) -> SelectionResult:
    """k nearest domain sentences for every task sentence.

    Both matrices must come from the same embedder model; their
    fingerprints are compared when both are present. Task rows flagged as
    zero are skipped (a zero query has no meaningful neighbors). The pool
    is the first-occurrence dedup over queries in task order, neighbors
    in rank order.
    """
    if (
        task.model_fingerprint is not None
        and domain.model_fingerprint is not None
        and task.model_fingerprint != domain.model_fingerprint
    ):
        raise DataError(
            "embedding matrices come from different embedder models: "
            f"{task.model_fingerprint[:12]} vs {domain.model_fingerprint[:12]}"
        )
    index = build_index(domain)
    if not index.ids:
        raise DataError("domain embedding matrix has no usable rows")
    zero = set(task.zero_rows)
    query_rows = [i for i in range(len(task.ids)) if i not in zero]
    neighbors = knn_query(index, task.vectors[query_rows], k, threads=threads)
    per_query: dict[str, list[tuple[str, float]]] = {}
    for row, hits in zip(query_rows, neighbors):
        per_query[task.ids[row]] = hits
    pool: list[str] = []
    seen: set[str] = set()
    total = 0
    for qid in per_query:
        for cand_id, _ in per_query[qid]:
            total += 1
            if cand_id not in seen:
                seen.add(cand_id)
                pool.append(cand_id)
    return SelectionResult(
        method="knn",
        k=k,
        per_query=per_query,
        selected_pool=pool,
        stats=SelectionStats(
            queries=len(per_query),
            unique_candidates=len(pool),
            total_pairs=total,
            skipped_zero_queries=len(zero),
        ),
    )


def select_random(
    task_count: int,
    pool_ids: Sequence[str],
    k: int = DEFAULT_K,
    seed: int = 0,
    query_ids: Sequence[str] | None = None,
) -> SelectionResult:
    """Uniform random baseline: k draws with replacement per task query."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if task_count < 1:
        raise DataError(f"task_count must be >= 1, got {task_count}")
    if not pool_ids:
        raise DataError("candidate pool is empty")
    if query_ids is not None and len(query_ids) != task_count:
        raise DataError(
            f"got {len(query_ids)} query ids for task_count {task_count}"
        )
    gen = Xoshiro256StarStar(seed)
    per_query: dict[str, list[tuple[str, float]]] = {}
    pool: list[str] = []
    seen: set[str] = set()
    total = 0
    for qi in range(task_count):
        qid = query_ids[qi] if query_ids is not None else f"q{qi}"
        hits = []
        for _ in range(k):
            cand_id = pool_ids[gen.next_below(len(pool_ids))]
            hits.append((cand_id, 0.0))
            total += 1
            if cand_id not in seen:
                seen.add(cand_id)
                pool.append(cand_id)
        per_query[qid] = hits
    return SelectionResult(
        method="rand",
        k=k,
        per_query=per_query,
        selected_pool=pool,
        stats=SelectionStats(
            queries=task_count, unique_candidates=len(pool), total_pairs=total
        ),
    )


@dataclass
class AugmentedCorpus:
    sentences: list[SentenceRecord]
    provenance: list[str] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for tag in self.provenance:
            out[tag] = out.get(tag, 0) + 1
        return out


def assemble_corpus(
    task_sentences: Sequence[SentenceRecord],
    selection: SelectionResult | None,
    candidates_by_id: Mapping[str, SentenceRecord],
    curated: Sequence[SentenceRecord] | None = None,
) -> AugmentedCorpus:
    """Task sentences plus selected candidates plus optional curated text.

    Order is task sentences first, then pool candidates in pool order,
    then curated sentences. Exact duplicate text keeps its first
    occurrence, so a candidate equal to a task sentence appears once with
    task provenance. A pool id absent from candidates_by_id is an error.
    """
    sentences: list[SentenceRecord] = []
    provenance: list[str] = []
    seen: set[str] = set()

    def add(record: SentenceRecord, tag: str) -> None:
        key = record.text.strip()
        if key in seen:
            return
        seen.add(key)
        sentences.append(record)
        provenance.append(tag)

    for record in task_sentences:
        add(record, "task")
    if selection is not None:
        for cand_id in selection.selected_pool:
            record = candidates_by_id.get(cand_id)
            if record is None:
                raise DataError(f"selection references unknown sentence id '{cand_id}'")
            add(record, selection.method)
    for record in curated or []:
        add(record, "curated")
    return AugmentedCorpus(sentences=sentences, provenance=provenance)


# ---------------------------------------------------------------------------
# Serialization


def write_selection(path: str | Path, result: SelectionResult) -> int:
    """One JSON line per query: id, method, k, ranked neighbors."""
    return write_jsonl(
        path,
        (
            {
                "query_id": qid,
                "method": result.method,
                "k": result.k,
                "neighbors": [
                    {"id": cand_id, "score": score} for cand_id, score in hits
                ],
            }
            for qid, hits in result.per_query.items()
        ),
    )


def read_selection(path: str | Path) -> SelectionResult:
    per_query: dict[str, list[tuple[str, float]]] = {}
    method = None
    k = None
    for lineno, obj in iter_jsonl(path):
        where = f"{path}:{lineno}"
        qid = require_field(obj, "query_id", str, where)
        row_method = require_field(obj, "method", str, where)
        row_k = require_field(obj, "k", int, where)
        if method is None:
            method, k = row_method, row_k
        elif method != row_method or k != row_k:
            raise DataError(f"{where}: mixed method/k in selection file")
        neighbors = require_field(obj, "neighbors", list, where)
        hits = []
        for entry in neighbors:
            hits.append(
                (
                    require_field(entry, "id", str, where),
                    float(require_field(entry, "score", (int, float), where)),
                )
            )
        if qid in per_query:
            raise DataError(f"{where}: duplicate query id '{qid}'")
        per_query[qid] = hits
    if method is None:
        raise DataError(f"{path}: selection file is empty")
    pool: list[str] = []
    seen: set[str] = set()
    total = 0
    for hits in per_query.values():
        for cand_id, _ in hits:
            total += 1
            if cand_id not in seen:
                seen.add(cand_id)
                pool.append(cand_id)
    return SelectionResult(
        method=method,
        k=k,
        per_query=per_query,
        selected_pool=pool,
        stats=SelectionStats(
            queries=len(per_query), unique_candidates=len(pool), total_pairs=total
        ),
    )


def write_pool(path: str | Path, result: SelectionResult) -> None:
    """Selected candidate ids, one per line, first-occurrence order."""
    with atomic_write(path) as handle:
        for cand_id in result.selected_pool:
            handle.write(cand_id + "\n")


def write_neighbor_dump(
    path: str | Path,
    result: SelectionResult,
    query_texts: Mapping[str, str],
    candidate_texts: Mapping[str, str],
    limit: int = 10,
) -> None:
    """Human-readable spot-check dump of the first queries and their hits."""
    with atomic_write(path) as handle:
        for qi, (qid, hits) in enumerate(result.per_query.items()):
            if qi >= limit:
                break
            handle.write(f"query {qid}: {query_texts.get(qid, '')}\n")
            for rank, (cand_id, score) in enumerate(hits, start=1):
                text = candidate_texts.get(cand_id, "")
                handle.write(f"  {rank:>3} {score:+.4f} {cand_id}: {text}\n")
            handle.write("\n")
