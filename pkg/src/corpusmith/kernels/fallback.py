"""Pure numpy/Python implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled. Results are
bit-identical to the compiled versions: the xoshiro step is the same
integer recurrence, and top-k scoring accumulates dot products in float64
in both paths.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def u64_block(s0: int, s1: int, s2: int, s3: int, n: int):
    """n xoshiro256** draws. Returns (uint64 array, advanced state)."""
    out = np.empty(n, dtype=np.uint64)
    mask = _MASK64
    for i in range(n):
        r = (s1 * 5) & mask
        out[i] = ((((r << 7) | (r >> 57)) & mask) * 9) & mask
        t = (s1 << 17) & mask
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & mask
    return out, (s0, s1, s2, s3)


def topk_cosine(vectors: np.ndarray, queries: np.ndarray, k: int):
    """Exact top-k by dot product over unit-normalized float32 rows.

    Returns (idx, scores): int64 and float64 arrays of shape
    (n_queries, min(k, n_rows)), each query's hits ordered by score
    descending with ties broken by ascending row index. Scores are
    accumulated in float64.
    """
    n = vectors.shape[0]
    nq = queries.shape[0]
    keff = min(k, n)
    if keff == 0 or nq == 0:
        return (np.empty((nq, 0), dtype=np.int64), np.empty((nq, 0), dtype=np.float64))
    q64 = queries.astype(np.float64, copy=False)
    run_idx = np.empty((nq, 0), dtype=np.int64)
    run_scores = np.empty((nq, 0), dtype=np.float64)
    block = 8192
    for start in range(0, n, block):
        cand = vectors[start : start + block].astype(np.float64, copy=False)
        scores = q64 @ cand.T
        take = min(keff, scores.shape[1])
        # Stable argsort on the negated scores keeps ascending index order
        # among equal scores.
        order = np.argsort(-scores, axis=1, kind="stable")[:, :take]
        cat_idx = np.concatenate([run_idx, order.astype(np.int64) + start], axis=1)
        cat_scores = np.concatenate(
            [run_scores, np.take_along_axis(scores, order, axis=1)], axis=1
        )
        # Merge: sort by index first, then stable-sort by score so that
        # equal scores stay in ascending index order.
        by_idx = np.argsort(cat_idx, axis=1, kind="stable")
        cat_idx = np.take_along_axis(cat_idx, by_idx, axis=1)
        cat_scores = np.take_along_axis(cat_scores, by_idx, axis=1)
        by_score = np.argsort(-cat_scores, axis=1, kind="stable")[:, :keff]
        run_idx = np.take_along_axis(cat_idx, by_score, axis=1)
        run_scores = np.take_along_axis(cat_scores, by_score, axis=1)
    return run_idx, run_scores
