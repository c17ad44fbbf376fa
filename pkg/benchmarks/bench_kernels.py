"""Benchmark the compiled kernels against the pure-Python fallback.

Runs both backends on the same PRNG-block and top-k workloads, checks
that they agree, and prints a timing table. The compiled extension must
be built for the comparison; without it only the fallback is timed.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--queries N] ...
"""

import argparse
import time

import numpy as np

from corpusmith.kernels import fallback

try:
    from corpusmith.kernels import _native as native
except ImportError:
    native = None


def best_of(repeats, fn):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def unit_rows(rng, n, dim):
    v = rng.standard_normal((n, dim)).astype(np.float32)
    norms = np.linalg.norm(v.astype(np.float64), axis=1, keepdims=True)
    return np.ascontiguousarray(v / norms.astype(np.float32))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=200_000, help="PRNG draws per run")
    parser.add_argument("--rows", type=int, default=20_000, help="index rows")
    parser.add_argument("--queries", type=int, default=256)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--k", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=3, help="best-of timing repeats")
    args = parser.parse_args()

    backends = [("python", fallback)]
    if native is not None:
        backends.append(("native", native))
    else:
        print("compiled extension not built; timing the fallback only\n")

    rng = np.random.default_rng(12345)
    vectors = unit_rows(rng, args.rows, args.dim)
    queries = unit_rows(rng, args.queries, args.dim)
    state = (
        0x9E3779B97F4A7C15,
        0xBF58476D1CE4E5B9,
        0x94D049BB133111EB,
        0x2545F4914F6CDD1D,
    )

    rows = []
    outputs = {}
    for name, impl in backends:
        t_rng, (stream_out, _) = best_of(
            args.repeats, lambda impl=impl: impl.u64_block(*state, args.draws)
        )
        t_topk, topk_out = best_of(
            args.repeats, lambda impl=impl: impl.topk_cosine(vectors, queries, args.k)
        )
        outputs[name] = (stream_out, topk_out)
        rows.append((name, t_rng, t_topk))

    if native is not None:
        py_stream, py_topk = outputs["python"]
        nat_stream, nat_topk = outputs["native"]
        assert np.array_equal(py_stream, nat_stream), "PRNG streams diverged"
        assert np.array_equal(py_topk[0], nat_topk[0]), "top-k ids diverged"
        np.testing.assert_allclose(py_topk[1], nat_topk[1], atol=1e-12)
        print("agreement: PRNG streams bit-identical, top-k ids identical, "
              "scores within 1e-12\n")

    print(f"workload: {args.draws} draws; "
          f"{args.queries} queries x {args.rows} rows, dim {args.dim}, k {args.k}")
    header = f"{'backend':<10} {'u64_block':>12} {'topk_cosine':>12}"
    print(header)
    print("-" * len(header))
    for name, t_rng, t_topk in rows:
        print(f"{name:<10} {t_rng * 1000:>10.1f}ms {t_topk * 1000:>10.1f}ms")
    if len(rows) == 2:
        (_, py_rng, py_topk_t), (_, nat_rng, nat_topk_t) = rows
        print(f"{'speedup':<10} {py_rng / nat_rng:>11.1f}x {py_topk_t / nat_topk_t:>11.1f}x")


if __name__ == "__main__":
    main()
