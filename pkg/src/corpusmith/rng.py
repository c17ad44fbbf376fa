"""Deterministic pseudo-randomness for reproducible pipelines.

Every seeded decision in this package flows through the two generators
implemented here: splitmix64 for seed expansion and xoshiro256** for the
draws themselves. Python's builtin hash() is salted per process and
random.Random is not specified bit-for-bit across versions, so neither is
used anywhere. Strings enter the seed space through FNV-1a.

Stream derivation convention: a stream for a labeled unit of work (one
document, one sequence/epoch pair, one projection row) is seeded with the
base seed XORed with the FNV-1a hash of each string label and the raw
value of each integer label. Distinct labels give independent streams;
the same labels always reproduce the same stream.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# Bulk draws go through the kernels backend (compiled when available).
# Imported lazily to keep this module free of import cycles.
_kernels = None


def fnv1a64(data: str | bytes) -> int:
    """64-bit FNV-1a hash. Stable across processes, platforms, versions."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once. Returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, (z ^ (z >> 31)) & MASK64


def derive_seed(base: int, *labels: str | int) -> int:
    """Fold string/int labels into a base seed (see module docstring)."""
    acc = base & MASK64
    for label in labels:
        if isinstance(label, str):
            acc ^= fnv1a64(label)
        else:
            acc ^= label & MASK64
    return acc


class Xoshiro256StarStar:
    """xoshiro256** generator seeded through splitmix64 expansion."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        sm = seed & MASK64
        sm, self.s0 = splitmix64(sm)
        sm, self.s1 = splitmix64(sm)
        sm, self.s2 = splitmix64(sm)
        sm, self.s3 = splitmix64(sm)

    def next_u64(self) -> int:
        s1 = self.s1
        result = ((s1 * 5) & MASK64)
        result = (((result << 7) | (result >> 57)) & MASK64) * 9 & MASK64
        t = (s1 << 17) & MASK64
        s2 = self.s2 ^ self.s0
        s3 = self.s3 ^ s1
        self.s1 = s1 ^ s2
        self.s0 = self.s0 ^ s3
        s2 ^= t
        self.s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s2 = s2
        return result

    def next_double(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = (1 << 64) - ((1 << 64) % bound)
        while True:
            u = self.next_u64()
            if u < threshold:
                return u % bound

    def coin(self) -> bool:
        """Fair coin from the top bit."""
        return bool(self.next_u64() >> 63)

    def u64_block(self, n: int) -> np.ndarray:
        """n raw draws as a uint64 array; same stream as next_u64()."""
        global _kernels
        if _kernels is None:
            from . import kernels as _k

            _kernels = _k
        out, state = _kernels.u64_block(self.s0, self.s1, self.s2, self.s3, n)
        self.s0, self.s1, self.s2, self.s3 = state
        return out

    def double_block(self, n: int) -> np.ndarray:
        """n uniform doubles in [0, 1); vector analogue of next_double()."""
        block = self.u64_block(n)
        return (block >> np.uint64(11)).astype(np.float64) * 2.0**-53


def stream(base: int, *labels: str | int) -> Xoshiro256StarStar:
    """Generator for the given base seed and labels."""
    return Xoshiro256StarStar(derive_seed(base, *labels))
