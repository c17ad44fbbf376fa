# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: xoshiro256** block generation and exact top-k cosine.

Semantics mirror corpusmith.kernels.fallback exactly; tests assert
bit-for-bit agreement on the PRNG stream and identical ids plus
float64-close scores on top-k queries.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline bint _worse(double s_a, int64_t i_a, double s_b, int64_t i_b) nogil:
    # True when hit a ranks strictly below hit b: lower score loses,
    # equal scores lose on the higher row index.
    if s_a != s_b:
        return s_a < s_b
    return i_a > i_b


def u64_block(s0, s1, s2, s3, Py_ssize_t n):
    """n xoshiro256** draws. Returns (uint64 array, advanced state)."""
    cdef uint64_t c0 = s0, c1 = s1, c2 = s2, c3 = s3, r, t
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            r = c1 * <uint64_t>5
            view[i] = _rotl(r, 7) * <uint64_t>9
            t = c1 << 17
            c2 ^= c0
            c3 ^= c1
            c1 ^= c2
            c0 ^= c3
            c2 ^= t
            c3 = _rotl(c3, 45)
    return out, (int(c0), int(c1), int(c2), int(c3))


def topk_cosine(float[:, ::1] vectors, float[:, ::1] queries, Py_ssize_t k):
    """Exact top-k by dot product over unit-normalized float32 rows.

    Same contract as the fallback: (idx int64, scores float64) of shape
    (n_queries, min(k, n_rows)), score descending, ties by ascending row
    index, float64 accumulation.
    """
    cdef Py_ssize_t n = vectors.shape[0]
    cdef Py_ssize_t dim = vectors.shape[1]
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t keff = k if k < n else n
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out_idx = np.empty((nq, keff), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_scores = np.empty((nq, keff), dtype=np.float64)
    if keff == 0 or nq == 0:
        return out_idx, out_scores
    cdef int64_t[:, ::1] iv = out_idx
    cdef double[:, ::1] sv = out_scores
    cdef cnp.ndarray heap_s_arr = np.empty(keff, dtype=np.float64)
    cdef cnp.ndarray heap_i_arr = np.empty(keff, dtype=np.int64)
    cdef double[::1] heap_s = heap_s_arr
    cdef int64_t[::1] heap_i = heap_i_arr
    cdef Py_ssize_t qi, row, j, size, pos, child, left, parent
    cdef double acc, cs
    cdef int64_t ci
    with nogil:
        for qi in range(nq):
            # Min-heap of the best hits so far, rooted at the worst of them.
            size = 0
            for row in range(n):
                acc = 0.0
                for j in range(dim):
                    acc += <double>vectors[row, j] * <double>queries[qi, j]
                if size < keff:
                    pos = size
                    size += 1
                    while pos > 0:
                        parent = (pos - 1) // 2
                        if not _worse(acc, row, heap_s[parent], heap_i[parent]):
                            break
                        heap_s[pos] = heap_s[parent]
                        heap_i[pos] = heap_i[parent]
                        pos = parent
                    heap_s[pos] = acc
                    heap_i[pos] = row
                elif _worse(heap_s[0], heap_i[0], acc, row):
                    # Candidate beats the worst kept hit: replace root, sift down.
                    pos = 0
                    while True:
                        left = 2 * pos + 1
                        if left >= keff:
                            break
                        child = left
                        if left + 1 < keff and _worse(
                            heap_s[left + 1], heap_i[left + 1], heap_s[left], heap_i[left]
                        ):
                            child = left + 1
                        if not _worse(heap_s[child], heap_i[child], acc, row):
                            break
                        heap_s[pos] = heap_s[child]
                        heap_i[pos] = heap_i[child]
                        pos = child
                    heap_s[pos] = acc
                    heap_i[pos] = row
            # Insertion sort the kept hits into (score desc, index asc) order.
            for row in range(1, size):
                cs = heap_s[row]
                ci = heap_i[row]
                j = row
                while j > 0 and _worse(heap_s[j - 1], heap_i[j - 1], cs, ci):
                    heap_s[j] = heap_s[j - 1]
                    heap_i[j] = heap_i[j - 1]
                    j -= 1
                heap_s[j] = cs
                heap_i[j] = ci
            for row in range(size):
                sv[qi, row] = heap_s[row]
                iv[qi, row] = heap_i[row]
    return out_idx, out_scores
