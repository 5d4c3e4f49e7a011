# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics are defined by ``_fallback.py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef void _sort_desc(int64_t* a, Py_ssize_t k) noexcept nogil:
    # insertion sort; a draw has O(theta log n) cycles
    cdef Py_ssize_t i, j
    cdef int64_t v
    for i in range(1, k):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] < v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef Py_ssize_t _crp_draw(Py_ssize_t n, double theta, uint64_t key,
                          int64_t* tab, int64_t* size) noexcept nogil:
    cdef Py_ssize_t i, ntab = 0
    cdef int64_t e, t
    cdef double u, x
    for i in range(n):
        u = <double>(mix64(key + <uint64_t>(i + 1) * GOLDEN) >> 11) * TWO53
        x = u * (theta + <double>i)
        if x < theta:
            tab[i] = ntab
            size[ntab] = 1
            ntab += 1
        else:
            e = <int64_t>(x - theta)
            if e >= i:
                e = i - 1
            t = tab[e]
            tab[i] = t
            size[t] += 1
    _sort_desc(size, ntab)
    return ntab


def crp_cycle_lengths(Py_ssize_t n, double theta, seed, Py_ssize_t start, Py_ssize_t count):
    """Cycle lengths of ``count`` CRP draws; see ``_fallback.crp_cycle_lengths``."""
    cdef uint64_t seed64 = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t* tab = <int64_t*>malloc(max(n, 1) * sizeof(int64_t))
    cdef int64_t* size = <int64_t*>malloc(max(n, 1) * sizeof(int64_t))
    if tab == NULL or size == NULL:
        free(tab)
        free(size)
        raise MemoryError()
    cdef Py_ssize_t cap = max(16, 8 * count)
    out_arr = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    offsets_arr = np.zeros(count + 1, dtype=np.int64)
    cdef int64_t[::1] offsets = offsets_arr
    cdef Py_ssize_t d, j, k, pos = 0
    cdef uint64_t key
    try:
        for d in range(count):
            with nogil:
                key = mix64(seed64 + <uint64_t>(start + d + 1) * GOLDEN)
                k = _crp_draw(n, theta, key, tab, size)
            if pos + k > cap:
                cap = max(2 * cap, pos + k)
                out_arr = np.resize(out_arr, cap)
                out = out_arr
            for j in range(k):
                out[pos + j] = size[j]
            pos += k
            offsets[d + 1] = pos
    finally:
        free(tab)
        free(size)
    return out_arr[:pos].copy(), offsets_arr


def causal_convolve(const int64_t[::1] idx, const double[::1] vals,
                    const double[::1] g, Py_ssize_t out_len):
    """out[m] = sum_t vals[t] * g[m - idx[t]] for 0 <= m < out_len (direct sum)."""
    out_arr = np.zeros(out_len, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t t, m, j, glen = g.shape[0]
    cdef Py_ssize_t top
    cdef double v
    with nogil:
        for t in range(idx.shape[0]):
            j = idx[t]
            v = vals[t]
            if j >= out_len or v == 0.0:
                continue
            top = out_len - j
            if top > glen:
                top = glen
            for m in range(top):
                out[m + j] += v * g[m]
    return out_arr
