# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled NK kernels.

Every routine mirrors ``_kernels_py`` operation for operation, including the
order of floating point accumulation, so both backends return bit-identical
results.
"""

import numpy as np


def fitness_table(const double[:, ::1] contrib, int n, int k):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t g
    cdef int i, j, idx
    cdef double total
    for g in range(size):
        total = 0.0
        for i in range(n):
            idx = 0
            for j in range(k + 1):
                idx = (idx << 1) | <int>((g >> ((i + j) % n)) & 1)
            total = total + contrib[i, idx]
        res[g] = total / n
    return out


def extrema_mask(const double[::1] table, int n, bint maxima):
    cdef Py_ssize_t size = table.shape[0]
    out = np.ones(size, dtype=np.bool_)
    cdef char[::1] mask = out.view(np.int8)
    cdef Py_ssize_t g
    cdef int i
    cdef double f, other
    for g in range(size):
        f = table[g]
        for i in range(n):
            other = table[g ^ ((<Py_ssize_t>1) << i)]
            if maxima:
                if not (f > other):
                    mask[g] = 0
                    break
            else:
                if not (f < other):
                    mask[g] = 0
                    break
    return out


def steepest_walk(const double[::1] table, int n, long long start, bint ascent,
                  long long max_steps):
    """Lowest-index steepest walk; returns (genotypes, terminated)."""
    cdef list path = [start]
    cdef long long g = start
    cdef long long best_g, cand
    cdef double best_f, f
    cdef int i
    cdef long long moves = 0
    while moves < max_steps:
        best_g = g
        best_f = table[g]
        for i in range(n):
            cand = g ^ ((<long long>1) << i)
            f = table[cand]
            if ascent:
                if f > best_f:
                    best_f = f
                    best_g = cand
            else:
                if f < best_f:
                    best_f = f
                    best_g = cand
        if best_g == g:
            return path, True
        g = best_g
        path.append(g)
        moves += 1
    return path, False

