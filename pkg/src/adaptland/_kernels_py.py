"""Pure numpy fallback for the NK kernels in ``_kernels.pyx``.

Accumulation order matches the compiled version exactly (loci summed in
ascending order, then divided by n), so the two backends agree bit for bit.
"""

from __future__ import annotations

import numpy as np


def fitness_table(contrib: np.ndarray, n: int, k: int) -> np.ndarray:
    genotypes = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(1 << n, dtype=np.float64)
    for i in range(n):
        idx = np.zeros(1 << n, dtype=np.int64)
        for j in range(k + 1):
            idx = (idx << 1) | ((genotypes >> ((i + j) % n)) & 1)
        total = total + contrib[i, idx]
    return total / n


def extrema_mask(table: np.ndarray, n: int, maxima: bool) -> np.ndarray:
    genotypes = np.arange(table.shape[0], dtype=np.int64)
    mask = np.ones(table.shape[0], dtype=bool)
    for i in range(n):
        other = table[genotypes ^ (1 << i)]
        if maxima:
            mask &= table > other
        else:
            mask &= table < other
    return mask


def steepest_walk(table: np.ndarray, n: int, start: int, ascent: bool, max_steps: int):
    path = [int(start)]
    g = int(start)
    moves = 0
    while moves < max_steps:
        best_g = g
        best_f = table[g]
        for i in range(n):
            cand = g ^ (1 << i)
            f = table[cand]
            if (f > best_f) if ascent else (f < best_f):
                best_f = f
                best_g = cand
        if best_g == g:
            return path, True
        g = best_g
        path.append(g)
        moves += 1
    return path, False
