"""Seed substreams.

Every stochastic consumer gets its own generator derived from the master seed
plus a tuple of integer keys, so results never depend on call order or on how
many workers share an ensemble.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & _MASK64


def substream(seed: int, *keys: int | str) -> np.random.Generator:
    """Return an independent PCG64 generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int | str) -> int:
    """A 64-bit integer seed for ``(seed, *keys)``; stable across platforms."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
