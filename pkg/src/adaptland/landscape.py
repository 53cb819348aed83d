"""NK fitness landscapes over binary genotypes.

Genotypes are tuples of bits with ``bits[i]`` the state of locus ``i``.
Internally a genotype is also an integer whose bit ``i`` is locus ``i``; the
kernels work on that encoding.

Locus ``i`` interacts with the ``k`` cyclically following loci
``i+1 .. i+k``; its contribution is looked up at index
``sum_j bits[(i+j) % n] << (k - j)`` of row ``i`` of the contribution table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ParameterError, ShapeError
from .rng import substream

MAX_N = 24
FORMAT_VERSION = 1
# Full-table walks above this size would allocate too much for a single move.
_TABLE_WALK_LIMIT = 20

Genotype = tuple[int, ...]


class Landscape:
    """Immutable NK landscape; the fitness table is built lazily and cached."""

    __slots__ = ("n", "k", "seed", "contributions", "_table", "_generated")

    def __init__(self, n: int, k: int, seed: int, contributions: np.ndarray,
                 *, generated: bool = True) -> None:
        _check_nk(n, k)
        contributions = np.ascontiguousarray(contributions, dtype=np.float64)
        if contributions.shape != (n, 1 << (k + 1)):
            raise ShapeError(
                f"contribution table must have shape ({n}, {1 << (k + 1)}), "
                f"got {contributions.shape}"
            )
        if np.any(contributions < 0.0) or np.any(contributions >= 1.0):
            raise ParameterError("contributions must lie in [0, 1)")
        contributions.setflags(write=False)
        self.n = n
        self.k = k
        self.seed = int(seed)
        self.contributions = contributions
        self._table: np.ndarray | None = None
        self._generated = generated

    @classmethod
    def from_contributions(cls, contributions: Sequence[Sequence[float]], k: int) -> "Landscape":
        """Hand-built landscape; not serializable since it has no seed."""
        arr = np.asarray(contributions, dtype=np.float64)
        return cls(arr.shape[0], k, 0, arr, generated=False)

    def __repr__(self) -> str:
        return f"Landscape(n={self.n}, k={self.k}, seed={self.seed})"

    @property
    def size(self) -> int:
        return 1 << self.n

    def fitness_table(self) -> np.ndarray:
        """Fitness of every genotype, indexed by its integer encoding."""
        if self._table is None:
            table = kernels.fitness_table(self.contributions, self.n, self.k)
            table.setflags(write=False)
            self._table = table
        return self._table

    def fitness_index(self, g: int) -> float:
        if self._table is not None:
            return float(self._table[g])
        n, k = self.n, self.k
        total = 0.0
        for i in range(n):
            idx = 0
            for j in range(k + 1):
                idx = (idx << 1) | ((g >> ((i + j) % n)) & 1)
            total = total + float(self.contributions[i, idx])
        return total / n

    def fitness_many(self, genotypes: np.ndarray) -> np.ndarray:
        """Vectorized fitness for an array of integer-encoded genotypes."""
        g = np.asarray(genotypes, dtype=np.int64)
        total = np.zeros(g.shape, dtype=np.float64)
        for i in range(self.n):
            idx = np.zeros(g.shape, dtype=np.int64)
            for j in range(self.k + 1):
                idx = (idx << 1) | ((g >> ((i + j) % self.n)) & 1)
            total = total + self.contributions[i, idx]
        return total / self.n

    def to_json(self) -> str:
        if not self._generated:
            raise ParameterError("hand-built landscapes cannot be serialized")
        return json.dumps(
            {"n": self.n, "k": self.k, "seed": self.seed, "format_version": FORMAT_VERSION},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Landscape":
        doc = json.loads(text)
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise ParameterError(f"unsupported landscape format_version {version!r}")
        return generate_nk(int(doc["n"]), int(doc["k"]), int(doc["seed"]))


@dataclass(frozen=True)
class WalkPath:
    steps: list[Genotype]
    fitnesses: list[float]
    terminated_at_extremum: bool


@dataclass(frozen=True)
class Ruggedness:
    rho: float
    zero_variance: bool


def _check_nk(n: int, k: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_N:
        raise ParameterError(f"n must satisfy 1 <= n <= {MAX_N}: n={n}")
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 0 <= k <= n-1={n - 1}: k={k}")


def to_int(bits: Iterable[int]) -> int:
    g = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ShapeError(f"genotype contains non-binary value {b!r}")
        g |= int(b) << i
    return g


def to_bits(g: int, n: int) -> Genotype:
    return tuple((g >> i) & 1 for i in range(n))


def genotype_str(g: int, n: int) -> str:
    """Locus 0 first, e.g. ``"0110"``."""
    return "".join("1" if (g >> i) & 1 else "0" for i in range(n))


def _as_index(landscape: Landscape, genotype: Sequence[int]) -> int:
    if len(genotype) != landscape.n:
        raise ShapeError(f"genotype length {len(genotype)} != n={landscape.n}")
    return to_int(genotype)


def generate_nk(n: int, k: int, seed: int) -> Landscape:
    _check_nk(n, k)
    rng = substream(seed, "nk")
    contributions = rng.random((n, 1 << (k + 1)))
    return Landscape(n, k, seed, contributions)


def evaluate(landscape: Landscape, genotype: Sequence[int]) -> float:
    """Mean of the per-locus contributions; always in [0, 1)."""
    return landscape.fitness_index(_as_index(landscape, genotype))


def local_extrema(landscape: Landscape, kind: str = "maxima") -> list[tuple[Genotype, float]]:
    """Exhaustive scan for strict local maxima or minima under single-bit flips."""
    if kind not in ("maxima", "minima"):
        raise ParameterError(f"kind must be 'maxima' or 'minima': {kind!r}")
    table = landscape.fitness_table()
    mask = kernels.extrema_mask(table, landscape.n, kind == "maxima")
    return [(to_bits(int(g), landscape.n), float(table[g])) for g in np.flatnonzero(mask)]


def count_local_optima(landscape: Landscape, kind: str = "maxima") -> int:
    table = landscape.fitness_table()
    return int(np.count_nonzero(kernels.extrema_mask(table, landscape.n, kind == "maxima")))


def ruggedness_autocorrelation(landscape: Landscape, walk_length: int, seed: int) -> Ruggedness:
    """Lag-1 autocorrelation of fitness along a seeded random bit-flip walk.

    Values near 1 mean a smooth landscape; near 0 (or negative) a rugged one.
    """
    if walk_length < 100:
        raise ParameterError(f"walk_length must be >= 100: {walk_length}")
    rng = substream(seed, "ruggedness")
    start = int(rng.integers(0, landscape.size))
    flips = np.left_shift(1, rng.integers(0, landscape.n, size=walk_length)).astype(np.int64)
    path = np.bitwise_xor.accumulate(np.concatenate(([start], flips)))
    f = landscape.fitness_many(path)
    dev = f - f.mean()
    denom = float(np.dot(dev, dev))
    if denom == 0.0:
        return Ruggedness(0.0, True)
    rho = float(np.dot(dev[:-1], dev[1:]) / denom)
    return Ruggedness(max(-1.0, min(1.0, rho)), False)


def _best_move(landscape: Landscape, g: int, ascent: bool,
               rng: np.random.Generator | None) -> int:
    """Steepest strictly improving single-bit move from ``g``, or ``g`` itself."""
    best_f = landscape.fitness_index(g)
    best: list[int] = []
    for i in range(landscape.n):
        cand = g ^ (1 << i)
        f = landscape.fitness_index(cand)
        better = f > best_f if ascent else f < best_f
        if better:
            best_f = f
            best = [cand]
        elif best and f == best_f:
            best.append(cand)
    if not best:
        return g
    if rng is None or len(best) == 1:
        return best[0]
    return best[int(rng.integers(0, len(best)))]


def walk_step(landscape: Landscape, g: int, ascent: bool) -> int:
    """One lowest-index steepest move on integer genotype ``g``."""
    return _best_move(landscape, g, ascent, None)


def adaptive_walk(landscape: Landscape, start: Sequence[int], direction: str = "ascent",
                  tie_rule: str = "lowest", max_steps: int = 10_000,
                  seed: int | None = None) -> WalkPath:
    """Steepest-neighbor walk until no strict improvement or ``max_steps`` moves.

    ``tie_rule`` is ``"lowest"`` (lowest locus index wins) or ``"random"``
    (seeded choice among equally steep moves; needs ``seed``).
    """
    if direction not in ("ascent", "descent"):
        raise ParameterError(f"direction must be 'ascent' or 'descent': {direction!r}")
    if tie_rule not in ("lowest", "random"):
        raise ParameterError(f"tie_rule must be 'lowest' or 'random': {tie_rule!r}")
    if max_steps < 1:
        raise ParameterError(f"max_steps must be >= 1: {max_steps}")
    g0 = _as_index(landscape, start)
    ascent = direction == "ascent"
    n = landscape.n

    if tie_rule == "lowest" and n <= _TABLE_WALK_LIMIT:
        table = landscape.fitness_table()
        path, done = kernels.steepest_walk(table, n, g0, ascent, max_steps)
        return WalkPath([to_bits(g, n) for g in path], [float(table[g]) for g in path], bool(done))

    rng = substream(seed if seed is not None else 0, "walk-ties") if tie_rule == "random" else None
    path = [g0]
    for _ in range(max_steps):
        nxt = _best_move(landscape, path[-1], ascent, rng)
        if nxt == path[-1]:
            break
        path.append(nxt)
    else:
        done = _best_move(landscape, path[-1], ascent, None) == path[-1]
        return WalkPath([to_bits(g, n) for g in path],
                        [landscape.fitness_index(g) for g in path], done)
    return WalkPath([to_bits(g, n) for g in path],
                    [landscape.fitness_index(g) for g in path], True)


def neutral_neighbors(landscape: Landscape, genotype: Sequence[int],
                      epsilon: float) -> set[Genotype]:
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0: {epsilon}")
    g = _as_index(landscape, genotype)
    f = landscape.fitness_index(g)
    out = set()
    for i in range(landscape.n):
        cand = g ^ (1 << i)
        if abs(landscape.fitness_index(cand) - f) <= epsilon:
            out.add(to_bits(cand, landscape.n))
    return out


def gray(v: int) -> int:
    return v ^ (v >> 1)


def export_surface(landscape: Landscape, resolution: int) -> list[tuple[int, int, float]]:
    """Embed the genotype space in a 2-D grid for plotting.

    The first ceil(n/2) loci form the x coordinate, the rest y; each axis is
    ordered by reflected Gray code so neighboring cells differ by one bit.
    ``resolution`` caps the side length; when an axis is longer, consecutive
    positions are pooled by their maximum fitness. Rows are emitted
    row-major (y outer, x inner).
    """
    if resolution < 2:
        raise ParameterError(f"resolution must be >= 2: {resolution}")
    n = landscape.n
    nx = (n + 1) // 2
    ny = n - nx
    xs = np.array([gray(p) for p in range(1 << nx)], dtype=np.int64)
    ys = np.array([gray(p) for p in range(1 << ny)], dtype=np.int64)
    grid = landscape.fitness_many(ys[:, None] << nx | xs[None, :])
    grid = _pool(_pool(grid, resolution, axis=1), resolution, axis=0)
    return [(x, y, float(grid[y, x])) for y in range(grid.shape[0]) for x in range(grid.shape[1])]


def _pool(grid: np.ndarray, resolution: int, axis: int) -> np.ndarray:
    side = grid.shape[axis]
    if side <= resolution:
        return grid
    edges = np.linspace(0, side, resolution + 1).round().astype(int)
    parts = [np.take(grid, range(a, b), axis=axis).max(axis=axis) for a, b in zip(edges[:-1], edges[1:])]
    return np.stack(parts, axis=axis)
