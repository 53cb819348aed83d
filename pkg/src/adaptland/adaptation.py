"""Fitness and selection coefficients, phase classification, regimes.

The fitness coefficient is a min-max normalized measurement, the selection
coefficient is stimulus clarity minus degradation. Comparing their time
derivatives separates environmental sampling (selection rising faster,
a descent on the landscape) from consolidation (fitness rising faster, an
ascent); the points where the derivatives match are equilibria.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError, ParameterError


class Phase(str, enum.Enum):
    EVOLVABLE = "Evolvable"
    ROBUST = "Robust"
    BRITTLE = "Brittle"


class Regime(str, enum.Enum):
    SAMPLING = "Sampling"
    CONSOLIDATION = "Consolidation"
    EQUILIBRIUM = "Equilibrium"


@dataclass(frozen=True)
class AdaptiveAssessment:
    f_c: float
    s_c: float
    phase: Phase
    e_d: float
    r_d: float
    b_d: float


@dataclass(frozen=True)
class RegimeSeries:
    times: np.ndarray
    f_values: np.ndarray
    s_values: np.ndarray
    regimes: list[Regime]
    equilibrium_times: list[float]


def fitness_coefficient(x_n: float, x_min: float, x_max: float) -> float:
    if not x_max > x_min:
        raise DomainError(f"degenerate range: x_min={x_min}, x_max={x_max}")
    if not x_min <= x_n <= x_max:
        raise DomainError(f"x_n={x_n} outside [{x_min}, {x_max}]")
    f = (x_n - x_min) / (x_max - x_min)
    return min(1.0, max(0.0, f))


def selection_coefficient(c_s: float, d: float) -> float:
    if not 0.0 <= c_s <= 1.0:
        raise DomainError(f"stimulus clarity must be in [0, 1]: {c_s}")
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"degradation must be in [0, 1]: {d}")
    return c_s - d


def classify_phase(f_c: float, s_c: float, r0: float = 0.15, eps: float = 0.1) -> AdaptiveAssessment:
    """Place ``(f_c, s_c)`` in the phase portrait.

    Robust near the origin or when the two coefficients balance within
    ``eps``; otherwise evolvable when fitness leads and brittle when
    selection leads.
    """
    if not 0.0 <= f_c <= 1.0:
        raise DomainError(f"f_c must be in [0, 1]: {f_c}")
    if not -1.0 <= s_c <= 1.0:
        raise DomainError(f"s_c must be in [-1, 1]: {s_c}")
    gap = f_c - s_c
    if math.hypot(f_c, s_c) <= r0 or abs(gap) <= eps:
        phase = Phase.ROBUST
    elif gap > eps:
        phase = Phase.EVOLVABLE
    else:
        phase = Phase.BRITTLE
    e_d = max(0.0, gap - eps) if phase is Phase.EVOLVABLE else 0.0
    b_d = max(0.0, -gap - eps) if phase is Phase.BRITTLE else 0.0
    r_d = min(1.0, max(0.0, 1.0 - abs(gap)))
    return AdaptiveAssessment(f_c, s_c, phase, e_d, r_d, b_d)


def _derivative_gap(f_series: Sequence[float], s_series: Sequence[float],
                    dt: float) -> tuple[np.ndarray, float]:
    """Return ``dS/dt - dF/dt`` and the equilibrium tolerance."""
    f = np.asarray(f_series, dtype=np.float64)
    s = np.asarray(s_series, dtype=np.float64)
    if f.shape != s.shape or f.ndim != 1:
        raise ParameterError("f and s series must be 1-D and of equal length")
    if f.size < 3:
        raise InsufficientDataError(f"need at least 3 points, got {f.size}")
    if not dt > 0:
        raise ParameterError(f"dt must be > 0: {dt}")
    gap = np.gradient(s, dt, edge_order=1) - np.gradient(f, dt, edge_order=1)
    return gap, _tolerance(f, s)


def _tolerance(f: np.ndarray, s: np.ndarray, rel_tol: float = 1e-6) -> float:
    scale = max(float(np.max(np.abs(f))), float(np.max(np.abs(s))))
    return rel_tol * (scale if scale > 0 else 1.0)


def classify_gap(gap: float, tol: float) -> Regime:
    if gap > tol:
        return Regime.SAMPLING
    if gap < -tol:
        return Regime.CONSOLIDATION
    return Regime.EQUILIBRIUM


def regime(f_series: Sequence[float], s_series: Sequence[float], dt: float) -> list[Regime]:
    """Per-point regime from central-difference derivatives (one-sided at the ends)."""
    gap, tol = _derivative_gap(f_series, s_series, dt)
    return [classify_gap(float(v), tol) for v in gap]


def equilibrium_times(f_series: Sequence[float], s_series: Sequence[float], dt: float,
                      t0: float = 0.0) -> list[float]:
    """Times where ``dF/dt = dS/dt``.

    Runs of points within tolerance are reported by their midpoint; a sign
    change between two neighboring non-equilibrium points is located by
    linear interpolation.
    """
    gap, tol = _derivative_gap(f_series, s_series, dt)
    labels = [classify_gap(float(v), tol) for v in gap]
    times = t0 + dt * np.arange(gap.size)
    out: list[float] = []
    i = 0
    m = gap.size
    while i < m:
        if labels[i] is Regime.EQUILIBRIUM:
            j = i
            while j + 1 < m and labels[j + 1] is Regime.EQUILIBRIUM:
                j += 1
            out.append(float(0.5 * (times[i] + times[j])))
            i = j + 1
            continue
        if i + 1 < m and labels[i + 1] is not Regime.EQUILIBRIUM and labels[i + 1] is not labels[i]:
            g0, g1 = float(gap[i]), float(gap[i + 1])
            out.append(float(times[i] + dt * g0 / (g0 - g1)))
        i += 1
    return out


def regime_series(f_series: Sequence[float], s_series: Sequence[float], dt: float,
                  t0: float = 0.0) -> RegimeSeries:
    f = np.asarray(f_series, dtype=np.float64)
    s = np.asarray(s_series, dtype=np.float64)
    return RegimeSeries(
        times=t0 + dt * np.arange(f.size),
        f_values=f,
        s_values=s,
        regimes=regime(f, s, dt),
        equilibrium_times=equilibrium_times(f, s, dt, t0),
    )


def robustness_indicator(first_equilibrium_time: float) -> float:
    """``1 / (1 + t_eq)``; a missing equilibrium (``inf``) scores 0."""
    t = first_equilibrium_time
    if math.isnan(t) or t < 0:
        raise DomainError(f"equilibrium time must be >= 0: {t}")
    if math.isinf(t):
        return 0.0
    return 1.0 / (1.0 + t)
