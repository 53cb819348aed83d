"""Arousal indicators, the inverted-U performance curve, and memory.

States are frozen dataclasses; every operation returns a new value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ParameterError

HYSTERESIS_CLAMP = 0.2


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class PhysiologicalState:
    indicators: tuple[float, float, float] = (0.5, 0.5, 0.5)
    mu: float = 0.5
    sigma: float = 0.15
    amplitude: float = 1.0
    hysteresis_offset: float = 0.0
    capacity_bounds: tuple[float, float] = (0.05, 0.95)
    habituation_rates: tuple[float, float, float] = (0.0, 0.05, 0.1)
    # Relaxation rate of every channel toward the environment's drift bias.
    drift_rate: float = 0.5

    def __post_init__(self) -> None:
        if len(self.indicators) != 3:
            raise ParameterError("exactly 3 indicators are required")
        if len(self.habituation_rates) != 3 or min(self.habituation_rates) < 0:
            raise ParameterError("habituation_rates must be 3 values >= 0")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0: {self.sigma}")
        if not 0 < self.amplitude <= 1:
            raise ParameterError(f"amplitude must be in (0, 1]: {self.amplitude}")
        if not -HYSTERESIS_CLAMP <= self.hysteresis_offset <= HYSTERESIS_CLAMP:
            raise ParameterError(f"hysteresis_offset out of bounds: {self.hysteresis_offset}")
        lo, hi = self.capacity_bounds
        if not 0.0 <= lo <= hi <= 1.0:
            raise ParameterError(f"capacity_bounds must satisfy 0 <= lo <= hi <= 1: {self.capacity_bounds}")
        if any(x < lo or x > hi for x in self.indicators):
            raise ParameterError(f"indicators {self.indicators} outside capacity {self.capacity_bounds}")
        if self.drift_rate < 0:
            raise ParameterError(f"drift_rate must be >= 0: {self.drift_rate}")

    @property
    def arousal(self) -> float:
        a, b, c = self.indicators
        return (a + b + c) / 3.0


@dataclass(frozen=True)
class MemoryState:
    fear_level: float = 0.0
    declarative_level: float = 0.0
    alpha_fear: float = 0.95
    alpha_decl: float = 0.1
    interference: float = 0.8

    def __post_init__(self) -> None:
        for name in ("fear_level", "declarative_level", "alpha_fear", "alpha_decl", "interference"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1]: {v}")


@dataclass(frozen=True)
class Environment:
    degradation: float = 0.0
    stimulus_clarity: float = 1.0
    drift_bias: float = 0.5
    noise_scale: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.degradation <= 1.0:
            raise ParameterError(f"degradation must be in [0, 1]: {self.degradation}")
        if not 0.0 <= self.stimulus_clarity <= 1.0:
            raise ParameterError(f"stimulus_clarity must be in [0, 1]: {self.stimulus_clarity}")
        if self.noise_scale < 0:
            raise ParameterError(f"noise_scale must be >= 0: {self.noise_scale}")


def curve(arousal: float, state: PhysiologicalState) -> float:
    """Performance at ``arousal`` under ``state``'s response curve."""
    z = (arousal - state.mu) / state.sigma
    return _clamp(state.hysteresis_offset + state.amplitude * math.exp(-0.5 * z * z), 0.0, 1.0)


def performance_of(state: PhysiologicalState) -> float:
    return curve(state.arousal, state)


def gauge_of(p: float) -> int:
    """Discrete 0..9 readout: ``min(floor(10 p), 9)``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"performance must be in [0, 1]: {p}")
    return min(int(math.floor(10.0 * p)), 9)


def step(state: PhysiologicalState, env: Environment, dt: float,
         rng: np.random.Generator) -> PhysiologicalState:
    """Advance the three indicator channels by ``dt``.

    Each channel relaxes toward ``env.drift_bias``, takes Gaussian noise of
    scale ``noise_scale * sqrt(dt)``, then its excursion from the bias decays
    by its own habituation rate. Three normals are drawn on every call, even
    without noise, so the random stream stays aligned across scenarios.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be > 0: {dt}")
    noise = rng.standard_normal(3)
    lo, hi = state.capacity_bounds
    b = env.drift_bias
    pull = state.drift_rate * dt
    scale = env.noise_scale * math.sqrt(dt)
    out = []
    for x, h, z in zip(state.indicators, state.habituation_rates, noise):
        x = x + pull * (b - x) + scale * float(z)
        x = b + (x - b) * max(0.0, 1.0 - h * dt)
        out.append(_clamp(x, lo, hi))
    return replace(state, indicators=(out[0], out[1], out[2]))


def optimal_band_width(state: PhysiologicalState, optimal_performance: float) -> float:
    """Width of the arousal interval whose performance reaches ``optimal_performance``."""
    need = optimal_performance - state.hysteresis_offset
    if need <= 0:
        return 1.0
    if need >= state.amplitude:
        return 0.0
    return min(1.0, 2.0 * state.sigma * math.sqrt(2.0 * math.log(state.amplitude / need)))


def apply_hysteresis(state: PhysiologicalState, optimal_band_width: float,
                     threshold: float = 0.3, delta: float = 0.05) -> PhysiologicalState:
    """Shift the response curve after one augmentation event.

    A band narrower than ``threshold`` lowers the curve by ``delta``, a wider
    band raises it; the offset stays within +/-0.2.
    """
    if optimal_band_width < 0:
        raise ParameterError(f"optimal band width must be >= 0: {optimal_band_width}")
    if optimal_band_width < threshold:
        shift = -delta
    elif optimal_band_width > threshold:
        shift = delta
    else:
        return state
    offset = _clamp(state.hysteresis_offset + shift, -HYSTERESIS_CLAMP, HYSTERESIS_CLAMP)
    return replace(state, hysteresis_offset=offset)


def ratchet_perturb(state: PhysiologicalState, magnitude: float,
                    threshold: float = 0.2, gain: float = 0.1) -> PhysiologicalState:
    """Widen the reachable arousal interval when the perturbation is large enough."""
    if magnitude < 0:
        raise ParameterError(f"magnitude must be >= 0: {magnitude}")
    if magnitude <= threshold:
        return state
    lo, hi = state.capacity_bounds
    widen = magnitude * gain
    return replace(state, capacity_bounds=(max(0.0, lo - widen), min(1.0, hi + widen)))


def consolidate_memories(mem: MemoryState, fearful: bool, count: int = 1) -> MemoryState:
    """Apply ``count`` identical presentations.

    Fear saturates within one presentation; declarative memory needs tens,
    and its increment is suppressed by the fear gained on the same step.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1: {count}")
    fear, decl = mem.fear_level, mem.declarative_level
    for _ in range(count):
        d_fear = (1.0 - fear) * mem.alpha_fear if fearful else 0.0
        fear = min(1.0, fear + d_fear)
        decl = min(1.0, decl + (1.0 - decl) * mem.alpha_decl * (1.0 - mem.interference * d_fear))
    return replace(mem, fear_level=fear, declarative_level=decl)


def learned_amplitude(base: float, gain: float, mem: MemoryState) -> float:
    """Peak performance after consolidation: ``base + gain * declarative_level``."""
    return _clamp(base + gain * mem.declarative_level, 1e-12, 1.0)
