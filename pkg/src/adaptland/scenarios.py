"""Scenario scripts and the experiments built on them.

* ``four_step``: baseline, degraded, learned segments calibrated to gauges 6, 3, 8.
* ``nonstationary_ensemble``: seeded piecewise-constant degradation schedules.
* ``practice_trials`` and ``fit_power_law``: per-trial recovery times and the
  log-log practice fit.
* ``compare_controllers``: paired runs of two controllers with a bootstrap CI.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import mitigation as mt
from . import physiology as ph
from .errors import DomainError, InsufficientDataError, ParameterError
from .rng import derive_seed, substream
from .script import ScenarioScript, Segment

FOUR_STEP_GAUGES = (6, 3, 8)


@dataclass(frozen=True)
class FourStepCalibration:
    mu: float = 0.5
    sigma: float = 0.15
    amplitude_base: float = 0.7
    learning_gain: float = 0.3
    # Steady-state performance targets: the centers of the gauge bins.
    targets: tuple[float, float, float] = (0.65, 0.35, 0.85)
    degradations: tuple[float, float, float] = (0.1, 0.6, 0.6)
    presentations: int = 29
    segment_steps: int = 300
    settle_window: int = 50
    noise_scale: float = 0.01


def _bias_for(target: float, amplitude: float, mu: float, sigma: float) -> float:
    """Arousal (below ``mu``) at which the curve yields ``target``."""
    if not 0 < target < amplitude:
        raise ParameterError(f"target {target} unreachable with amplitude {amplitude}")
    return mu - sigma * math.sqrt(2.0 * math.log(amplitude / target))


def four_step(cal: FourStepCalibration | None = None,
              memory: ph.MemoryState | None = None) -> tuple[ScenarioScript, list[int]]:
    """Baseline, degraded and learned segments with expected end gauges [6, 3, 8].

    The learned segment keeps the degraded conditions but starts with a block
    of declarative presentations; consolidation raises the curve's peak
    (``amplitude_base + learning_gain * declarative_level``) and the agent's
    arousal settles closer to the optimum.
    """
    cal = cal or FourStepCalibration()
    mem = memory or ph.MemoryState()
    learned = ph.consolidate_memories(mem, False, cal.presentations)
    amps = (
        ph.learned_amplitude(cal.amplitude_base, cal.learning_gain, mem),
        ph.learned_amplitude(cal.amplitude_base, cal.learning_gain, mem),
        ph.learned_amplitude(cal.amplitude_base, cal.learning_gain, learned),
    )
    labels = ("baseline", "degraded", "learned")
    segments = []
    for i, label in enumerate(labels):
        env = ph.Environment(
            degradation=cal.degradations[i],
            stimulus_clarity=1.0,
            drift_bias=_bias_for(cal.targets[i], amps[i], cal.mu, cal.sigma),
            noise_scale=cal.noise_scale,
        )
        segments.append(Segment(cal.segment_steps, env, label,
                                presentations=cal.presentations if label == "learned" else 0))
    script = ScenarioScript(
        tuple(segments),
        {"amplitude_base": cal.amplitude_base, "learning_gain": cal.learning_gain,
         "settle_window": float(cal.settle_window)},
    )
    return script, list(FOUR_STEP_GAUGES)


def segment_gauges(trace: mt.Trace, script: ScenarioScript, window: int | None = None) -> list[int]:
    """Gauge of the mean performance over the last ``window`` rows of each segment."""
    if window is None:
        window = int(script.calibration.get("settle_window", 1))
    perf = trace.column("performance")
    out = []
    for start, end in script.boundaries():
        end = min(end, len(perf))
        if end <= start:
            break
        tail = perf[max(start, end - window):end]
        out.append(ph.gauge_of(min(1.0, max(0.0, sum(tail) / len(tail)))))
    return out


def four_step_params(cal: FourStepCalibration | None = None,
                     base: mt.ModelParams | None = None) -> mt.ModelParams:
    cal = cal or FourStepCalibration()
    base = base or mt.ModelParams()
    state = replace(base.state, mu=cal.mu, sigma=cal.sigma, hysteresis_offset=0.0)
    return replace(base, state=state, start_at_bias=True)


def run_four_step(seed: int, cal: FourStepCalibration | None = None, dt: float = 0.1,
                  base: mt.ModelParams | None = None) -> tuple[mt.Trace, list[int], list[int]]:
    """Run the four-step scenario without a controller; returns (trace, gauges, expected)."""
    cal = cal or FourStepCalibration()
    script, expected = four_step(cal, (base or mt.ModelParams()).memory)
    params = four_step_params(cal, base)
    trace = mt.run_closed_loop(script, None, seed, script.total_steps, dt, params)
    return trace, segment_gauges(trace, script, cal.settle_window), expected


@dataclass(frozen=True)
class EnsembleSettings:
    steps: int = 1000
    # Expected change points per step at volatility 1.
    change_rate: float = 0.01
    base_degradation: float = 0.3
    # Standard deviation of a segment's degradation at volatility 1.
    degradation_spread: float = 0.5
    # Arousal displacement per unit degradation; sign drawn per segment.
    stress_gain: float = 0.5
    mu: float = 0.5
    noise_scale: float = 0.02
    stimulus_clarity: float = 1.0


def expected_segment_count(volatility: float, settings: EnsembleSettings | None = None) -> float:
    s = settings or EnsembleSettings()
    return 1.0 + min(volatility * s.change_rate * s.steps, s.steps - 1)


def nonstationary_ensemble(count: int, seed: int, volatility: float,
                           settings: EnsembleSettings | None = None) -> list[ScenarioScript]:
    """Seeded random piecewise-constant degradation schedules.

    The number of change points is Poisson with mean
    ``volatility * change_rate * steps``; each segment's degradation is
    normal around ``base_degradation`` with spread scaled by volatility.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1: {count}")
    if volatility < 0:
        raise ParameterError(f"volatility must be >= 0: {volatility}")
    s = settings or EnsembleSettings()
    lam = volatility * s.change_rate * s.steps
    scripts = []
    for i in range(count):
        rng = substream(seed, "ensemble", i)
        m = min(int(rng.poisson(lam)), s.steps - 1) if lam > 0 else 0
        cuts = sorted(int(c) for c in rng.choice(np.arange(1, s.steps), size=m, replace=False)) if m else []
        edges = [0, *cuts, s.steps]
        segments = []
        for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            d = s.base_degradation + volatility * s.degradation_spread * float(rng.standard_normal())
            d = min(1.0, max(0.0, d))
            sign = 1.0 if rng.random() < 0.5 else -1.0
            bias = min(1.0, max(0.0, s.mu + sign * s.stress_gain * d))
            env = ph.Environment(d, s.stimulus_clarity, bias, s.noise_scale)
            segments.append(Segment(b - a, env, f"seg{j}"))
        scripts.append(ScenarioScript(tuple(segments), {"volatility": volatility, "index": float(i)}))
    return scripts


def fit_power_law(trial_index_series: Sequence[float],
                  time_series: Sequence[float]) -> tuple[float, float, float]:
    """Least squares fit of ``log T = log a - b log N``; returns ``(a, b, r_squared)``.

    A perfectly flat series has zero variance to explain and reports ``r_squared = 1``.
    """
    n = np.asarray(trial_index_series, dtype=np.float64)
    t = np.asarray(time_series, dtype=np.float64)
    if n.shape != t.shape or n.ndim != 1:
        raise ParameterError("trial and time series must be 1-D and of equal length")
    if n.size < 3:
        raise InsufficientDataError(f"need at least 3 points, got {n.size}")
    if np.any(n <= 0) or np.any(t <= 0):
        raise DomainError("power-law fit needs strictly positive values")
    x = np.log(n)
    y = np.log(t)
    design = np.column_stack((np.ones_like(x), -x))
    (log_a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (log_a - b * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(math.exp(log_a)), float(b), r2


@dataclass(frozen=True)
class PracticeSettings:
    trials: int = 30
    dt: float = 0.01
    # Initial displacement below the optimum, plus extra per unit degradation.
    displacement: float = 0.15
    displacement_gain: float = 0.6
    # Trial ends when mean arousal is this close to the optimum.
    band_half_width: float = 0.05
    # Recovery rate grows as drift_rate * (1 + experience / experience_scale).
    experience_scale: float = 3.0
    noise_scale: float = 0.005
    max_trial_steps: int = 5000


def practice_trials(script: ScenarioScript, seed: int, params: mt.ModelParams | None = None,
                    settings: PracticeSettings | None = None) -> list[float]:
    """Time to re-enter the optimal band on each of a series of practice trials.

    Each trial displaces arousal below the optimum by an amount that grows
    with the current degradation, then lets the agent recover. Recovery speeds
    up with accumulated practice time, which under a constant stimulus yields
    a power-law learning curve. Trials are spread evenly over the script's
    timeline, so a nonstationary script changes the challenge between trials.
    """
    s = settings or PracticeSettings()
    base = (params or mt.ModelParams()).state
    rng = substream(seed, "practice")
    schedule = script.schedule(script.total_steps)
    lo, hi = base.capacity_bounds
    experience = 0.0
    times = []
    for trial in range(s.trials):
        position = trial * script.total_steps // s.trials
        env_cfg = script.segments[schedule[position]].environment
        disp = s.displacement + s.displacement_gain * env_cfg.degradation
        start = min(hi, max(lo, base.mu - disp))
        state = replace(base, indicators=(start, start, start), hysteresis_offset=0.0,
                        drift_rate=base.drift_rate * (1.0 + experience / s.experience_scale))
        env = ph.Environment(env_cfg.degradation, env_cfg.stimulus_clarity, base.mu, s.noise_scale)
        steps = 0
        while abs(state.arousal - base.mu) > s.band_half_width and steps < s.max_trial_steps:
            state = ph.step(state, env, s.dt, rng)
            steps += 1
        elapsed = max(steps, 1) * s.dt
        times.append(elapsed)
        experience += elapsed
    return times


@dataclass
class ControllerStats:
    name: str
    time_in_optimal: float
    hysteresis_drift: float
    first_equilibrium_time: float | None
    phase_occupancy: dict[str, float]
    per_run_time_in_optimal: list[float] = field(repr=False)


@dataclass
class ComparisonReport:
    first: ControllerStats
    second: ControllerStats
    # Mean paired difference second - first in time-in-optimal fraction.
    difference: float
    ci_low: float
    ci_high: float
    ensemble_size: int
    master_seed: int
    resamples: int
    seeds: list[int]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _run_pair(args: tuple) -> tuple[dict, dict]:
    script, first, second, seed, steps, dt, params = args
    out = []
    for cfg in (first, second):
        trace = mt.run_closed_loop(script, cfg, seed, steps, dt, params)
        out.append(mt.summarize(trace, params.optimal_performance, params.state.hysteresis_offset))
    return out[0], out[1]


def _aggregate(name: str, runs: list[dict]) -> ControllerStats:
    eq = [r["first_equilibrium_time"] for r in runs if r["first_equilibrium_time"] is not None]
    phases = runs[0]["phase_occupancy"].keys()
    return ControllerStats(
        name=name,
        time_in_optimal=float(np.mean([r["time_in_optimal"] for r in runs])),
        hysteresis_drift=float(np.mean([r["hysteresis_drift"] for r in runs])),
        first_equilibrium_time=float(np.mean(eq)) if eq else None,
        phase_occupancy={p: float(np.mean([r["phase_occupancy"][p] for r in runs])) for p in phases},
        per_run_time_in_optimal=[r["time_in_optimal"] for r in runs],
    )


def bootstrap_ci(values: Sequence[float], resamples: int, seed: int,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``values``."""
    v = np.asarray(values, dtype=np.float64)
    rng = substream(seed, "bootstrap")
    idx = rng.integers(0, v.size, size=(resamples, v.size))
    means = v[idx].mean(axis=1)
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail])
    return float(lo), float(hi)


def compare_controllers(ensemble: Sequence[ScenarioScript], first: mt.ControllerConfig,
                        second: mt.ControllerConfig, master_seed: int, steps: int | None = None,
                        dt: float = 0.1, params: mt.ModelParams | None = None,
                        resamples: int = 1000, workers: int = 1) -> ComparisonReport:
    """Run both controllers on identical (scenario, seed) pairs.

    The difference is ``second - first`` in time-in-optimal fraction, with a
    percentile bootstrap CI over scenarios. Results do not depend on
    ``workers``.
    """
    if not ensemble:
        raise ParameterError("ensemble must not be empty")
    params = params or mt.ModelParams()
    seeds = [derive_seed(master_seed, "run", i) for i in range(len(ensemble))]
    jobs = [(script, first, second, seeds[i], steps or script.total_steps, dt, params)
            for i, script in enumerate(ensemble)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_pair, jobs))
    else:
        results = [_run_pair(j) for j in jobs]
    runs_a = [r[0] for r in results]
    runs_b = [r[1] for r in results]
    diffs = [b["time_in_optimal"] - a["time_in_optimal"] for a, b in zip(runs_a, runs_b)]
    lo, hi = bootstrap_ci(diffs, resamples, master_seed)
    return ComparisonReport(
        first=_aggregate(mt.controller_name(first), runs_a),
        second=_aggregate(mt.controller_name(second), runs_b),
        difference=float(np.mean(diffs)),
        ci_low=lo,
        ci_high=hi,
        ensemble_size=len(ensemble),
        master_seed=int(master_seed),
        resamples=resamples,
        seeds=seeds,
    )
