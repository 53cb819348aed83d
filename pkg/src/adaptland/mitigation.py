"""Mitigation controllers and the closed-loop engine.

Two controllers compete. The threshold controller keeps mean arousal inside a
fixed band with bang-bang boosts. The landscape-guided controller reads the
adaptive assessment instead: it lets the agent sample while within budget,
assists ascent during consolidation (or once sampling overruns its budget),
and perturbs a brittle system to widen its capacity.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from typing import Any, NamedTuple, Union

import numpy as np

from . import adaptation as ad
from . import landscape as ls
from . import physiology as ph
from .errors import ParameterError
from .rng import derive_seed, substream
from .script import ScenarioScript


class ActionKind(str, enum.Enum):
    BOOST_UP = "BoostUp"
    BOOST_DOWN = "BoostDown"
    ALLOW_SAMPLING = "AllowSampling"
    ASSIST_ASCENT = "AssistAscent"
    PERTURB = "Perturb"
    NONE = "None"


HYSTERESIS_ACTIONS = frozenset({ActionKind.BOOST_UP, ActionKind.BOOST_DOWN, ActionKind.PERTURB})


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    magnitude: float = 0.0

    def __post_init__(self) -> None:
        if self.magnitude < 0:
            raise ParameterError(f"action magnitude must be >= 0: {self.magnitude}")
        if self.kind is ActionKind.NONE and self.magnitude != 0:
            raise ParameterError("None action carries magnitude 0")
        if self.kind is ActionKind.PERTURB and not self.magnitude > 0:
            raise ParameterError("Perturb needs a positive magnitude")


NO_ACTION = Action(ActionKind.NONE)
ALLOW_SAMPLING = Action(ActionKind.ALLOW_SAMPLING)


@dataclass(frozen=True)
class ThresholdConfig:
    lower: float = 0.35
    upper: float = 0.65
    boost: float = 0.1

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ParameterError(f"lower must be < upper: {self.lower} >= {self.upper}")
        if self.boost < 0:
            raise ParameterError(f"boost must be >= 0: {self.boost}")


@dataclass(frozen=True)
class LandscapeGuidedConfig:
    # Perturb-on-brittle: the ratchet possibility.
    perturb_magnitude: float = 0.3
    # Assisted ascent: working with the adaptive mechanism.
    assist_gain: float = 0.5
    # Tolerated sampling steps: reduced performance on the path to optimality.
    sampling_budget: int = 5

    def __post_init__(self) -> None:
        if not self.perturb_magnitude > 0:
            raise ParameterError(f"perturb_magnitude must be > 0: {self.perturb_magnitude}")
        if self.assist_gain < 0:
            raise ParameterError(f"assist_gain must be >= 0: {self.assist_gain}")
        if self.sampling_budget < 0:
            raise ParameterError(f"sampling_budget must be >= 0: {self.sampling_budget}")


ControllerConfig = Union[ThresholdConfig, LandscapeGuidedConfig]


def controller_name(config: ControllerConfig | None) -> str:
    if config is None:
        return "none"
    return "threshold" if isinstance(config, ThresholdConfig) else "landscape"


@dataclass(frozen=True)
class ModelParams:
    """Everything about the agent that is not the controller or the scenario."""

    state: ph.PhysiologicalState = field(default_factory=ph.PhysiologicalState)
    memory: ph.MemoryState = field(default_factory=ph.MemoryState)
    landscape_n: int = 10
    landscape_k: int = 3
    steps_per_walk_move: int = 1
    # "window": min/max of the agent's own recent performance;
    # "population": fixed sample bounds population_min/population_max.
    fc_baseline: str = "window"
    fc_window: int = 200
    population_min: float = 0.0
    population_max: float = 1.0
    robust_radius: float = 0.15
    balance_band: float = 0.1
    regime_rel_tol: float = 1e-6
    hysteresis_threshold: float = 0.3
    hysteresis_delta: float = 0.05
    # Performance level above which behavior counts as optimal.
    optimal_performance: float = 0.7
    ratchet_threshold: float = 0.2
    ratchet_gain: float = 0.1
    # Start indicators at the first segment's drift bias rather than state.indicators.
    start_at_bias: bool = True

    def __post_init__(self) -> None:
        if self.steps_per_walk_move < 1:
            raise ParameterError("steps_per_walk_move must be >= 1")
        if self.fc_baseline not in ("window", "population"):
            raise ParameterError(f"fc_baseline must be 'window' or 'population': {self.fc_baseline!r}")
        if self.fc_window < 1:
            raise ParameterError("fc_window must be >= 1")
        if not self.population_max > self.population_min:
            raise ParameterError("population_max must exceed population_min")


COLUMNS = (
    "t", "ind1", "ind2", "ind3", "arousal", "performance", "gauge", "f_c", "s_c",
    "phase", "regime", "action", "hysteresis_offset", "genotype", "landscape_fitness",
)


class TraceRow(NamedTuple):
    t: float
    ind1: float
    ind2: float
    ind3: float
    arousal: float
    performance: float
    gauge: int
    f_c: float
    s_c: float
    phase: str
    regime: str
    action: str
    hysteresis_offset: float
    genotype: str
    landscape_fitness: float


@dataclass
class Trace:
    header: dict[str, Any]
    rows: list[TraceRow]
    degenerate_fc_steps: int = 0

    def column(self, name: str) -> list:
        i = COLUMNS.index(name)
        return [r[i] for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def threshold_decide(mean_arousal: float, config: ThresholdConfig) -> Action:
    if mean_arousal < config.lower:
        return Action(ActionKind.BOOST_UP, config.boost)
    if mean_arousal > config.upper:
        return Action(ActionKind.BOOST_DOWN, config.boost)
    return NO_ACTION


def landscape_decide(assessment: ad.AdaptiveAssessment, regime: ad.Regime,
                     steps_in_sampling: int, config: LandscapeGuidedConfig) -> Action:
    if assessment.phase is ad.Phase.BRITTLE:
        return Action(ActionKind.PERTURB, config.perturb_magnitude)
    if regime is ad.Regime.SAMPLING:
        if steps_in_sampling <= config.sampling_budget:
            return ALLOW_SAMPLING
        return Action(ActionKind.ASSIST_ASCENT, config.assist_gain)
    if regime is ad.Regime.CONSOLIDATION:
        return Action(ActionKind.ASSIST_ASCENT, config.assist_gain)
    return NO_ACTION


def _shift(state: ph.PhysiologicalState, delta: float) -> ph.PhysiologicalState:
    lo, hi = state.capacity_bounds
    ind = tuple(min(hi, max(lo, x + delta)) for x in state.indicators)
    return replace(state, indicators=ind)  # type: ignore[arg-type]


def apply_action(state: ph.PhysiologicalState, env: ph.Environment, action: Action,
                 params: ModelParams | None = None) -> tuple[ph.PhysiologicalState, ph.Environment]:
    """Apply one controller output; the environment passes through unchanged."""
    kind = action.kind
    if kind is ActionKind.NONE or kind is ActionKind.ALLOW_SAMPLING:
        return state, env
    p = params or ModelParams()
    if kind is ActionKind.ASSIST_ASCENT:
        return _shift(state, action.magnitude * (state.mu - state.arousal)), env
    if kind is ActionKind.BOOST_UP:
        state = _shift(state, action.magnitude)
    elif kind is ActionKind.BOOST_DOWN:
        state = _shift(state, -action.magnitude)
    else:
        state = ph.ratchet_perturb(state, action.magnitude, p.ratchet_threshold, p.ratchet_gain)
    width = ph.optimal_band_width(state, p.optimal_performance)
    state = ph.apply_hysteresis(state, width, p.hysteresis_threshold, p.hysteresis_delta)
    return state, env


def _initial_state(scenario: ScenarioScript, params: ModelParams) -> ph.PhysiologicalState:
    state = params.state
    cal = scenario.calibration
    if "amplitude_base" in cal:
        amp = ph.learned_amplitude(cal["amplitude_base"], cal.get("learning_gain", 0.0), params.memory)
        state = replace(state, amplitude=amp)
    if params.start_at_bias:
        lo, hi = state.capacity_bounds
        b = min(hi, max(lo, scenario.segments[0].environment.drift_bias))
        state = replace(state, indicators=(b, b, b))
    return state


def run_header(scenario: ScenarioScript, controller: ControllerConfig | None, seed: int,
               steps: int, dt: float, params: ModelParams) -> dict[str, Any]:
    return {
        "seed": int(seed),
        "steps": int(steps),
        "dt": float(dt),
        "controller": controller_name(controller),
        "controller_config": asdict(controller) if controller is not None else None,
        "model": _jsonable(asdict(params)),
        "scenario": scenario.to_dict(),
    }


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def run_closed_loop(scenario: ScenarioScript, controller: ControllerConfig | None, seed: int,
                    steps: int, dt: float, params: ModelParams | None = None) -> Trace:
    """Run one agent under one controller; ``controller=None`` never intervenes.

    Per step: environment from the script, physiology step, fitness and
    selection coefficients, regime, one landscape move in the regime's
    direction, phase assessment, controller decision, action. Each row holds
    the measured (pre-action) state plus the post-action hysteresis offset.
    """
    if steps < 1:
        raise ParameterError(f"steps must be >= 1: {steps}")
    if not dt > 0:
        raise ParameterError(f"dt must be > 0: {dt}")
    params = params or ModelParams()
    header = run_header(scenario, controller, seed, steps, dt, params)

    rng = substream(seed, "physiology")
    land = ls.generate_nk(params.landscape_n, params.landscape_k, derive_seed(seed, "landscape"))
    n = land.n
    g = int(substream(seed, "walk-start").integers(0, land.size))
    if n <= 16:
        land.fitness_table()

    state = _initial_state(scenario, params)
    memory = params.memory
    cal = scenario.calibration
    schedule = scenario.schedule(steps)
    bounds = scenario.boundaries()

    window: deque[float] = deque(maxlen=params.fc_window)
    prev_f = prev_s = 0.0
    scale = 0.0
    steps_in_sampling = 0
    degenerate = 0
    rows: list[TraceRow] = []
    is_threshold = isinstance(controller, ThresholdConfig)

    for t in range(steps):
        seg_idx = schedule[t]
        seg = scenario.segments[seg_idx]
        env = seg.environment
        if t == bounds[seg_idx][0] and seg.presentations > 0:
            memory = ph.consolidate_memories(memory, seg.fearful, seg.presentations)
            if "amplitude_base" in cal:
                amp = ph.learned_amplitude(cal["amplitude_base"], cal.get("learning_gain", 0.0), memory)
                state = replace(state, amplitude=amp)

        state = ph.step(state, env, dt, rng)
        arousal = state.arousal
        perf = ph.performance_of(state)

        if params.fc_baseline == "window":
            window.append(perf)
            lo, hi = min(window), max(window)
            if hi > lo:
                f_c = ad.fitness_coefficient(perf, lo, hi)
            else:
                f_c = 0.5
                degenerate += 1
        else:
            x = min(params.population_max, max(params.population_min, perf))
            f_c = ad.fitness_coefficient(x, params.population_min, params.population_max)
        s_c = ad.selection_coefficient(env.stimulus_clarity, env.degradation)

        scale = max(scale, abs(f_c), abs(s_c))
        if t == 0:
            reg = ad.Regime.EQUILIBRIUM
        else:
            gap = (s_c - prev_s) / dt - (f_c - prev_f) / dt
            reg = ad.classify_gap(gap, params.regime_rel_tol * (scale if scale > 0 else 1.0))
        prev_f, prev_s = f_c, s_c

        if t % params.steps_per_walk_move == 0:
            if reg is ad.Regime.CONSOLIDATION:
                g = ls.walk_step(land, g, True)
            elif reg is ad.Regime.SAMPLING:
                g = ls.walk_step(land, g, False)

        assessment = ad.classify_phase(f_c, s_c, params.robust_radius, params.balance_band)
        steps_in_sampling = steps_in_sampling + 1 if reg is ad.Regime.SAMPLING else 0

        if controller is None:
            action = NO_ACTION
        elif is_threshold:
            action = threshold_decide(arousal, controller)  # type: ignore[arg-type]
        else:
            action = landscape_decide(assessment, reg, steps_in_sampling, controller)  # type: ignore[arg-type]

        ind = state.indicators
        state, env = apply_action(state, env, action, params)
        rows.append(TraceRow(
            t * dt, ind[0], ind[1], ind[2], arousal, perf, ph.gauge_of(perf), f_c, s_c,
            assessment.phase.value, reg.value, action.kind.value, state.hysteresis_offset,
            ls.genotype_str(g, n), land.fitness_index(g),
        ))

    return Trace(header, rows, degenerate)


# Per-trace metrics used by reports and comparisons.

def time_in_optimal(trace: Trace, optimal_performance: float) -> float:
    perf = trace.column("performance")
    return sum(1 for p in perf if p >= optimal_performance) / len(perf)


def hysteresis_drift(trace: Trace, initial_offset: float = 0.0) -> float:
    return trace.rows[-1].hysteresis_offset - initial_offset


def first_equilibrium_time(trace: Trace) -> float:
    if len(trace) < 3:
        return math.inf
    times = ad.equilibrium_times(trace.column("f_c"), trace.column("s_c"), trace.header["dt"])
    return times[0] if times else math.inf


def phase_occupancy(trace: Trace) -> dict[str, float]:
    phases = trace.column("phase")
    return {p.value: phases.count(p.value) / len(phases) for p in ad.Phase}


def summarize(trace: Trace, optimal_performance: float, initial_offset: float = 0.0) -> dict[str, Any]:
    t_eq = first_equilibrium_time(trace)
    gauges = np.asarray(trace.column("gauge"))
    return {
        "rows": len(trace),
        "time_in_optimal": time_in_optimal(trace, optimal_performance),
        "hysteresis_drift": hysteresis_drift(trace, initial_offset),
        "first_equilibrium_time": t_eq if math.isfinite(t_eq) else None,
        "robustness_indicator": ad.robustness_indicator(t_eq),
        "phase_occupancy": phase_occupancy(trace),
        "mean_gauge": float(gauges.mean()),
        "degenerate_fc_steps": trace.degenerate_fc_steps,
        "action_counts": {k.value: trace.column("action").count(k.value) for k in ActionKind},
    }
