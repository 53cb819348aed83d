"""Run configuration: a YAML document of nested sections.

Every section maps onto a dataclass. Unknown keys are rejected, omitted keys
take their defaults, and every bound declared by the model is checked before
a run starts. ``dump_config(parse_config(text))`` reproduces the shipped
default document exactly.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from typing import Any

import yaml

from . import mitigation as mt
from . import physiology as ph
from .errors import AdaptlandError, ConfigError
from .landscape import MAX_N
from .scenarios import (EnsembleSettings, FourStepCalibration, PracticeSettings,
                        nonstationary_ensemble)
from .script import ScenarioScript

FORMAT_VERSION = 1
CONTROLLERS = ("threshold", "landscape", "none")
SCENARIO_KINDS = ("nonstationary", "constant")


@dataclass(frozen=True)
class LandscapeSection:
    n: int = 10
    k: int = 3
    steps_per_walk_move: int = 1


@dataclass(frozen=True)
class PhysiologySection:
    mu: float = 0.5
    sigma: float = 0.15
    amplitude: float = 1.0
    hysteresis_offset: float = 0.0
    capacity: tuple[float, float] = (0.05, 0.95)
    habituation_rates: tuple[float, float, float] = (0.0, 0.05, 0.1)
    drift_rate: float = 0.5
    initial_indicators: tuple[float, float, float] = (0.5, 0.5, 0.5)
    start_at_bias: bool = True
    hysteresis_threshold: float = 0.3
    hysteresis_delta: float = 0.05
    optimal_performance: float = 0.7
    ratchet_threshold: float = 0.2
    ratchet_gain: float = 0.1


@dataclass(frozen=True)
class MemorySection:
    alpha_fear: float = 0.95
    alpha_decl: float = 0.1
    interference: float = 0.8


@dataclass(frozen=True)
class AssessmentSection:
    fc_baseline: str = "window"
    fc_window: int = 200
    population_min: float = 0.0
    population_max: float = 1.0
    robust_radius: float = 0.15
    balance_band: float = 0.1
    regime_rel_tol: float = 1e-6


@dataclass(frozen=True)
class ControllerSection:
    active: str = "threshold"
    threshold: mt.ThresholdConfig = field(default_factory=mt.ThresholdConfig)
    landscape: mt.LandscapeGuidedConfig = field(default_factory=mt.LandscapeGuidedConfig)


@dataclass(frozen=True)
class ScenarioSection:
    kind: str = "nonstationary"
    volatility: float = 0.5
    # Ensemble member simulated by `simulate`.
    index: int = 0


@dataclass(frozen=True)
class CompareSection:
    ensemble: int = 100
    volatility: float = 0.5
    resamples: int = 1000
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    format_version: int = FORMAT_VERSION
    seed: int = 2024
    steps: int = 1000
    dt: float = 0.1
    output_dir: str = "out"
    landscape: LandscapeSection = field(default_factory=LandscapeSection)
    physiology: PhysiologySection = field(default_factory=PhysiologySection)
    memory: MemorySection = field(default_factory=MemorySection)
    assessment: AssessmentSection = field(default_factory=AssessmentSection)
    controller: ControllerSection = field(default_factory=ControllerSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    ensemble: EnsembleSettings = field(default_factory=EnsembleSettings)
    compare: CompareSection = field(default_factory=CompareSection)
    four_step: FourStepCalibration = field(default_factory=FourStepCalibration)
    practice: PracticeSettings = field(default_factory=PracticeSettings)

    def model_params(self) -> mt.ModelParams:
        p, a = self.physiology, self.assessment
        state = ph.PhysiologicalState(
            indicators=p.initial_indicators, mu=p.mu, sigma=p.sigma, amplitude=p.amplitude,
            hysteresis_offset=p.hysteresis_offset, capacity_bounds=p.capacity,
            habituation_rates=p.habituation_rates, drift_rate=p.drift_rate,
        )
        memory = ph.MemoryState(alpha_fear=self.memory.alpha_fear, alpha_decl=self.memory.alpha_decl,
                                interference=self.memory.interference)
        return mt.ModelParams(
            state=state, memory=memory,
            landscape_n=self.landscape.n, landscape_k=self.landscape.k,
            steps_per_walk_move=self.landscape.steps_per_walk_move,
            fc_baseline=a.fc_baseline, fc_window=a.fc_window,
            population_min=a.population_min, population_max=a.population_max,
            robust_radius=a.robust_radius, balance_band=a.balance_band,
            regime_rel_tol=a.regime_rel_tol,
            hysteresis_threshold=p.hysteresis_threshold, hysteresis_delta=p.hysteresis_delta,
            optimal_performance=p.optimal_performance,
            ratchet_threshold=p.ratchet_threshold, ratchet_gain=p.ratchet_gain,
            start_at_bias=p.start_at_bias,
        )

    def controller_config(self, name: str | None = None) -> mt.ControllerConfig | None:
        name = name or self.controller.active
        if name == "threshold":
            return self.controller.threshold
        if name == "landscape":
            return self.controller.landscape
        return None

    def scenario_script(self, index: int | None = None) -> ScenarioScript:
        vol = 0.0 if self.scenario.kind == "constant" else self.scenario.volatility
        i = self.scenario.index if index is None else index
        return nonstationary_ensemble(i + 1, self.seed, vol, self.ensemble)[i]

    def comparison_ensemble(self, count: int | None = None) -> list[ScenarioScript]:
        return nonstationary_ensemble(count or self.compare.ensemble, self.seed,
                                      self.compare.volatility, self.ensemble)


def _coerce(value: Any, tp: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, list) or len(value) != len(args):
            raise ConfigError(f"{path}: expected a list of {len(args)} numbers", key=path)
        return tuple(_coerce(v, a, f"{path}[{i}]") for i, (v, a) in enumerate(zip(value, args)))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}", key=path)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}", key=path)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}", key=path)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}", key=path)
        return value
    raise ConfigError(f"{path}: unsupported type {tp!r}", key=path)


def _build(cls: type, data: Any, path: str) -> Any:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'document'}: expected a mapping", key=path or None)
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        key = f"{path}.{unknown[0]}" if path else str(unknown[0])
        raise ConfigError(f"unknown key {key!r}", key=key)
    kwargs = {}
    for name, value in data.items():
        sub = f"{path}.{name}" if path else name
        kwargs[name] = _coerce(value, hints[name], sub)
    try:
        return cls(**kwargs)
    except AdaptlandError as exc:
        raise ConfigError(f"{path or 'document'}: {exc}", key=path or None) from exc


def _check(cond: bool, key: str, bound: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: violates bound {bound}", key=key)


def validate(cfg: RunConfig) -> RunConfig:
    """Check cross-field bounds and build every model object once."""
    _check(cfg.format_version == FORMAT_VERSION, "format_version", f"format_version == {FORMAT_VERSION}")
    _check(0 <= cfg.seed < 2 ** 64, "seed", "0 <= seed < 2^64")
    _check(cfg.steps >= 1, "steps", "steps >= 1")
    _check(cfg.dt > 0, "dt", "dt > 0")
    n, k = cfg.landscape.n, cfg.landscape.k
    _check(1 <= n <= MAX_N, "landscape.n", f"1 <= n <= {MAX_N}")
    _check(0 <= k <= n - 1, "landscape.k", f"0 <= k <= n-1 (= {n - 1})")
    _check(cfg.landscape.steps_per_walk_move >= 1, "landscape.steps_per_walk_move", "steps_per_walk_move >= 1")
    p = cfg.physiology
    _check(p.sigma > 0, "physiology.sigma", "sigma > 0")
    _check(0 < p.amplitude <= 1, "physiology.amplitude", "0 < amplitude <= 1")
    _check(-0.2 <= p.hysteresis_offset <= 0.2, "physiology.hysteresis_offset", "-0.2 <= offset <= 0.2")
    _check(0 <= p.capacity[0] <= p.capacity[1] <= 1, "physiology.capacity", "0 <= lo <= hi <= 1")
    _check(min(p.habituation_rates) >= 0, "physiology.habituation_rates", "rates >= 0")
    _check(p.hysteresis_threshold >= 0, "physiology.hysteresis_threshold", "threshold >= 0")
    _check(p.hysteresis_delta >= 0, "physiology.hysteresis_delta", "delta >= 0")
    _check(0 <= p.optimal_performance <= 1, "physiology.optimal_performance", "0 <= optimal_performance <= 1")
    a = cfg.assessment
    _check(a.fc_baseline in ("window", "population"), "assessment.fc_baseline", "one of window, population")
    _check(a.fc_window >= 1, "assessment.fc_window", "fc_window >= 1")
    _check(a.robust_radius >= 0, "assessment.robust_radius", "robust_radius >= 0")
    _check(a.balance_band >= 0, "assessment.balance_band", "balance_band >= 0")
    _check(cfg.controller.active in CONTROLLERS, "controller.active", f"one of {', '.join(CONTROLLERS)}")
    _check(cfg.scenario.kind in SCENARIO_KINDS, "scenario.kind", f"one of {', '.join(SCENARIO_KINDS)}")
    _check(cfg.scenario.volatility >= 0, "scenario.volatility", "volatility >= 0")
    _check(cfg.scenario.index >= 0, "scenario.index", "index >= 0")
    _check(cfg.ensemble.steps >= 1, "ensemble.steps", "steps >= 1")
    _check(cfg.compare.ensemble >= 1, "compare.ensemble", "ensemble >= 1")
    _check(cfg.compare.resamples >= 1, "compare.resamples", "resamples >= 1")
    _check(cfg.compare.workers >= 1, "compare.workers", "workers >= 1")
    _check(cfg.compare.volatility >= 0, "compare.volatility", "volatility >= 0")
    fs = cfg.four_step
    _check(fs.segment_steps >= 1, "four_step.segment_steps", "segment_steps >= 1")
    _check(1 <= fs.settle_window <= fs.segment_steps, "four_step.settle_window", "1 <= settle_window <= segment_steps")
    _check(fs.presentations >= 0, "four_step.presentations", "presentations >= 0")
    _check(cfg.practice.trials >= 3, "practice.trials", "trials >= 3")
    _check(cfg.practice.dt > 0, "practice.dt", "dt > 0")
    try:
        cfg.model_params()
    except AdaptlandError as exc:
        raise ConfigError(f"physiology: {exc}", key="physiology") from exc
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML document; an empty document gives the defaults."""
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigError(f"syntax error at line {line}, column {col}: {exc.problem}",
                          line=line, column=col) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"syntax error: {exc}") from exc
    return validate(_build(RunConfig, data, ""))


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


HEADER = "# adaptland run configuration; every key is optional (see README.md)\n"


def dump_config(cfg: RunConfig) -> str:
    return HEADER + yaml.safe_dump(_plain(asdict(cfg)), sort_keys=False, default_flow_style=False)


def default_config_text() -> str:
    return resources.files("adaptland").joinpath("default_config.yaml").read_text(encoding="utf-8")


def with_overrides(cfg: RunConfig, **changes: Any) -> RunConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return validate(replace(cfg, **changes)) if changes else cfg
