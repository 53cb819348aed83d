"""Piecewise-constant scenario scripts consumed by the closed-loop engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import ParameterError
from .physiology import Environment


@dataclass(frozen=True)
class Segment:
    duration: int
    environment: Environment
    label: str
    # Memory presentations delivered when the segment starts.
    presentations: int = 0
    fearful: bool = False


@dataclass(frozen=True)
class ScenarioScript:
    segments: tuple[Segment, ...]
    calibration: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.segments:
            raise ParameterError("a scenario needs at least one segment")
        labels = [s.label for s in self.segments]
        if len(set(labels)) != len(labels):
            raise ParameterError(f"segment labels must be unique: {labels}")
        for s in self.segments:
            if s.duration < 1:
                raise ParameterError(f"segment {s.label!r} has non-positive duration {s.duration}")
            if s.presentations < 0:
                raise ParameterError(f"segment {s.label!r} has negative presentations")

    @property
    def total_steps(self) -> int:
        return sum(s.duration for s in self.segments)

    def boundaries(self) -> list[tuple[int, int]]:
        """``[start, end)`` step ranges, one per segment."""
        out = []
        start = 0
        for s in self.segments:
            out.append((start, start + s.duration))
            start += s.duration
        return out

    def schedule(self, steps: int) -> list[int]:
        """Segment index for each of ``steps`` steps; the last segment persists."""
        idx: list[int] = []
        for i, s in enumerate(self.segments):
            idx.extend([i] * s.duration)
            if len(idx) >= steps:
                return idx[:steps]
        idx.extend([len(self.segments) - 1] * (steps - len(idx)))
        return idx

    def to_dict(self) -> dict:
        return {
            "segments": [
                {
                    "label": s.label,
                    "duration": s.duration,
                    "degradation": s.environment.degradation,
                    "stimulus_clarity": s.environment.stimulus_clarity,
                    "drift_bias": s.environment.drift_bias,
                    "noise_scale": s.environment.noise_scale,
                    "presentations": s.presentations,
                    "fearful": s.fearful,
                }
                for s in self.segments
            ],
            "calibration": dict(self.calibration),
        }


def constant(env: Environment, steps: int, label: str = "constant") -> ScenarioScript:
    return ScenarioScript((Segment(steps, env, label),))
