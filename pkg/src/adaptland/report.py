"""Bit-stable CSV/JSON output for traces and comparison reports.

CSV uses ',' and '\\n' with '.' decimals regardless of locale; floats are
printed with 9 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import AdaptlandError
from .mitigation import COLUMNS, Trace, summarize
from .scenarios import ComparisonReport


class OutputError(AdaptlandError, OSError):
    """Writing an output file failed."""


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        out = format(value, ".9g")
        return "0" if out == "-0" else out
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=",", lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True) + "\n"


def _finite(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def trace_csv(trace: Trace) -> str:
    return csv_text(COLUMNS, trace.rows)


def write_trace(trace: Trace, directory: str | Path, extra: dict[str, Any] | None = None) -> list[Path]:
    """trace.csv, summary.json and plotdata/*.csv for one run."""
    d = Path(directory)
    model = trace.header.get("model", {})
    p_opt = model.get("optimal_performance", 0.7)
    offset0 = model.get("state", {}).get("hysteresis_offset", 0.0)
    summary = {
        "seed": trace.header["seed"],
        "config": trace.header,
        "metrics": summarize(trace, p_opt, offset0),
    }
    if extra:
        summary.update(extra)
    rows = trace.rows
    paths = [
        _write(d / "trace.csv", trace_csv(trace)),
        _write(d / "summary.json", json_text(summary)),
        _write(d / "plotdata" / "gauge.csv",
               csv_text(("t", "gauge", "performance"), ((r.t, r.gauge, r.performance) for r in rows))),
        _write(d / "plotdata" / "fs.csv",
               csv_text(("t", "f_c", "s_c", "regime"), ((r.t, r.f_c, r.s_c, r.regime) for r in rows))),
        _write(d / "plotdata" / "phase_portrait.csv",
               csv_text(("f_c", "s_c", "phase"), ((r.f_c, r.s_c, r.phase) for r in rows))),
    ]
    return paths


def write_report(report: ComparisonReport, directory: str | Path,
                 extra: dict[str, Any] | None = None) -> list[Path]:
    d = Path(directory)
    doc = report.to_dict()
    if extra:
        doc.update(extra)
    per_run = csv_text(
        ("scenario", "seed", report.first.name + "_time_in_optimal", report.second.name + "_time_in_optimal"),
        ((i, s, a, b) for i, (s, a, b) in enumerate(zip(
            report.seeds, report.first.per_run_time_in_optimal, report.second.per_run_time_in_optimal))),
    )
    return [_write(d / "report.json", json_text(doc)), _write(d / "plotdata" / "per_run.csv", per_run)]


def write_outputs(result: Trace | ComparisonReport, directory: str | Path,
                  extra: dict[str, Any] | None = None) -> list[Path]:
    if isinstance(result, Trace):
        return write_trace(result, directory, extra)
    return write_report(result, directory, extra)


def write_json(obj: Any, path: str | Path) -> Path:
    return _write(Path(path), json_text(obj))


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: str | Path) -> Path:
    return _write(Path(path), csv_text(header, rows))


def read_trials(path: str | Path) -> tuple[list[float], list[float]]:
    """Trial numbers and durations from a trials.csv or a trace.csv.

    For a trace, each maximal run of Sampling rows is one trial and its
    duration is the run's length in time units.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if "trial" in fields and "time" in fields:
        return [float(r["trial"]) for r in rows], [float(r["time"]) for r in rows]
    if "regime" in fields and "t" in fields:
        dt = float(rows[1]["t"]) - float(rows[0]["t"]) if len(rows) > 1 else 1.0
        durations = []
        run = 0
        for r in rows:
            if r["regime"] == "Sampling":
                run += 1
            elif run:
                durations.append(run * dt)
                run = 0
        if run:
            durations.append(run * dt)
        return [float(i + 1) for i in range(len(durations))], durations
    raise OutputError(f"{path}: expected columns trial,time or a trace.csv")
