"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import landscape as ls
from . import mitigation as mt
from . import report
from . import scenarios as sc
from .config import RunConfig, load_config, with_overrides
from .errors import AdaptlandError, ConfigError, ParameterError


def cmd_landscape(args: argparse.Namespace) -> int:
    try:
        land = ls.generate_nk(args.n, args.k, args.seed)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    doc = json.loads(land.to_json())
    if args.stats:
        maxima = ls.local_extrema(land, "maxima")
        table = land.fitness_table()
        rugged = ls.ruggedness_autocorrelation(land, args.walk_length, args.seed)
        doc["stats"] = {
            "local_maxima": len(maxima),
            "local_minima": ls.count_local_optima(land, "minima"),
            "global_max": float(table.max()),
            "global_min": float(table.min()),
            "autocorrelation": rugged.rho,
            "zero_variance": rugged.zero_variance,
        }
    if args.out:
        out = Path(args.out)
        report.write_json(doc, out / "landscape.json")
        report.write_csv(("x", "y", "fitness"), ls.export_surface(land, args.resolution), out / "surface.csv")
    sys.stdout.write(report.json_text(doc))
    return 0


def _out_dir(cfg: RunConfig, out: str | None) -> Path:
    return Path(out if out is not None else cfg.output_dir)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = with_overrides(load_config(args.config), seed=args.seed, steps=args.steps)
    controller = cfg.controller_config(args.controller)
    trace = mt.run_closed_loop(cfg.scenario_script(), controller, cfg.seed, cfg.steps, cfg.dt,
                               cfg.model_params())
    paths = report.write_outputs(trace, _out_dir(cfg, args.out))
    print("\n".join(str(p) for p in paths))
    return 0


def cmd_four_step(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    base = cfg.model_params()
    trace, gauges, expected = sc.run_four_step(cfg.seed, cfg.four_step, cfg.dt, base)
    sweep = []
    for i in range(args.sweep):
        seed = cfg.seed + i
        _, g, _ = sc.run_four_step(seed, cfg.four_step, cfg.dt, base)
        sweep.append({"seed": seed, "gauges": g, "match": g == expected})
    extra = {"four_step": {"expected_gauges": expected, "gauges": gauges, "match": gauges == expected,
                           "sweep": sweep}}
    paths = report.write_outputs(trace, _out_dir(cfg, args.out), extra)
    print(f"gauges {gauges} expected {expected}")
    print("\n".join(str(p) for p in paths))
    ok = gauges == expected and all(s["match"] for s in sweep)
    return 0 if ok else 1


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    count = args.ensemble or cfg.compare.ensemble
    if count < 1:
        raise ConfigError("--ensemble must be >= 1", key="ensemble")
    ensemble = cfg.comparison_ensemble(count)
    params = cfg.model_params()
    rep = sc.compare_controllers(ensemble, cfg.controller.threshold, cfg.controller.landscape, cfg.seed,
                                 cfg.ensemble.steps, cfg.dt, params, cfg.compare.resamples,
                                 args.workers or cfg.compare.workers)
    out = _out_dir(cfg, args.out)
    paths = report.write_outputs(rep, out, {"difference_definition": "landscape - threshold time-in-optimal"})
    if args.traces:
        for i, script in enumerate(ensemble):
            for cc in (cfg.controller.threshold, cfg.controller.landscape):
                trace = mt.run_closed_loop(script, cc, rep.seeds[i], cfg.ensemble.steps, cfg.dt, params)
                paths += report.write_trace(trace, out / "runs" / f"{i:03d}_{mt.controller_name(cc)}")
    print(f"difference {rep.difference:.6f} CI [{rep.ci_low:.6f}, {rep.ci_high:.6f}]")
    print("\n".join(str(p) for p in paths[:2]))
    return 0


def cmd_practice(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    params = cfg.model_params()
    out = _out_dir(cfg, args.out)
    doc = {}
    for label, vol in (("constant", 0.0), ("nonstationary", cfg.scenario.volatility)):
        script = sc.nonstationary_ensemble(1, cfg.seed, vol, cfg.ensemble)[0]
        times = sc.practice_trials(script, cfg.seed, params, cfg.practice)
        trials = list(range(1, len(times) + 1))
        a, b, r2 = sc.fit_power_law(trials, times)
        report.write_csv(("trial", "time"), zip(trials, times), out / f"trials_{label}.csv")
        doc[label] = {"a": a, "b": b, "r_squared": r2, "volatility": vol}
    report.write_json({"seed": cfg.seed, **doc}, out / "practice.json")
    print(report.json_text(doc), end="")
    return 0


def cmd_powerlaw(args: argparse.Namespace) -> int:
    trials, times = report.read_trials(args.trace)
    a, b, r2 = sc.fit_power_law(trials, times)
    sys.stdout.write(report.json_text({"a": a, "b": b, "r_squared": r2, "points": len(times)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptland", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("landscape", help="generate an NK landscape and print it")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stats", action="store_true", help="exhaustive optima counts and ruggedness")
    p.add_argument("--walk-length", type=int, default=1000)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--out", help="also write landscape.json and surface.csv here")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("simulate", help="one closed-loop run")
    p.add_argument("--config")
    p.add_argument("--controller", choices=("threshold", "landscape", "none"))
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("four-step", help="baseline / degraded / learned scenario")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--sweep", type=int, default=0, help="also check this many consecutive seeds")
    p.set_defaults(func=cmd_four_step)

    p = sub.add_parser("compare", help="threshold vs landscape-guided on an ensemble")
    p.add_argument("--config")
    p.add_argument("--ensemble", type=int)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--traces", action="store_true", help="write every run's trace")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("practice", help="practice trials under constant and nonstationary stimuli")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_practice)

    p = sub.add_parser("powerlaw", help="fit T = a N^-b to trials.csv or trace.csv")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_powerlaw)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AdaptlandError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
