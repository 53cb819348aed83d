"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line (visible in
``pytest -v`` output) before asserting.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from adaptland import adaptation as ad
from adaptland import landscape as ls
from adaptland import mitigation as mt
from adaptland import physiology as ph
from adaptland import scenarios as sc
from adaptland.cli import main
from adaptland.config import RunConfig

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def test_criterion_1_four_step(verdict):
    cfg = RunConfig()
    start = time.perf_counter()
    results = [sc.run_four_step(seed, cfg.four_step, cfg.dt, cfg.model_params())[1:] for seed in range(50)]
    elapsed = time.perf_counter() - start
    bad = [(seed, g) for seed, (g, exp) in enumerate(results) if g != [6, 3, 8] or exp != [6, 3, 8]]
    verdict(1, not bad and elapsed < 5.0,
            f"four-step gauges [6, 3, 8] for {50 - len(bad)}/50 seeds in {elapsed:.2f}s (limit 5s); mismatches {bad[:3]}")


def test_criterion_2_coefficients(verdict):
    problems = []
    for lo, hi in ((0.0, 10.0), (-3.5, 2.25), (1e-3, 7.0)):
        if abs(ad.fitness_coefficient(lo, lo, hi)) > 1e-12 or abs(ad.fitness_coefficient(hi, lo, hi) - 1) > 1e-12:
            problems.append(f"endpoints {lo},{hi}")
        if abs(ad.fitness_coefficient((lo + hi) / 2, lo, hi) - 0.5) > 1e-12:
            problems.append(f"midpoint {lo},{hi}")
    rng = np.random.default_rng(20240101)
    worst = 0.0
    for _ in range(1000):
        lo = rng.uniform(-10, 10)
        hi = lo + rng.uniform(0.1, 10)
        x = rng.uniform(lo, hi)
        scale, shift = rng.uniform(0.1, 10), rng.uniform(-10, 10)
        f = ad.fitness_coefficient(x, lo, hi)
        g = ad.fitness_coefficient(x * scale + shift, lo * scale + shift, hi * scale + shift)
        worst = max(worst, abs(f - g))
    if worst > 1e-12:
        problems.append(f"affine error {worst:.3g}")
    grid = np.round(np.arange(0, 101) / 100, 2)
    for c in grid:
        for d in grid:
            s = ad.selection_coefficient(float(c), float(d))
            if not -1.0 <= s <= 1.0 or abs(s - (c - d)) > 1e-12:
                problems.append(f"selection ({c}, {d}) -> {s}")
    verdict(2, not problems,
            f"coefficient identities, 1000 affine transforms (max err {worst:.2e}), 101x101 selection grid; {problems[:3]}")


def test_criterion_3_landscape_oracle(verdict):
    start = time.perf_counter()
    problems = []
    rng = np.random.default_rng(3)
    for seed in range(200):
        n = 2 + seed % 11
        flat = ls.generate_nk(n, 0, seed)
        t0 = oracles.nk_table_numpy(flat.contributions, n, 0)
        if len(oracles.extrema_numpy(t0, n, True)) != 1 or len(oracles.extrema_numpy(t0, n, False)) != 1:
            problems.append(f"k=0 n={n} seed={seed}")
        k = int(rng.integers(0, n))
        land = ls.generate_nk(n, k, seed)
        table = oracles.nk_table_numpy(land.contributions, n, k)
        maxima, minima = oracles.extrema_numpy(table, n, True), oracles.extrema_numpy(table, n, False)
        for _ in range(3):
            g = ls.to_bits(int(rng.integers(0, 1 << n)), n)
            for direction, target in (("ascent", maxima), ("descent", minima)):
                for tie in ("lowest", "random"):
                    path = ls.adaptive_walk(land, g, direction, tie_rule=tie, seed=seed)
                    if ls.to_int(path.steps[-1]) not in target:
                        problems.append(f"walk n={n} k={k} seed={seed} {direction}")
    counts = []
    for seed in range(200):
        land = ls.generate_nk(10, 9, seed)
        counts.append(len(oracles.extrema_numpy(oracles.nk_table_numpy(land.contributions, 10, 9), 10)))
        if seed < 20 and ls.count_local_optima(land) != counts[-1]:
            problems.append(f"count mismatch seed={seed}")
    mean = float(np.mean(counts))
    rel = abs(mean - 93.1) / 93.1
    elapsed = time.perf_counter() - start
    ok = not problems and rel <= 0.15 and elapsed < 60
    verdict(3, ok, f"k=0 unique extrema and walk endpoints on 200 seeds; n=10,k=9 mean optima {mean:.3f} "
                   f"(target 93.1, rel err {rel:.3f} <= 0.15) in {elapsed:.1f}s (limit 60s); {problems[:3]}")


def test_criterion_4_hysteresis_direction(verdict):
    rng = np.random.default_rng(4)
    violations = 0
    boundary = 0
    for i in range(10_000):
        state = ph.PhysiologicalState(hysteresis_offset=float(rng.uniform(-0.2, 0.2)),
                                      amplitude=float(rng.uniform(0.1, 1.0)),
                                      sigma=float(rng.uniform(0.05, 0.4)))
        threshold = 0.3
        w = threshold if i % 10 == 0 else float(rng.uniform(0, 1))
        out = ph.apply_hysteresis(state, w, threshold)
        before, after = state.hysteresis_offset, out.hysteresis_offset
        if w < threshold and after > before:
            violations += 1
        elif w > threshold and after < before:
            violations += 1
        elif w == threshold:
            boundary += 1
            violations += out != state
    verdict(4, violations == 0, f"10000 (state, band) pairs incl. {boundary} boundary bands; {violations} violations")


def test_criterion_5_equilibrium_detection(verdict):
    errors = {}
    for dt in (1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5):
        t = np.arange(0, round(1 / dt) + 1) * dt
        eq = ad.equilibrium_times(t ** 2, t, dt)
        errors[dt] = abs(eq[0] - 0.5) if len(eq) == 1 else math.inf
    within = all(errors[dt] <= dt for dt in (1e-2, 1e-3, 1e-4))
    # Halving dt must at least halve the error; errors already at rounding
    # level (below 1e-12) count as converged.
    halving = all(errors[dt / 2] <= max(errors[dt] / 2, 1e-12) for dt in (1e-2, 1e-3, 1e-4))
    detail = ", ".join(f"dt={dt:g}: {e:.2e}" for dt, e in errors.items())
    verdict(5, within and halving, f"F=t^2, S=t crossing errors {detail}")


def test_criterion_6_regime_walk_coupling(verdict):
    traces = [sc.run_four_step(seed)[0] for seed in range(3)]
    cfg = RunConfig()
    for i, script in enumerate(sc.nonstationary_ensemble(15, 6, 0.5)):
        for controller in (None, cfg.controller.threshold, cfg.controller.landscape):
            traces.append(mt.run_closed_loop(script, controller, 100 + i, 1000, 0.1))
    violations = 0
    rows = 0
    for trace in traces:
        for prev, row in zip(trace.rows, trace.rows[1:]):
            rows += 1
            if sum(a != b for a, b in zip(prev.genotype, row.genotype)) > 1:
                violations += 1
            if row.regime == "Sampling" and row.landscape_fitness > prev.landscape_fitness:
                violations += 1
            if row.regime == "Consolidation" and row.landscape_fitness < prev.landscape_fitness:
                violations += 1
    verdict(6, violations == 0, f"{len(traces)} traces, {rows} transitions, {violations} violations")


def test_criterion_7_power_law_contrast(verdict):
    cfg = RunConfig()
    params = cfg.model_params()
    fits = {}
    for label, vol in (("constant", 0.0), ("nonstationary", cfg.scenario.volatility)):
        script = sc.nonstationary_ensemble(1, cfg.seed, vol, cfg.ensemble)[0]
        times = sc.practice_trials(script, cfg.seed, params, cfg.practice)
        fits[label] = sc.fit_power_law(range(1, len(times) + 1), times)
    r_const, r_non = fits["constant"][2], fits["nonstationary"][2]
    ok = r_const >= 0.9 and r_non < r_const
    verdict(7, ok, f"seed {cfg.seed}: constant r^2 {r_const:.4f} (>= 0.9, b={fits['constant'][1]:.3f}), "
                   f"nonstationary r^2 {r_non:.4f} (strictly lower)")


def test_criterion_8_controller_comparison(verdict):
    cfg = RunConfig()
    start = time.perf_counter()
    rep = sc.compare_controllers(cfg.comparison_ensemble(), cfg.controller.threshold, cfg.controller.landscape,
                                 cfg.seed, cfg.ensemble.steps, cfg.dt, cfg.model_params(), cfg.compare.resamples)
    elapsed = time.perf_counter() - start
    ok = (rep.ensemble_size == 100 and rep.second.time_in_optimal >= rep.first.time_in_optimal
          and rep.ci_low >= -0.01 and elapsed < 120)
    verdict(8, ok, f"landscape {rep.second.time_in_optimal:.4f} vs threshold {rep.first.time_in_optimal:.4f}, "
                   f"difference {rep.difference:.4f} CI [{rep.ci_low:.4f}, {rep.ci_high:.4f}] "
                   f"on {rep.ensemble_size} scenarios in {elapsed:.1f}s (limit 120s)")


def _tree(d: Path) -> dict[str, bytes]:
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_criterion_9_determinism(verdict, tmp_path, capsys):
    commands = {
        "landscape": ["landscape", "--n", "10", "--k", "3", "--seed", "5", "--stats"],
        "simulate-threshold": ["simulate", "--controller", "threshold"],
        "simulate-landscape": ["simulate", "--controller", "landscape"],
        "four-step": ["four-step"],
        "compare": ["compare", "--ensemble", "10"],
        "practice": ["practice"],
    }
    differing = []
    files = 0
    for name, argv in commands.items():
        trees = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            if main(argv + ["--out", str(out)]) != 0:
                differing.append(f"{name} failed")
            trees.append(_tree(out))
        files += len(trees[0])
        if trees[0] != trees[1] or not trees[0]:
            differing.append(name)
    trace = tmp_path / "simulate-landscape" / "a" / "trace.csv"
    outputs = []
    for _ in range(2):
        capsys.readouterr()
        main(["powerlaw", "--trace", str(trace)])
        outputs.append(capsys.readouterr().out)
    if outputs[0] != outputs[1]:
        differing.append("powerlaw")
    verdict(9, not differing, f"{len(commands) + 1} commands run twice, {files} files byte-identical; differing {differing}")
