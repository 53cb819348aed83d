"""Compare the compiled NK kernels against the pure numpy fallback.

    python benchmarks/bench_kernels.py [--n 16] [--k 4] [--repeat 5] [--json out.json]

Each kernel is timed on identical inputs with both backends (best of
``--repeat``), and the outputs are checked to be identical before timing.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from adaptland import _kernels_py
from adaptland.rng import substream

try:
    from adaptland import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def cases(n: int, k: int, walks: int):
    contrib = np.ascontiguousarray(substream(0, "bench").random((n, 1 << (k + 1))))
    table = _kernels_py.fitness_table(contrib, n, k)
    starts = substream(1, "bench").integers(0, 1 << n, size=walks)

    def walks_with(mod):
        return [mod.steepest_walk(table, n, int(s), True, 10_000) for s in starts]

    return {
        "fitness_table": lambda mod: mod.fitness_table(contrib, n, k),
        "extrema_mask": lambda mod: mod.extrema_mask(table, n, True),
        f"steepest_walk x{walks}": walks_with,
    }


def best_time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--walks", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write results here as JSON")
    args = ap.parse_args(argv)

    if _compiled is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    for name, run in cases(args.n, args.k, args.walks).items():
        a, b = run(_compiled), run(_kernels_py)
        same = (np.array_equal(np.asarray(a), np.asarray(b)) if not isinstance(a, list)
                else all(list(pa) == list(pb) and bool(da) == bool(db) for (pa, da), (pb, db) in zip(a, b)))
        t_c = best_time(lambda: run(_compiled), args.repeat)
        t_p = best_time(lambda: run(_kernels_py), args.repeat)
        rows.append({"kernel": name, "cython_s": t_c, "python_s": t_p, "speedup": t_p / t_c, "identical": same})

    print(f"n={args.n} k={args.k} best of {args.repeat}")
    print(f"{'kernel':<22}{'cython (ms)':>13}{'python (ms)':>13}{'speedup':>10}  identical")
    for r in rows:
        print(f"{r['kernel']:<22}{1e3 * r['cython_s']:>13.3f}{1e3 * r['python_s']:>13.3f}"
              f"{r['speedup']:>9.1f}x  {r['identical']}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"n": args.n, "k": args.k, "results": rows}, fh, indent=2)
    return 0 if all(r["identical"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
