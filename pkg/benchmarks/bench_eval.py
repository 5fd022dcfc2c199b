"""Compare the three expression-evaluation paths on realistic workloads.

The library evaluates expression bundles in three ways:

* tree walk: ``evaluate`` recurses over the expression tree, one point at
  a time (the reference implementation),
* python tape: expressions are compiled once to a flat instruction tape and
  run by a numpy stack machine over whole batches,
* compiled tape: the same tape run by the C extension, one tight loop per
  batch (skipped when the extension is not built, e.g. under
  ``DEGENLAG_PURE_PYTHON=1``).

Two workloads are measured: the solution-equation components of a
degenerate two-dimensional model (shallow polynomial trees over six
coordinates) and a transcendental Lagrangian's energy differential
(deeper trees with sin/cos/exp nodes). Results are printed as a table;
all paths are cross-checked against each other before timing.

Run:  python benchmarks/bench_eval.py [--sizes 100,10000,100000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from degenlag.gnh import from_pontryagin
from degenlag.mechanics import LagrangianSystem, energy_differential
from degenlag.pontryagin import build_pontryagin
from degenlag.symbolic import compile_tape, coord, evaluate, point_map, sub
from degenlag.symbolic.engine import (
    BACKEND,
    eval_many_compiled,
    eval_many_python,
)

try:
    from degenlag.symbolic import _evalcore  # noqa: F401
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def workload_solution_equation():
    """Components of the contraction equation for L = q1*v2 + q2*v1."""
    sys = LagrangianSystem.from_string(2, "q1*v2 + q2*v1")
    system = from_pontryagin(build_pontryagin(sys))
    X = [coord(n) for n in system.chart.names]
    comps = [sub(a, b) for a, b in zip(system.omega.contract(X), system.alpha)]
    return "solution equation (6 vars)", comps, system.chart.names


def workload_transcendental():
    """Energy differential of a position-dependent transcendental model."""
    sys = LagrangianSystem.from_string(
        2, "sin(q1)*v1^2/2 + exp(q2/4)*v2^2/2 + cos(q1*q2)*v1*v2 - q1^2*q2^2"
    )
    return "energy differential (4 vars)", energy_differential(sys), sys.chart.names


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def tree_walk(exprs, names, points):
    out = np.empty((points.shape[0], len(exprs)))
    for i, row in enumerate(points):
        env = point_map(names, row)
        for j, e in enumerate(exprs):
            out[i, j] = evaluate(e, env)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,10000,100000",
                    help="comma-separated batch sizes")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repeats; the best run is reported")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    print(f"active backend: {BACKEND}"
          + ("" if HAVE_COMPILED else "  (compiled extension not built)"))
    header = f"{'workload':34} {'batch':>8} {'path':13} {'time':>10} {'Mpts/s':>8} {'speedup':>8}"

    for make in (workload_solution_equation, workload_transcendental):
        label, exprs, names = make()
        tape = compile_tape(exprs, names)
        print(f"\n{header}")
        for size in sizes:
            points = rng.uniform(-2.0, 2.0, size=(size, len(names)))

            reference = tree_walk(exprs, names, points)
            agree = [np.nanmax(np.abs(eval_many_python(tape, points) - reference))]
            if HAVE_COMPILED:
                agree.append(
                    np.nanmax(np.abs(eval_many_compiled(tape, points) - reference))
                )
            if max(agree) > 1e-12:
                raise SystemExit(f"backends disagree by {max(agree):.3e} on {label}")

            rows = []
            # tree walk gets prohibitive on large batches; cap it and scale
            walk_pts = points[: min(size, 10000)]
            t = time_call(lambda: tree_walk(exprs, names, walk_pts), args.repeats)
            t_walk = t * size / walk_pts.shape[0]
            rows.append(("tree walk", t_walk))
            rows.append(
                ("python tape",
                 time_call(lambda: eval_many_python(tape, points), args.repeats))
            )
            if HAVE_COMPILED:
                rows.append(
                    ("compiled tape",
                     time_call(lambda: eval_many_compiled(tape, points), args.repeats))
                )
            for path, t in rows:
                rate = size / t / 1e6
                print(f"{label:34} {size:>8} {path:13} {t:>9.4f}s {rate:>8.2f} "
                      f"{t_walk / t:>7.1f}x")


if __name__ == "__main__":
    main()
