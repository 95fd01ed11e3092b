"""Compiled kernels against the pure-Python fallback.

Runs each hot loop on identical inputs with both backends, checks that the
outputs agree, and prints the best-of-``--repeat`` wall time per backend.

    python3 benchmarks/bench_kernels.py --repeat 5 --json bench.json
"""

import argparse
import json
import platform
import sys
import time
from fractions import Fraction

import numpy as np

from thinbands._kernels import _pykernels
from thinbands.cone_solver import KSequence, solve_widths
from thinbands.iet_rauzy import IETStage
from thinbands.surface_sections import SurfaceModel, _guard, bridge_faces, seed_vertex, start_point

try:
    from thinbands._kernels import _ckernels
except ImportError:
    _ckernels = None


def workloads(orbit_n, radius, trace_n):
    sol = solve_widths(KSequence.doubling(2), 24, tol=1e300)
    stage = IETStage.from_w([float(x) for x in sol.exact[0]])
    model = SurfaceModel.from_solution(sol)
    w1 = float(sol.exact[0][0])

    a = model.sigma * Fraction(3, 7)
    n0 = seed_vertex(model, a, 0, 0)
    f, p = next((f, start_point(model, f, a)) for i in (1, 2, 3) for f in bridge_faces(model, n0, i)
                if start_point(model, f, a) is not None)
    return {
        f"iet_orbit ({orbit_n} points)": (
            "iet_orbit", (*stage.float_tables(), 0, 0.37 * w1, orbit_n)),
        f"gamma_bfs (radius {radius})": (
            "gamma_bfs", (n0, float(a), model.H_float, model.w_float, float(model.sigma),
                          radius, _guard(model))),
        f"trace_curve ({trace_n} faces)": (
            "trace_curve", (f.axis, f.corner, p, model.H_float, float(a), trace_n, 1e-12)),
    }


def best_of(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def same(x, y):
    if isinstance(x, tuple):
        return len(x) == len(y) and all(same(a, b) for a, b in zip(x, y))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        x, y = np.asarray(x), np.asarray(y)
        if x.dtype.kind == "f":
            return x.shape == y.shape and np.allclose(x, y, rtol=0, atol=1e-9)
        return np.array_equal(x, y)
    return x == y


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--orbit", type=int, default=200_000)
    p.add_argument("--radius", type=int, default=20_000)
    p.add_argument("--trace", type=int, default=100_000)
    p.add_argument("--json", help="also write the results here")
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; reinstall with Cython available", file=sys.stderr)
        return 1

    rows = []
    print(f"{'kernel':32s} {'python (s)':>11s} {'compiled (s)':>13s} {'speedup':>9s}  agree")
    for name, (fn, kargs) in workloads(args.orbit, args.radius, args.trace).items():
        tp, outp = best_of(getattr(_pykernels, fn), kargs, args.repeat)
        tc, outc = best_of(getattr(_ckernels, fn), kargs, args.repeat)
        ok = same(outp, outc)
        rows.append({"kernel": name, "python_s": tp, "compiled_s": tc, "speedup": tp / tc, "agree": ok})
        print(f"{name:32s} {tp:11.4f} {tc:13.5f} {tp / tc:8.1f}x  {ok}")
    if args.json:
        meta = {"python": platform.python_version(), "machine": platform.machine(),
                "repeat": args.repeat}
        with open(args.json, "w") as fh:
            json.dump({"meta": meta, "results": rows}, fh, indent=2)
    return 0 if all(r["agree"] for r in rows) else 2


if __name__ == "__main__":
    sys.exit(main())
