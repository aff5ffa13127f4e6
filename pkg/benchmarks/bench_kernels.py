"""Compare the compiled and pure-Python filled-interior kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeat 3]

Each kernel runs on the same Brownian bridges for both backends; the table
reports the best-of-``repeat`` wall time per call and the speedup.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from loopsoup.montecarlo import _pykernels, fill
from loopsoup.montecarlo.sampler import brownian_bridges, replica_rng

try:
    from loopsoup.montecarlo import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def cases(n_steps: int, n_points: int, rng):
    path = brownian_bridges(rng, np.array([1.0]), n_steps)[0]
    xs, ys = np.ascontiguousarray(path.real), np.ascontiguousarray(path.imag)
    cell = fill.default_cell(path)
    px = np.ascontiguousarray(rng.uniform(xs.min(), xs.max(), n_points))
    py = np.ascontiguousarray(rng.uniform(ys.min(), ys.max(), n_points))
    bx, by = (np.ascontiguousarray(v) for v in _pykernels.outer_boundary(xs, ys, cell))
    h = max(np.ptp(xs), np.ptp(ys)) / 256
    return {
        "find_intersections": lambda k: k.find_intersections(xs, ys, cell),
        "outer_boundary": lambda k: k.outer_boundary(xs, ys, cell),
        "fill_contains_many": lambda k: k.fill_contains_many(xs, ys, px, py, cell),
        "winding_number": lambda k: k.winding_number(xs, ys, float(px[0]), float(py[0])),
        "flood_fill_grid": lambda k: k.flood_fill_grid(xs, ys, xs.min() - 2 * h, ys.min() - 2 * h, h, 262, 262),
        "polygon_area": lambda k: k.polygon_area(bx, by),
    }


def best_time(fn, repeat: int) -> float:
    t = timeit.Timer(fn)
    number, _ = t.autorange()
    return min(t.repeat(repeat=repeat, number=number)) / number


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--points", type=int, default=200, help="query points for fill_contains_many")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the pure-Python backend is available")
        return 1
    rng = replica_rng(2024, 0)
    print(f"{'kernel':<20} {'steps':>6} {'cython [s]':>12} {'python [s]':>12} {'speedup':>9}")
    for n in args.sizes:
        for name, call in cases(n, args.points, rng).items():
            tc = best_time(lambda: call(_kernels), args.repeat)
            tp = best_time(lambda: call(_pykernels), args.repeat)
            print(f"{name:<20} {n:>6} {tc:>12.3e} {tp:>12.3e} {tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
