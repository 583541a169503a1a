#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the NumPy fallback.

Times the three hot operations (full vector-field evaluation, linearized
operator application, pseudo-energy) at several grid sizes and reports the
speedup. Run from the repository root after building the extension:

    python benchmarks/benchmark_kernels.py [--sizes 128,256,512] [--repeat 50]
"""

import argparse
import time

import numpy as np

from vpatch import Grid, RadialDeformation, ellipse_params, kernels
from vpatch import _core_py
from vpatch.dynamics import _rhs_raw, linearized_rhs, pseudo_energy
from vpatch.fourier import remove_mean

try:
    from vpatch import _core_c
except ImportError:
    _core_c = None

KERNEL_NAMES = ("log_smooth_factor", "flux_reduce", "pair_reduce", "energy_reduce")


def use_backend(impl):
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(impl, name))


def make_state(n):
    grid = Grid(n)
    th = grid.nodes
    vals = 1e-2 * (np.cos(3 * th) - 0.4 * np.sin(5 * th) + 0.2 * np.cos(7 * th))
    return grid, RadialDeformation(grid, remove_mean(vals))


def time_op(fn, repeat):
    fn()  # warm up the cached tables
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def run(sizes, repeat):
    params = ellipse_params(2.0)
    backends = [("python", _core_py)] + ([("compiled", _core_c)] if _core_c else [])
    header = f"{'op':<12} {'N':>5} " + "".join(f"{name:>15}" for name, _ in backends)
    if _core_c:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    default = _core_c if _core_c is not None else _core_py
    for n in sizes:
        grid, xi = make_state(n)
        q = np.cos(3 * grid.nodes)
        ops = {
            "rhs": lambda: _rhs_raw(xi.values, 0.2, params, grid),
            "linearized": lambda: linearized_rhs(xi, q, 0.2, params),
            "energy": lambda: pseudo_energy(xi, params),
        }
        for op_name, fn in ops.items():
            times = []
            for _, impl in backends:
                use_backend(impl)
                times.append(time_op(fn, repeat))
            use_backend(default)
            row = f"{op_name:<12} {n:>5} " + "".join(f"{t * 1e3:>12.3f} ms" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.2f}x"
            print(row)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="128,256,512")
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if _core_c is None:
        print("note: compiled extension unavailable; timing the fallback only")
    run([int(s) for s in args.sizes.split(",")], args.repeat)


if __name__ == "__main__":
    main()
