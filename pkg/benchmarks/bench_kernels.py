#!/usr/bin/env python3
"""Benchmark the compiled contraction kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--grid 128] [--repeats 20]
"""

import argparse
import time

import numpy as np

from cshlab._kernels import BACKEND, numpy_backend

try:
    from cshlab._kernels import _fast
except ImportError:
    _fast = None

from cshlab.lie import build_su_n_basis


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, M, repeats):
    g = build_su_n_basis(n)
    rng = np.random.default_rng(0)
    shape = (g.dim, M * M)
    x = np.ascontiguousarray(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    y = np.ascontiguousarray(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    ia, ib, ic, fv = g.f_sparse()
    ga, gb, gc, ge, gv = g.g4_sparse()

    rows = []

    def run_bracket(impl):
        out = np.zeros_like(x)
        return timeit(lambda: impl.bracket(ia, ib, ic, fv, x, y, out), repeats)

    def run_higgs(impl):
        def body():
            grad = np.zeros_like(x)
            pot = np.zeros(shape[1])
            impl.higgs_terms(ga, gb, gc, ge, gv, x, 1.0, grad, pot)
        return timeit(body, repeats)

    for label, fn in [("bracket", run_bracket), ("higgs", run_higgs)]:
        t_np = fn(numpy_backend)
        t_fast = fn(_fast) if _fast is not None else float("nan")
        rows.append((label, n, M, t_np, t_fast,
                     t_np / t_fast if _fast is not None else float("nan")))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    print(f"active backend: {BACKEND}")
    print(f"{'kernel':<10}{'n':>3}{'M':>6}{'numpy [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for n in (2, 3):
        for row in bench(n, args.grid, args.repeats):
            label, nn, M, t_np, t_fast, speedup = row
            print(f"{label:<10}{nn:>3}{M:>6}{1e3 * t_np:>14.3f}"
                  f"{1e3 * t_fast:>14.3f}{speedup:>10.2f}")


if __name__ == "__main__":
    main()
