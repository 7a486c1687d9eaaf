"""Time the compiled kernels against the NumPy fallback on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from epsapprox import kernels
from epsapprox.discrepancy import canonical_structure, zorder
from epsapprox.geometry import WeightedPointSet


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    n = 256
    ix = rng.integers(0, n, n)
    iy = rng.integers(0, n, n)
    s = rng.normal(size=n)
    yield "max_abs_box n=256", lambda impl: kernels.max_abs_box(ix, iy, s, n, n, impl=impl)
    yield "max_box_2d n=256", lambda impl: kernels.max_box_2d(ix, iy, s, n, n, impl=impl)
    grid = rng.normal(size=(96, 96))
    yield "max_box_dense 96x96", lambda impl: kernels.max_box_dense(grid, impl=impl)
    inc = canonical_structure(WeightedPointSet(rng.random((256, 2))))
    order = zorder(inc.ranks)
    yield "bf_core n=256", lambda impl: kernels.bf_core(
        inc.n, inc.row_ptr, inc.row_idx, inc.pt_ptr, inc.pt_rows, inc.t, order, 64,
        inc.full_row, impl=impl)
    m = 40
    jx, jy = rng.integers(0, m, m), rng.integers(0, m, m)
    um = (np.arange(m) < m // 2).astype(np.int64)
    yield "rect_pair_table 20+20", lambda impl: kernels.rect_pair_table(
        jx, jy, um, 1 - um, m, m, m // 2, m // 2, impl=impl)
    wm, wb = um / um.sum(), (1 - um) / (1 - um).sum()
    yield "rect_stat_max 20+20", lambda impl: kernels.rect_stat_max(
        jx, jy, wm, wb, m, m, 1, 1 / 80, impl=impl)
    k = 128
    sx, sy = rng.integers(0, k, k), rng.integers(0, k, k)
    ones, half = np.ones(k), (np.arange(k) % 2).astype(np.float64)
    yield "sentinel_scan n=128", lambda impl: kernels.sentinel_scan(
        sx, sy, ones, half, k, k, 0.2 * k, 0.15 * k / 2, 0.1 * k, 0.15 * k / 2, impl=impl)
    tris = np.array([[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1], [0, 1]]], dtype=np.float64)
    coeffs = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]])
    lines = np.linspace(0, 1, 65)
    yield "cell_masses 64x64", lambda impl: kernels.cell_masses(tris, coeffs, lines, lines, impl=impl)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print(f"{'kernel':<24}{'compiled s':>12}{'pure s':>12}{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)):
        tc = _best(lambda: fn(kernels.compiled), args.repeat)
        tp = _best(lambda: fn(kernels.pure), args.repeat)
        print(f"{name:<24}{tc:>12.5f}{tp:>12.5f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
