"""Kernel backend selection.

The compiled extension is used when importable; set ``EPSAPPROX_PURE=1`` to
force the NumPy fallback.  ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels as pure

compiled = None
if os.environ.get("EPSAPPROX_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # pragma: no cover - depends on the build
        compiled = None

_impl = compiled if compiled is not None else pure
BACKEND = "compiled" if compiled is not None else "pure"


def _i64(a):
    return np.require(a, dtype=np.int64, requirements=["C", "W"])


def _f64(a):
    return np.require(a, dtype=np.float64, requirements=["C", "W"])


def max_box_2d(ix, iy, w, nx, ny, impl=None):
    return (impl or _impl).max_box_2d(_i64(ix), _i64(iy), _f64(w), int(nx), int(ny))


def max_abs_box(ix, iy, w, nx, ny, impl=None):
    return float((impl or _impl).max_abs_box(_i64(ix), _i64(iy), _f64(w), int(nx), int(ny)))


def max_box_dense(grid, impl=None):
    return (impl or _impl).max_box_dense(_f64(grid))


def bf_core(n, row_ptr, row_idx, pt_ptr, pt_rows, t, order, window, full_row, impl=None):
    return (impl or _impl).bf_core(int(n), _i64(row_ptr), _i64(row_idx), _i64(pt_ptr),
                                   _i64(pt_rows), int(t), _i64(order), int(window),
                                   int(full_row))


def rect_pair_table(ix, iy, um, ub, nx, ny, nm, nb, impl=None):
    return (impl or _impl).rect_pair_table(_i64(ix), _i64(iy), _i64(um), _i64(ub),
                                           int(nx), int(ny), int(nm), int(nb))


def rect_stat_max(ix, iy, wm, wb, nx, ny, mode, p0, p1=0.0, p2=0.0, impl=None):
    return (impl or _impl).rect_stat_max(_i64(ix), _i64(iy), _f64(wm), _f64(wb), int(nx),
                                         int(ny), int(mode), float(p0), float(p1), float(p2))


def cell_masses(tris, coeffs, xs, ys, impl=None):
    return (impl or _impl).cell_masses(_f64(tris), _f64(coeffs), _f64(xs), _f64(ys))


def sentinel_scan(ix, iy, ind, inp, nx, ny, need_d, need_p, thr_d, thr_p, impl=None):
    return (impl or _impl).sentinel_scan(_i64(ix), _i64(iy), _f64(ind), _f64(inp), int(nx),
                                         int(ny), float(need_d), float(need_p), float(thr_d),
                                         float(thr_p))


def sweep_1d(breaks, coeffs, mode, impl=None):
    value, left, right = (impl or _impl).sweep_1d(_f64(breaks), _f64(coeffs), int(mode))
    return float(value), float(left), float(right)
