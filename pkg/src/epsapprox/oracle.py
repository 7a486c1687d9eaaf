"""Brute-force ground truth: approximation error and discrepancy.

Discrete suprema are exact: every closed range is equivalent to one whose
boundaries sit at point projections, so a maximum-sum box search over the
compressed coordinate grid enumerates all of them.  Continuous measures use
an interleaved grid of lines (zero width) and open cells, which also captures
one-sided limits at point coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import kernels
from .geometry import (AxisRect, KOrientedRange, PLTerrain, RangeFamily, WeightedPointSet,
                       box_linear_integral, project, terrain_measure)

MAX_K = 3


@dataclass(frozen=True)
class OracleReport:
    max_error: float
    witness_range: Any
    ranges_checked: int

    def to_json(self):
        w = self.witness_range
        return {"max_error": self.max_error,
                "witness_range": w.to_json() if hasattr(w, "to_json") else w,
                "ranges_checked": self.ranges_checked}


def _family(family, dim):
    if family is None or family == "rect":
        return RangeFamily.rect(dim)
    return family


# ------------------------------------------------------------- discrete

def _max_signed_box(pr, s):
    """Max of sum(s) over closed boxes in projected coordinates.

    Returns (value, lo, hi, count of distinct boxes).
    """
    k = pr.shape[1]
    vals, inv = [], []
    for j in range(k):
        u, iv = np.unique(pr[:, j], return_inverse=True)
        vals.append(u)
        inv.append(iv.astype(np.int64))
    checked = 1
    for u in vals:
        checked *= len(u) * (len(u) + 1) // 2
    if k == 1:
        b, x0, x1, _, _ = kernels.max_box_2d(inv[0], np.zeros(len(s), np.int64), s, len(vals[0]), 1)
        return b, [vals[0][x0]], [vals[0][x1]], checked
    if k == 2:
        b, x0, x1, y0, y1 = kernels.max_box_2d(inv[0], inv[1], s, len(vals[0]), len(vals[1]))
        return b, [vals[0][x0], vals[1][y0]], [vals[0][x1], vals[1][y1]], checked
    best = -math.inf
    arg = None
    nz = len(vals[2])
    for z0 in range(nz):
        for z1 in range(z0, nz):
            sel = (inv[2] >= z0) & (inv[2] <= z1)
            b, x0, x1, y0, y1 = kernels.max_box_2d(inv[0][sel], inv[1][sel], s[sel],
                                                   len(vals[0]), len(vals[1]))
            if b > best:
                best = b
                arg = ([vals[0][x0], vals[1][y0], vals[2][z0]],
                       [vals[0][x1], vals[1][y1], vals[2][z1]])
    return best, arg[0], arg[1], checked


def _max_abs_box(points, s, family):
    """Range maximizing |sum s|; ties go to the side where s is negative."""
    if family.k > MAX_K:
        raise ValueError(f"oracle supports at most {MAX_K} directions")
    pr = project(points, family.dirs)
    bp, lop, hip, checked = _max_signed_box(pr, s)
    bn, lon, hin, _ = _max_signed_box(pr, -s)
    if bp > bn:
        return family.make_range(np.array(lop), np.array(hip)), checked
    return family.make_range(np.array(lon), np.array(hin)), checked


def range_error(P, D, R):
    """|w(P in R)/w(P) - w(D in R)/w(D)| for one closed range."""
    fp = float(np.sum(P.weights[R.contains_many(P.points)])) / P.total_weight if len(P) else 0.0
    fd = float(np.sum(D.weights[R.contains_many(D.points)])) / D.total_weight if len(D) else 0.0
    return abs(fp - fd)


def eps_error_discrete(P, D, family=None):
    """Exact max over closed ranges of the weighted fraction gap."""
    if P.dim != D.dim:
        raise ValueError("dimension mismatch")
    fam = _family(family, D.dim)
    if fam.dim != D.dim:
        raise ValueError("family dimension mismatch")
    pts = np.concatenate([P.points, D.points])
    s = np.concatenate([P.weights / P.total_weight if len(P) else np.zeros(0),
                        -D.weights / D.total_weight if len(D) else np.zeros(0)])
    if len(pts) == 0:
        raise ValueError("both sets are empty")
    R, checked = _max_abs_box(pts, s, fam)
    return OracleReport(range_error(P, D, R), R, checked)


def signed_range_sum(chi, X, R):
    return abs(int(np.sum(np.asarray(chi)[R.contains_many(X.points)])))


def comb_disc(chi, X, family=None):
    """max over ranges of |sum of chi inside|."""
    signs = np.asarray(getattr(chi, "signs", chi), dtype=np.float64)
    if len(signs) != len(X):
        raise ValueError("coloring length differs from point count")
    fam = _family(family, X.dim)
    R, checked = _max_abs_box(X.points, signs, fam)
    return OracleReport(float(signed_range_sum(signs, X, R)), R, checked)


# ----------------------------------------------------------- continuous

def _bin(coords, lines):
    """Element index of each coordinate on the interleaved axis."""
    i = np.searchsorted(lines, coords, side="left")
    on = (i < len(lines)) & (lines[np.minimum(i, len(lines) - 1)] == coords)
    return np.where(on, 2 * i, 2 * i - 1)


def _element_rect(lines_x, lines_y, ex0, ex1, ey0, ey1, P):
    """Closed rectangle realizing an element box, nudging open sides inward."""

    def side(lines, e, hi_side, coords):
        if e % 2 == 0:
            return lines[e // 2]
        v = lines[(e + 1) // 2] if hi_side else lines[(e - 1) // 2]
        if coords is not None and np.any(coords == v):
            v = np.nextafter(v, -math.inf if hi_side else math.inf)
        return v

    xs = P.points[:, 0] if len(P) else None
    ys = P.points[:, 1] if len(P) else None
    lo = [side(lines_x, ex0, False, xs), side(lines_y, ey0, False, ys)]
    hi = [side(lines_x, ex1, True, xs), side(lines_y, ey1, True, ys)]
    return AxisRect(lo, hi)


def eps_error_measure(P, lines_x, lines_y, cell_mass, total=None):
    """Grid-restricted sup of |mu(R)/M - w(P in R)/W| for a continuous measure.

    ``cell_mass[i, j]`` is the measure of the open cell between consecutive
    x lines i, i+1 and y lines j, j+1.  Rectangles range over all boxes of
    lines and cells, so one-sided limits at each line are included.
    Returns (value, element box, grid) where value is the kernel maximum.
    """
    lx = np.asarray(lines_x, dtype=np.float64)
    ly = np.asarray(lines_y, dtype=np.float64)
    M = float(np.sum(cell_mass)) if total is None else float(total)
    ex = 2 * len(lx) - 1
    ey = 2 * len(ly) - 1
    grid = np.zeros((ex, ey))
    if M > 0:
        grid[1::2, 1::2] = cell_mass / M
    if len(P):
        if (np.any(P.points[:, 0] < lx[0]) or np.any(P.points[:, 0] > lx[-1])
                or np.any(P.points[:, 1] < ly[0]) or np.any(P.points[:, 1] > ly[-1])):
            raise ValueError("points outside the oracle grid")
        bx = _bin(P.points[:, 0], lx)
        by = _bin(P.points[:, 1], ly)
        np.add.at(grid, (bx, by), -P.weights / P.total_weight)
    bp = kernels.max_box_dense(grid)
    bn = kernels.max_box_dense(-grid)
    best = bp if bp[0] >= bn[0] else bn
    checked = (ex * (ex + 1) // 2) * (ey * (ey + 1) // 2)
    return best, checked


def _grid_lines(lo, hi, resolution, extra):
    parts = [np.linspace(lo, hi, resolution + 1)]
    if extra is not None and len(extra):
        parts.append(np.asarray(extra, dtype=np.float64))
    u = np.unique(np.concatenate(parts))
    return u[(u >= lo) & (u <= hi)]


def _report_measure(P, lx, ly, masses, total, measure_fn):
    (val, ex0, ex1, ey0, ey1), checked = eps_error_measure(P, lx, ly, masses, total)
    R = _element_rect(lx, ly, ex0, ex1, ey0, ey1, P)
    return OracleReport(measure_range_error(P, R, measure_fn, total), R, checked)


def measure_range_error(P, R, measure_fn, total):
    """|mu(R)/M - w(P in R)/W| for one closed rectangle."""
    mu = measure_fn(R) / total if total > 0 else 0.0
    fp = float(np.sum(P.weights[R.contains_many(P.points)])) / P.total_weight if len(P) else 0.0
    return abs(mu - fp)


def eps_error_terrain(P, T, resolution=64, max_point_lines=512):
    """Grid-restricted error of P against a piecewise-linear terrain.

    Candidate boundaries: triangle vertex coordinates, a uniform grid of
    ``resolution`` cells per axis, and P's coordinates when P is small.
    The result is a lower bound on the true sup that grows with refinement.
    """
    box = T.base_box
    vx = T.triangles[:, :, 0].ravel()
    vy = T.triangles[:, :, 1].ravel()
    px = P.points[:, 0] if 0 < len(P) <= max_point_lines else None
    py = P.points[:, 1] if 0 < len(P) <= max_point_lines else None
    lx = _grid_lines(box.lo[0], box.hi[0], resolution,
                     vx if px is None else np.concatenate([vx, px]))
    ly = _grid_lines(box.lo[1], box.hi[1], resolution,
                     vy if py is None else np.concatenate([vy, py]))
    masses = kernels.cell_masses(T.triangles, T.coeffs, lx, ly)
    total = float(np.sum(masses))
    if total <= 0:
        return OracleReport(0.0 if len(P) == 0 else 1.0, box, 0)
    return _report_measure(P, lx, ly, masses, total, lambda R: terrain_measure(T, R))


def _gauss_legendre_cells(fn, lx, ly, q=6):
    """Cell integrals of a smooth density by tensor Gauss-Legendre."""
    t, w = np.polynomial.legendre.leggauss(q)
    cx = 0.5 * (lx[1:] + lx[:-1])
    hx = 0.5 * (lx[1:] - lx[:-1])
    cy = 0.5 * (ly[1:] + ly[:-1])
    hy = 0.5 * (ly[1:] - ly[:-1])
    out = np.zeros((len(cx), len(cy)))
    for a in range(q):
        xa = cx + hx * t[a]
        for b in range(q):
            yb = cy + hy * t[b]
            X, Y = np.meshgrid(xa, yb, indexing="ij")
            val = fn(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
            out += w[a] * w[b] * val
    return out * hx[:, None] * hy[None, :]


def eps_error_density(P, height, box, resolution=128, max_point_lines=512, q=6):
    """Grid-restricted error of P against a smooth density on an axis box."""
    px = P.points[:, 0] if 0 < len(P) <= max_point_lines else None
    py = P.points[:, 1] if 0 < len(P) <= max_point_lines else None
    lx = _grid_lines(box.lo[0], box.hi[0], resolution, px)
    ly = _grid_lines(box.lo[1], box.hi[1], resolution, py)
    masses = _gauss_legendre_cells(height, lx, ly, q)
    total = float(np.sum(masses))

    def mfn(R):
        r = R.intersect(box)
        if r is None:
            return 0.0
        sub_x = np.linspace(r.lo[0], r.hi[0], 9)
        sub_y = np.linspace(r.lo[1], r.hi[1], 9)
        return float(np.sum(_gauss_legendre_cells(height, sub_x, sub_y, q)))

    return _report_measure(P, lx, ly, masses, total, mfn)


def gaussian_rect_mass(mean, sigmas, R):
    """Exact Gaussian mass of an axis rectangle (erf product)."""
    out = 1.0
    for a in range(2):
        s = sigmas[a] * math.sqrt(2.0)
        out *= 0.5 * (math.erf((R.hi[a] - mean[a]) / s) - math.erf((R.lo[a] - mean[a]) / s))
    return out


def eps_error_gaussian(P, mean, sigmas, resolution=128, reach=6.0, max_point_lines=512):
    """Grid-restricted error of P against an axis-aligned Gaussian.

    The grid spans ``reach`` standard deviations; mass beyond it is left
    out of the cells but kept in the normalizing total of 1.
    """
    mean = np.asarray(mean, dtype=np.float64)
    sig = np.asarray(sigmas, dtype=np.float64)
    lo = mean - reach * sig
    hi = mean + reach * sig
    if len(P):
        lo = np.minimum(lo, P.points.min(axis=0))
        hi = np.maximum(hi, P.points.max(axis=0))
    px = P.points[:, 0] if 0 < len(P) <= max_point_lines else None
    py = P.points[:, 1] if 0 < len(P) <= max_point_lines else None
    lx = _grid_lines(lo[0], hi[0], resolution, px)
    ly = _grid_lines(lo[1], hi[1], resolution, py)

    def cdf(v, a):
        return 0.5 * (1.0 + np.array([math.erf((t - mean[a]) / (sig[a] * math.sqrt(2.0))) for t in v]))

    masses = np.outer(np.diff(cdf(lx, 0)), np.diff(cdf(ly, 1)))
    return _report_measure(P, lx, ly, masses, 1.0,
                           lambda R: gaussian_rect_mass(mean, sig, R))


def lebesgue_disc(P, family="corner", density=None):
    """Lebesgue discrepancy of P in units of one point (n = |P|).

    The domain is the unit square, or ``density.rect`` with the linear
    density of a ``LinearPatch``; weights of P are normalized to total n.
    ``family`` is "corner" (anchored at the domain's lower-left) or "rect".
    """
    if P.dim != 2:
        raise ValueError("lebesgue_disc is two-dimensional")
    if density is None:
        lo = np.zeros(2)
        hi = np.ones(2)
        coeffs = (0.0, 0.0, 1.0)
    else:
        lo, hi = density.rect.lo, density.rect.hi
        coeffs = density.coeffs
    if np.any(P.points < lo - 1e-12) or np.any(P.points > hi + 1e-12):
        raise ValueError("points outside the domain")
    n = len(P)
    total = box_linear_integral(lo, hi, coeffs)
    w = P.weights * (n / P.total_weight)

    def mu(rlo, rhi):
        return box_linear_integral(rlo, rhi, coeffs) * n / total

    if family == "corner":
        ux = np.unique(np.concatenate([P.points[:, 0], [hi[0]]]))
        uy = np.unique(np.concatenate([P.points[:, 1], [hi[1]]]))
        ix = np.searchsorted(ux, P.points[:, 0])
        iy = np.searchsorted(uy, P.points[:, 1])
        H = np.zeros((len(ux), len(uy)))
        np.add.at(H, (ix, iy), w)
        incl = H.cumsum(axis=0).cumsum(axis=1)
        excl = np.zeros_like(incl)
        excl[1:, 1:] = incl[:-1, :-1]
        a, b, c = coeffs
        X, Y = np.meshgrid(ux, uy, indexing="ij")
        meas = (a * (X * X - lo[0] ** 2) * (Y - lo[1]) / 2.0 + b * (Y * Y - lo[1] ** 2) * (X - lo[0]) / 2.0
                + c * (X - lo[0]) * (Y - lo[1])) * n / total
        over = incl - meas
        under = meas - excl
        i1 = np.unravel_index(np.argmax(over), over.shape)
        i2 = np.unravel_index(np.argmax(under), under.shape)
        if over[i1] >= under[i2]:
            return OracleReport(float(over[i1]), {"corner": [float(ux[i1[0]]), float(uy[i1[1]])],
                                                  "closed": True}, int(over.size * 2))
        return OracleReport(float(under[i2]), {"corner": [float(ux[i2[0]]), float(uy[i2[1]])],
                                               "closed": False}, int(over.size * 2))
    if family != "rect":
        raise ValueError("family must be 'corner' or 'rect'")
    lx = np.unique(np.concatenate([P.points[:, 0], [lo[0], hi[0]]]))
    ly = np.unique(np.concatenate([P.points[:, 1], [lo[1], hi[1]]]))
    X0, Y0 = np.meshgrid(lx[:-1], ly[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(lx[1:], ly[1:], indexing="ij")
    a, b, c = coeffs
    cells = (a * (X1 * X1 - X0 * X0) * (Y1 - Y0) / 2.0 + b * (Y1 * Y1 - Y0 * Y0) * (X1 - X0) / 2.0
             + c * (X1 - X0) * (Y1 - Y0))
    Pn = WeightedPointSet(P.points, w)
    (val, ex0, ex1, ey0, ey1), checked = eps_error_measure(Pn, lx, ly, cells, total)
    R = _element_rect(lx, ly, ex0, ex1, ey0, ey1, Pn)
    inside = R.contains_many(P.points)
    value = abs(mu(np.maximum(R.lo, lo), np.minimum(R.hi, hi)) - float(np.sum(w[inside])))
    return OracleReport(value, R, checked)


def mc_check(T, R, samples=10**6, seed=0):
    """Monte Carlo estimate of the terrain measure in R with its standard error."""
    if samples < 10**4:
        raise ValueError("use at least 10^4 samples")
    box = R.intersect(T.base_box)
    if box is None or box.area == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    pts = box.lo + rng.random((samples, 2)) * (box.hi - box.lo)
    h = np.nan_to_num(T.height(pts), nan=0.0)
    area = box.area
    est = area * float(np.mean(h))
    err = area * float(np.std(h, ddof=1)) / math.sqrt(samples)
    return est, err
