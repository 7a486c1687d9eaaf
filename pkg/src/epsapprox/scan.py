"""Scan statistics over rectangles and sweeps over 1D signed densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import kernels
from ._pykernels import piece_roots
from .geometry import AxisRect, PLTerrain, WeightedPointSet
from .merge_reduce import ReduceConfig, epsilon_approx

VERIFY_POINTS = 1000


@dataclass(frozen=True)
class ScanResult:
    range: Any
    m_frac: float
    b_frac: float
    value: float

    def to_json(self):
        r = self.range.to_json() if hasattr(self.range, "to_json") else self.range
        return {"range": r, "m_frac": self.m_frac, "b_frac": self.b_frac, "value": self.value}


# ---------------------------------------------------------------- statistics

def clamp_kappa(n_total):
    return 1.0 / (2.0 * n_total)


def poisson_disc(m, b, kappa=0.0):
    """m ln(m/b) + (1-m) ln((1-m)/(1-b)) with both arguments clamped to [kappa, 1-kappa]."""
    m = np.clip(np.asarray(m, dtype=np.float64), kappa, 1 - kappa)
    b = np.clip(np.asarray(b, dtype=np.float64), kappa, 1 - kappa)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(m > 0, m * np.log(m / b), 0.0)
        t2 = np.where(m < 1, (1 - m) * np.log((1 - m) / (1 - b)), 0.0)
    out = t1 + t2
    return float(out) if out.ndim == 0 else out


def linear_disc(a, c, g, m, b):
    """a*m + c*b + g."""
    return a * m + c * b + g


def _poisson_grad(m, b):
    gm = np.log(m / b) - np.log((1 - m) / (1 - b))
    gb = -m / b + (1 - m) / (1 - b)
    return gm, gb


# ------------------------------------------------------------ rectangle scans

def _prepare(M, B):
    if len(M) == 0 or len(B) == 0:
        raise ValueError("M and B must be nonempty")
    if M.dim != 2 or B.dim != 2:
        raise ValueError("scan statistics are two-dimensional")
    pts = np.concatenate([M.points, B.points])
    ux, ix = np.unique(pts[:, 0], return_inverse=True)
    uy, iy = np.unique(pts[:, 1], return_inverse=True)
    nm = len(M)
    wm = np.concatenate([M.weights / M.total_weight, np.zeros(len(B))])
    wb = np.concatenate([np.zeros(nm), B.weights / B.total_weight])
    return ux, uy, ix.astype(np.int64), iy.astype(np.int64), wm, wb


def _rect(ux, uy, x1, x2, y1, y2):
    return AxisRect([ux[x1], uy[y1]], [ux[x2], uy[y2]])


def _fractions(M, B, R):
    m = float(np.sum(M.weights[R.contains_many(M.points)])) / M.total_weight
    b = float(np.sum(B.weights[R.contains_many(B.points)])) / B.total_weight
    return m, b


def _unit(P):
    return bool(np.all(P.weights == P.weights[0]))


def _as_stat(stat, kappa):
    if stat == "poisson":
        return lambda m, b: poisson_disc(m, b, kappa)
    if isinstance(stat, tuple) and len(stat) == 3:
        a, c, g = stat
        return lambda m, b: linear_disc(a, c, g, m, b)
    if callable(stat):
        return stat
    raise ValueError("stat must be 'poisson', an (a, c, g) tuple or a callable")


def max_rect_general(M, B, stat="poisson"):
    """Exact maximizer over all rectangles with sides at point coordinates.

    ``stat`` is "poisson", linear coefficients (a, c, g), or a callable of
    (m, b) fractions.  Ties go to the lexicographically first
    (x1, x2, y1, y2).
    """
    ux, uy, ix, iy, wm, wb = _prepare(M, B)
    kappa = clamp_kappa(len(M) + len(B))
    f = _as_stat(stat, kappa)
    nx, ny = len(ux), len(uy)
    if _unit(M) and _unit(B):
        nm, nb = len(M), len(B)
        um = (wm > 0).astype(np.int64)
        ub = (wb > 0).astype(np.int64)
        seen, wit = kernels.rect_pair_table(ix, iy, um, ub, nx, ny, nm, nb)
        cm, cb = np.nonzero(seen)
        vals = np.array([f(i / nm, j / nb) for i, j in zip(cm, cb)], dtype=np.float64)
        top = np.flatnonzero(vals == vals.max())
        w = wit[cm[top], cb[top]]
        k = top[np.lexsort(w.T[::-1])[0]]
        x1, x2, y1, y2 = (int(v) for v in wit[cm[k], cb[k]])
        m, b = cm[k] / nm, cb[k] / nb
        return ScanResult(_rect(ux, uy, x1, x2, y1, y2), float(m), float(b), float(f(m, b)))
    if stat == "poisson" or isinstance(stat, tuple):
        mode, p = (1, (kappa, 0.0, 0.0)) if stat == "poisson" else (0, stat)
        best, x1, x2, y1, y2, m, b = kernels.rect_stat_max(ix, iy, wm, wb, nx, ny, mode, *p)
        R = _rect(ux, uy, x1, x2, y1, y2)
        m, b = _fractions(M, B, R)
        return ScanResult(R, m, b, float(f(m, b)))
    return _enumerate(M, B, f, ux, uy, ix, iy, wm, wb)


def _enumerate(M, B, f, ux, uy, ix, iy, wm, wb):
    nx, ny = len(ux), len(uy)
    gm = np.zeros((nx, ny))
    gb = np.zeros((nx, ny))
    np.add.at(gm, (ix, iy), wm)
    np.add.at(gb, (ix, iy), wb)
    yi, yj = np.triu_indices(ny)
    best, arg = -math.inf, None
    for x1 in range(nx):
        cm = np.zeros(ny)
        cb = np.zeros(ny)
        for x2 in range(x1, nx):
            cm += gm[x2]
            cb += gb[x2]
            pm = np.concatenate(([0.0], np.cumsum(cm)))
            pb = np.concatenate(([0.0], np.cumsum(cb)))
            sm = pm[yj + 1] - pm[yi]
            sb = pb[yj + 1] - pb[yi]
            vals = np.array([f(a, c) for a, c in zip(sm, sb)])
            k = int(np.argmax(vals))
            if vals[k] > best:
                best, arg = float(vals[k]), (x1, x2, int(yi[k]), int(yj[k]))
    R = _rect(ux, uy, *arg)
    m, b = _fractions(M, B, R)
    return ScanResult(R, m, b, float(f(m, b)))


def max_rect_linear(M, B, coeffs):
    """Exact maximizer of a*m + c*b + g via a maximum-sum box sweep."""
    a, c, g = (float(v) for v in coeffs)
    ux, uy, ix, iy, wm, wb = _prepare(M, B)
    w = a * wm + c * wb
    best, x1, x2, y1, y2 = kernels.max_box_2d(ix, iy, w, len(ux), len(uy))
    R = _rect(ux, uy, x1, x2, y1, y2)
    m, b = _fractions(M, B, R)
    return ScanResult(R, m, b, float(linear_disc(a, c, g, m, b)))


def _logit(p):
    return np.log(p / (1 - p))


def _expit(z):
    return 1.0 / (1.0 + np.exp(-z))


def _tangents(nodes):
    mm, bb = np.meshgrid(nodes, nodes, indexing="ij")
    gm, gb = _poisson_grad(mm, bb)
    d0 = poisson_disc(mm, bb)
    return np.stack([gm, gb, d0 - gm * mm - gb * bb], axis=-1)


def _envelope_gap(nodes, planes, kappa):
    z = np.linspace(_logit(kappa), _logit(1 - kappa), VERIFY_POINTS)
    p = _expit(z)
    p[0], p[-1] = kappa, 1 - kappa
    zn = _logit(nodes)
    cell = np.clip(np.searchsorted(zn, z, side="right") - 1, 0, len(nodes) - 2)
    M, Bv = np.meshgrid(p, p, indexing="ij")
    CI, CJ = np.meshgrid(cell, cell, indexing="ij")
    d = poisson_disc(M, Bv, kappa)
    best = np.full(M.shape, -np.inf)
    for di in (0, 1):
        for dj in (0, 1):
            pl = planes[CI + di, CJ + dj]
            best = np.maximum(best, pl[..., 0] * M + pl[..., 1] * Bv + pl[..., 2])
    return float(np.max(d - best))


def linearize_poisson(eps, n):
    """Tangent planes whose upper envelope is within eps of d_P.

    Nodes are uniform in logit space over [kappa, 1 - kappa] with
    kappa = 1/(2n); their number per axis goes 4, 7, 13, ... until a
    10^6-point check using only each point's four surrounding tangents
    passes.  Returns an (N*N, 3) array of (a, c, g).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    kappa = clamp_kappa(n)
    N = 4
    while True:
        nodes = _expit(np.linspace(_logit(kappa), _logit(1 - kappa), N))
        nodes[0], nodes[-1] = kappa, 1 - kappa
        planes = _tangents(nodes)
        if _envelope_gap(nodes, planes, kappa) <= eps:
            return planes.reshape(-1, 3)
        N = 2 * N - 1


def max_rect_poisson_approx(M, B, eps, cfg=None):
    """Rectangle within eps of the best Poisson scan value.

    M and B are each compressed at eps/2, every tangent plane of an eps/2
    linearization is maximized exactly on the compressed sets, and the
    candidate with the largest true statistic on the original data wins.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    kappa = clamp_kappa(len(M) + len(B))
    base = cfg if cfg is not None else ReduceConfig(0.5, check_decrease=False)
    Mc, _ = epsilon_approx(M, base.with_eps(eps / 2))
    Bc, _ = epsilon_approx(B, base.with_eps(eps / 2))
    planes = linearize_poisson(eps / 2, len(M) + len(B))
    best = None
    seen = set()
    for a, c, g in planes:
        r = max_rect_linear(Mc, Bc, (a, c, g)).range
        key = (tuple(r.lo), tuple(r.hi))
        if key in seen:
            continue
        seen.add(key)
        m, b = _fractions(M, B, r)
        v = float(poisson_disc(m, b, kappa))
        if best is None or v > best.value:
            best = ScanResult(r, m, b, v)
    return best


# --------------------------------------------------------- 1D signed densities

@dataclass(frozen=True, eq=False)
class PiecewisePoly1D:
    """Piecewise quadratic c0 + c1 u + c2 u^2 with u = x - (left break of the piece).

    Local offsets keep integrals accurate far from the origin.
    """

    breaks: np.ndarray
    coeffs: np.ndarray

    def __init__(self, breaks, coeffs):
        br = np.array(breaks, dtype=np.float64).ravel()
        co = np.array(coeffs, dtype=np.float64).reshape(-1, 3)
        if len(br) != len(co) + 1 or len(co) == 0:
            raise ValueError("need len(breaks) == len(coeffs) + 1 >= 2")
        if np.any(np.diff(br) <= 0):
            raise ValueError("breaks must increase strictly")
        object.__setattr__(self, "breaks", br)
        object.__setattr__(self, "coeffs", co)

    @classmethod
    def from_points(cls, xs, ys):
        """Piecewise-linear interpolant of (xs, ys)."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        slope = np.diff(ys) / np.diff(xs)
        return cls(xs, np.column_stack([ys[:-1], slope, np.zeros(len(slope))]))

    def __len__(self):
        return len(self.coeffs)

    def piece(self, x):
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self) - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        k = self.piece(x)
        c = self.coeffs[k]
        u = x - self.breaks[k]
        return c[..., 0] + u * (c[..., 1] + u * c[..., 2])

    def _anti(self, k, u):
        c = self.coeffs[k]
        return u * (c[..., 0] + u * (c[..., 1] / 2 + u * c[..., 2] / 3))

    def piece_integral(self, k, a, b):
        """Integral of piece k over [a, b]."""
        a0 = self.breaks[k]
        return self._anti(k, b - a0) - self._anti(k, a - a0)

    def integral(self):
        k = np.arange(len(self))
        return float(np.sum(self._anti(k, np.diff(self.breaks))))

    def roots(self):
        """Interior zeros of each piece as (N, 2) with NaN where absent, sorted per row."""
        return piece_roots(self.breaks, self.coeffs)

    def _shifted(self, x):
        """Coefficients of the pieces containing x, re-centred at x."""
        k = self.piece(x)
        c = self.coeffs[k]
        d = x - self.breaks[k]
        return np.column_stack([c[:, 0] + d * (c[:, 1] + d * c[:, 2]), c[:, 1] + 2 * d * c[:, 2], c[:, 2]])

    def _merge(self, other, sign):
        br = np.union1d(self.breaks, other.breaks)
        br = br[(br >= max(self.breaks[0], other.breaks[0])) & (br <= min(self.breaks[-1], other.breaks[-1]))]
        left = br[:-1]
        return PiecewisePoly1D(br, self._shifted(left) + sign * other._shifted(left))

    def __sub__(self, other):
        return self._merge(other, -1.0)

    def __add__(self, other):
        return self._merge(other, 1.0)


def terrain_max_halfspace(f):
    """Threshold t maximizing the integral of f over [start, t].

    Candidates are the domain ends and the zeros of f; ties go to the
    smallest threshold.  Returns (t, value).
    """
    value, _, t = kernels.sweep_1d(f.breaks, f.coeffs, 0)
    return t, value


def terrain_max_slab(f):
    """Interval [l, r] maximizing the integral of f over it.

    Maximum-sum run over the integrals between consecutive zeros.  An empty
    interval at the left end (value 0) wins when f is nowhere positive.
    Returns ((l, r), value).
    """
    value, l, r = kernels.sweep_1d(f.breaks, f.coeffs, 1)
    return (l, r), value


def _cross_section(tris, coeffs, s, axis):
    """Integral of each triangle's height along the line {x_axis = s}."""
    other = 1 - axis
    u = tris[:, :, axis]
    v = tris[:, :, other]
    lo = np.full(len(tris), np.inf)
    hi = np.full(len(tris), -np.inf)
    for e in range(3):
        ua, ub = u[:, e], u[:, (e + 1) % 3]
        va, vb = v[:, e], v[:, (e + 1) % 3]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (s - ua) / (ub - ua)
            y = va + t * (vb - va)
        ok = (ub != ua) & (t >= 0) & (t <= 1)
        lo = np.where(ok, np.minimum(lo, y), lo)
        hi = np.where(ok, np.maximum(hi, y), hi)
    valid = hi > lo
    lo = np.where(valid, lo, 0.0)
    hi = np.where(valid, hi, 0.0)
    a = coeffs[:, axis]
    b = coeffs[:, other]
    c = coeffs[:, 2]
    val = (a * s + c) * (hi - lo) + b * (hi * hi - lo * lo) / 2
    return float(np.sum(np.where(valid, val, 0.0)))


def project_terrain(T, axis=0):
    """Integral of the terrain over lines {x_axis = s}, as a piecewise quadratic in s."""
    if not isinstance(T, PLTerrain):
        raise TypeError("expected a PLTerrain")
    tris = np.asarray(T.triangles, dtype=np.float64)
    coeffs = np.asarray(T.coeffs, dtype=np.float64)
    br = np.unique(tris[:, :, axis])
    rows = []
    umin, umax = tris[:, :, axis].min(axis=1), tris[:, :, axis].max(axis=1)
    for lo, hi in zip(br[:-1], br[1:]):
        h = hi - lo
        # only triangles spanning the slab, so edges at lo and hi are not counted twice
        span = (umin <= lo) & (umax >= hi)
        y0, y1, y2 = (_cross_section(tris[span], coeffs[span], s, axis) for s in (lo, lo + h / 2, hi))
        d2 = 2 * (y2 - 2 * y1 + y0) / (h * h)
        d1 = (4 * y1 - 3 * y0 - y2) / h
        rows.append([y0, d1, d2])
    return PiecewisePoly1D(br, np.array(rows))
