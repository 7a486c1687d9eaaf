"""Deterministic low-discrepancy point sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import ConvexPolygon, DirectionSet, LinearPatch, WeightedPointSet, clip, project

PRIMES = (2, 3, 5, 7, 11, 13)
PROBE_GRID = 16
M_MAX = 1 << 20


class DegenerateRegionError(ValueError):
    """The region is too thin for any lattice point; subdivide it."""


def _check_pow2(n):
    if n < 1 or (n & (n - 1)):
        raise ValueError("n must be a power of two")


def bit_reversal(i, n):
    """Bit-reversed i over log2(n) bits, as a fraction of n."""
    _check_pow2(n)
    if not 0 <= i < n:
        raise ValueError("index out of range")
    L = n.bit_length() - 1
    r = int(format(i, f"0{L}b")[::-1], 2) if L else 0
    return r / n


def bit_reversal_array(n):
    """Integer bit reversals of 0..n-1 over log2(n) bits."""
    _check_pow2(n)
    L = n.bit_length() - 1
    i = np.arange(n, dtype=np.int64)
    r = np.zeros(n, dtype=np.int64)
    for b in range(L):
        r |= ((i >> b) & 1) << (L - 1 - b)
    return r


def van_der_corput(n):
    """The n points (i/n, b(i)) with unit weights."""
    r = bit_reversal_array(n)
    return WeightedPointSet(np.column_stack([np.arange(n) / n, r / n]))


def _positive_on(w, alpha, gamma):
    return gamma >= 0 and alpha * w + gamma > 0


def _delta(w, alpha, gamma, t):
    c = t * (0.5 * alpha * w * w + gamma * w)
    den = gamma + np.sqrt(gamma * gamma + 2.0 * alpha * c)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(c > 0, 2.0 * c / den, 0.0)
    return np.where(t == 1.0, w, np.clip(d, 0.0, w))


def delta_stretch(w, alpha, gamma, i, n):
    """Root in [0, w] of (alpha/2) D^2 + gamma D = (i/n)((alpha/2) w^2 + gamma w)."""
    if w <= 0 or not _positive_on(w, alpha, gamma):
        raise ValueError("alpha*x + gamma must be nonnegative on [0, w] and not vanish")
    t = np.asarray(i, dtype=np.float64) / n
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("need 0 <= i <= n")
    d = _delta(w, alpha, gamma, t)
    return float(d) if np.ndim(d) == 0 else d


def stretched_vdc(n, patch):
    """Van der Corput points pushed through the patch density's inverse CDF.

    x follows the marginal density of the patch and y the conditional
    density given x, so each elementary dyadic cell of the unit square maps
    to a region of mass exactly 1/n of the patch.  Every point carries
    weight mass/n.
    """
    if not isinstance(patch, LinearPatch):
        raise TypeError("patch must be a LinearPatch")
    _check_pow2(n)
    (x0, y0), (x1, y1) = patch.rect.lo, patch.rect.hi
    a, b, c = patch.coeffs
    w, l = x1 - x0, y1 - y0
    g0 = c + a * x0 + b * y0
    i = np.arange(n)
    u = np.atleast_1d(delta_stretch(w, a, g0 + 0.5 * b * l, i, n))
    r = bit_reversal_array(n)
    v = _delta(l, b, g0 + a * u, r / n)
    pts = np.column_stack([x0 + u, y0 + v])
    pts = np.minimum(np.maximum(pts, patch.rect.lo), patch.rect.hi)
    return WeightedPointSet(pts, np.full(n, patch.mass / n))


@dataclass(frozen=True)
class LatticeSpec:
    """m lattice points with irrational multipliers alpha (default: frac of sqrt primes)."""

    m: int
    alpha: tuple = ()

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        al = tuple(float(a) % 1.0 for a in self.alpha)
        if any(a == 0.0 for a in al):
            raise ValueError("multipliers must not be integers")
        object.__setattr__(self, "alpha", al)

    @classmethod
    def default(cls, m, dim):
        return cls(m, default_alpha(dim))


def default_alpha(dim):
    if not 1 <= dim <= len(PRIMES) + 1:
        raise ValueError("unsupported dimension")
    return tuple(math.sqrt(p) % 1.0 for p in PRIMES[:dim - 1])


def _lattice_coords(m, alpha):
    i = np.arange(m, dtype=np.float64)
    cols = [np.arange(m) / m]
    for a in alpha:
        cols.append(np.mod(i * a, 1.0))
    return np.column_stack(cols)


def irrational_lattice(spec, dim):
    """Points (i/m, {a_1 i}, ..., {a_(d-1) i}) with unit weights."""
    alpha = spec.alpha if spec.alpha else default_alpha(dim)
    if len(alpha) != dim - 1:
        raise ValueError("need dim - 1 multipliers")
    return WeightedPointSet(_lattice_coords(spec.m, alpha), dim=dim)


def _max_abs_grid(diff):
    """Largest |sum| over index boxes of a 1-, 2- or 3-way grid."""
    if diff.ndim == 1:
        diff = diff[:, None]
    if diff.ndim == 2:
        return max(kernels.max_box_dense(diff)[0], kernels.max_box_dense(-diff)[0], 0.0)
    best = 0.0
    nz = diff.shape[2]
    for z0 in range(nz):
        acc = np.zeros(diff.shape[:2])
        for z1 in range(z0, nz):
            acc = acc + diff[:, :, z1]
            best = max(best, kernels.max_box_dense(acc)[0], kernels.max_box_dense(-acc)[0])
    return best


class _PolygonProbe:
    """Grid of slab cells over a polygon, for count-vs-area checks."""

    def __init__(self, Q, dirs, G=PROBE_GRID):
        self.dirs = dirs
        pr = project(Q.vertices, dirs)
        self.edges = [np.linspace(pr[:, j].min(), pr[:, j].max(), G + 1) for j in range(dirs.k)]
        shape = (G,) * dirs.k
        self.area = np.zeros(shape)
        for cell in np.ndindex(*shape):
            poly = Q
            for j, g in enumerate(cell):
                u = dirs.dirs[j]
                poly = clip(poly, (u, self.edges[j][g + 1]))
                if poly is None:
                    break
                poly = clip(poly, (-u, -self.edges[j][g]))
                if poly is None:
                    break
            if poly is not None:
                self.area[cell] = poly.area
        self.total = float(self.area.sum())

    def proxy(self, pts):
        if len(pts) == 0:
            return 1.0
        pr = project(pts, self.dirs)
        G = len(self.edges[0]) - 1
        bins = [np.clip(np.searchsorted(e, pr[:, j], side="right") - 1, 0, G - 1)
                for j, e in enumerate(self.edges)]
        counts = np.zeros(self.area.shape)
        np.add.at(counts, tuple(bins), 1.0)
        return _max_abs_grid(counts / len(pts) - self.area / self.total)


def lattice_sample_polytope(Q, eps, dirs=None, m0=64, m_max=M_MAX, return_info=False):
    """Lattice points inside Q, each weighted area(Q)/count.

    m doubles from m0 until the count-vs-area gap over the probe grid of
    slab cells is at most eps/2, or m_max is reached.
    """
    if not isinstance(Q, ConvexPolygon):
        try:
            Q = ConvexPolygon(Q)
        except ValueError as exc:
            raise DegenerateRegionError(str(exc)) from None
    if Q.area <= 0:
        raise DegenerateRegionError("zero-area region")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    dirs = DirectionSet.axes(2) if dirs is None else dirs
    probe = _PolygonProbe(Q, dirs)
    if probe.total <= 0:
        raise DegenerateRegionError("region has no measurable area")
    m = m0
    while True:
        pts = _lattice_coords(m, default_alpha(2))
        inside = pts[Q.contains_many(pts)]
        px = probe.proxy(inside)
        if (len(inside) and px <= eps / 2) or 2 * m > m_max:
            break
        m *= 2
    if len(inside) == 0:
        raise DegenerateRegionError("no lattice point inside the region")
    P = WeightedPointSet(inside, np.full(len(inside), Q.area / len(inside)))
    if return_info:
        return P, px, m
    return P


def lattice_sample_prism(tri, coeffs, eps, m0=64, m_max=M_MAX, G=PROBE_GRID):
    """Sample the solid under a linear height over a triangle.

    A 3D irrational lattice in the triangle's bounding prism is clipped to
    the solid and projected to the plane; each point weighs mass/count.
    m doubles until the probe gap is at most eps.  Returns (points, weight, proxy, m) where proxy is the count-vs-mass gap
    over the probe grid of rectangles.
    """
    tri = np.asarray(tri, dtype=np.float64)
    a, b, c = (float(t) for t in coeffs)
    hv = a * tri[:, 0] + b * tri[:, 1] + c
    top = float(hv.max())
    if top <= 0:
        return np.zeros((0, 2)), 0.0, 0.0, 0
    lo, hi = tri.min(axis=0), tri.max(axis=0)
    xs = np.linspace(lo[0], hi[0], G + 1)
    ys = np.linspace(lo[1], hi[1], G + 1)
    mass = kernels.cell_masses(tri[None], np.array([[a, b, c]]), xs, ys)
    total = float(mass.sum())
    if total <= 0:
        return np.zeros((0, 2)), 0.0, 0.0, 0
    poly = ConvexPolygon(tri)
    m = m0
    while True:
        L = _lattice_coords(m, default_alpha(3))
        p = lo + L[:, :2] * (hi - lo)
        z = L[:, 2] * top
        ok = poly.contains_many(p) & (z <= a * p[:, 0] + b * p[:, 1] + c)
        pts = p[ok]
        if len(pts):
            bx = np.clip(np.searchsorted(xs, pts[:, 0], side="right") - 1, 0, G - 1)
            by = np.clip(np.searchsorted(ys, pts[:, 1], side="right") - 1, 0, G - 1)
            counts = np.zeros((G, G))
            np.add.at(counts, (bx, by), 1.0)
            px = _max_abs_grid(counts / len(pts) - mass / total)
        else:
            px = 1.0
        if (len(pts) and px <= eps) or 2 * m > m_max:
            break
        m *= 2
    if len(pts) == 0:
        raise DegenerateRegionError("no lattice point under the triangle")
    return pts, total / len(pts), px, m
