"""Approximations of terrain measures: piecewise-linear, smooth and Gaussian."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Optional

import numpy as np

from .geometry import AxisRect, ConvexPolygon, LinearPatch, WeightedPointSet, integrate_linear
from .lowdisc import lattice_sample_prism, stretched_vdc
from .merge_reduce import ApproxCertificate, LogEntry, ReduceConfig, weighted_epsilon_approx

VERIFY_GRID = 16
PROBE_GRID = 32
MAX_PATCHES = 1 << 18
MAX_SAMPLE = 1 << 22
SHUFFLE_SEED = 0


def _mixed(U):
    """Fixed shuffle so reduction blocks span the whole domain."""
    return U.subset(np.random.default_rng(SHUFFLE_SEED).permutation(len(U)))


# ------------------------------------------------------------ piecewise linear

@dataclass(frozen=True, eq=False)
class TerrainPiece:
    """One triangle of a terrain with its plane a*x + b*y + c."""

    vertices: np.ndarray
    coeffs: tuple

    @property
    def polygon(self):
        return ConvexPolygon(self.vertices, check=False)

    @property
    def mass(self):
        return integrate_linear(self.polygon, self.coeffs)


def pl_decompose(T):
    """One piece per triangle, carrying that triangle's plane."""
    return [TerrainPiece(np.array(t), tuple(float(v) for v in c))
            for t, c in zip(T.triangles, T.coeffs)]


def _empty_result(eps, msg=None):
    P = WeightedPointSet(np.zeros((0, 2)), dim=2)
    return P, ApproxCertificate(eps, 0.0, (), 0, 0, 0, msg)


def pl_terrain_approx(T, cfg):
    """Weighted approximation of a nonnegative piecewise-linear terrain.

    Each triangle's solid is sampled by a 3D irrational lattice until the
    probe gap is at most eps/4 (stage charged eps/2); the union is then
    reduced with budget eps/2.
    """
    if T.has_negative:
        raise ValueError("terrain takes negative values; split it with split_at_zero first")
    eps = cfg.eps
    pieces = [p for p in pl_decompose(T) if p.mass > 0]
    if not pieces:
        return _empty_result(eps, "terrain has zero measure")
    pts, wts = [], []
    for p in pieces:
        q, w, _, _ = lattice_sample_prism(p.vertices, p.coeffs, eps / 4)
        if len(q):
            pts.append(q)
            wts.append(np.full(len(q), w))
    U = _mixed(WeightedPointSet(np.concatenate(pts), np.concatenate(wts)))
    P, rc = weighted_epsilon_approx(U, cfg.with_eps(eps / 2))
    log = (LogEntry("sample", len(U), eps / 2),) + rc.halve_log
    cert = ApproxCertificate(eps, eps / 2 + rc.accumulated_error, log, len(P), len(U),
                             rc.block_size, rc.warning)
    return P, cert


# ---------------------------------------------------------------- smooth terrains

@dataclass(frozen=True, eq=False)
class SmoothTerrainSpec:
    """Smooth positive height over an axis rectangle.

    ``lambda_bound`` bounds the Hessian's spectral norm on the base and
    ``z_min`` the height from below.  ``gradient`` defaults to central
    differences.  ``local_bounds(rect)`` may return tighter
    (z_min, lambda) for a sub-rectangle.
    """

    base: AxisRect
    height: Callable
    lambda_bound: float
    z_min: float
    gradient: Optional[Callable] = None
    local_bounds: Optional[Callable] = None

    def __post_init__(self):
        if not isinstance(self.base, AxisRect) or self.base.dim != 2 or self.base.area <= 0:
            raise ValueError("base must be a 2D rectangle of positive area")
        if not self.z_min > 0:
            raise ValueError("z_min must be positive")
        if not self.lambda_bound >= 0:
            raise ValueError("lambda_bound must be nonnegative")
        g = np.linspace(0.0, 1.0, PROBE_GRID)
        X, Y = np.meshgrid(g, g, indexing="ij")
        pts = self.base.lo + np.column_stack([X.ravel(), Y.ravel()]) * (self.base.hi - self.base.lo)
        if np.any(self._h(pts) < self.z_min * (1 - 1e-12)):
            raise ValueError("height drops below z_min on the probe grid")

    def _h(self, pts):
        return np.asarray(self.height(np.atleast_2d(pts)), dtype=np.float64).reshape(-1)

    def grad(self, p):
        if self.gradient is not None:
            return np.asarray(self.gradient(np.atleast_2d(p)), dtype=np.float64).reshape(2)
        step = 1e-6 * max(1.0, float(np.max(np.abs(self.base.hi - self.base.lo))))
        e = np.eye(2) * step
        hp = self._h(np.stack([p + e[0], p + e[1]]))
        hm = self._h(np.stack([p - e[0], p - e[1]]))
        return (hp - hm) / (2 * step)

    def bounds(self, rect):
        if self.local_bounds is not None:
            z, lam = self.local_bounds(rect)
            return max(float(z), self.z_min), min(float(lam), self.lambda_bound)
        return self.z_min, self.lambda_bound

    def scaled(self, factor):
        """Same terrain with heights multiplied by factor."""
        lb = None
        if self.local_bounds is not None:
            lb = lambda r: tuple(factor * v for v in self.local_bounds(r))
        gr = None if self.gradient is None else (lambda p: factor * self.gradient(p))
        return SmoothTerrainSpec(self.base, lambda p: factor * self._h(p),
                                 factor * self.lambda_bound, factor * self.z_min, gr, lb)


def _split_longest(rect):
    lo, hi = rect.lo, rect.hi
    ax = 0 if hi[0] - lo[0] >= hi[1] - lo[1] else 1
    mid = 0.5 * (lo[ax] + hi[ax])
    h1 = hi.copy()
    h1[ax] = mid
    l2 = lo.copy()
    l2[ax] = mid
    return AxisRect(lo, h1), AxisRect(l2, hi)


def _verify(spec, patch, tol_hi):
    g = np.linspace(0.0, 1.0, VERIFY_GRID)
    X, Y = np.meshgrid(g, g, indexing="ij")
    r = patch.rect
    pts = r.lo + np.column_stack([X.ravel(), Y.ravel()]) * (r.hi - r.lo)
    gap = spec._h(pts) - patch.height(pts)
    slack = 1e-9 * max(1.0, float(np.max(np.abs(spec._h(pts)))))
    return bool(np.all(gap >= -slack) and np.all(gap <= tol_hi + slack))


def smooth_split(spec, eps):
    """Linear patches h_e with h_e <= h <= h_e + eps * z on every cell.

    Cells are halved along their longer side until lambda*d^2/2 <= eps*z
    (d the cell diagonal, z and lambda the cell's bounds); each emits the
    tangent plane at its center lowered by lambda*d^2/4.  Every patch is
    checked on a 16 x 16 grid.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    out = []
    stack = [spec.base]
    while stack:
        rect = stack.pop()
        z, lam = spec.bounds(rect)
        d = rect.diameter
        if lam * d * d / 2 > eps * z:
            a, b = _split_longest(rect)
            stack.append(b)
            stack.append(a)
            if len(out) + len(stack) > MAX_PATCHES:
                raise ValueError("too many patches; eps too small for this terrain")
            continue
        c = 0.5 * (rect.lo + rect.hi)
        hc = float(spec._h(c)[0])
        gx, gy = spec.grad(c)
        drop = lam * d * d / 4
        patch = LinearPatch(rect, (gx, gy, hc - gx * c[0] - gy * c[1] - drop))
        if not _verify(spec, patch, eps * z):
            raise ValueError("sandwich check failed; the curvature bound is too small")
        out.append(patch)
    return out


def _stab_max(lo, hi, v):
    """Largest total of v over closed intervals [lo, hi] sharing a point."""
    order_lo = np.sort(lo)
    cum_lo = np.cumsum(v[np.argsort(lo, kind="stable")])
    hs = np.argsort(hi, kind="stable")
    order_hi = hi[hs]
    cum_hi = np.cumsum(v[hs])
    starts = np.searchsorted(order_lo, order_lo, side="right") - 1
    ended = np.searchsorted(order_hi, order_lo, side="left") - 1
    tot = cum_lo[starts] - np.where(ended >= 0, cum_hi[np.maximum(ended, 0)], 0.0)
    return float(np.max(tot))


def sample_certificate(patches, counts):
    """Certified rectangle error of per-patch stretched samples.

    A rectangle cuts only patches crossed by its four sides; each cut patch
    i contributes at most m_i * min(1, 4(log2 n_i + 2)/n_i).
    """
    m = np.array([p.mass for p in patches])
    n = np.asarray(counts, dtype=np.float64)
    v = m * np.minimum(1.0, 4.0 * (np.log2(n) + 2.0) / n) / m.sum()
    lo = np.array([p.rect.lo for p in patches])
    hi = np.array([p.rect.hi for p in patches])
    return 2.0 * _stab_max(lo[:, 0], hi[:, 0], v) + 2.0 * _stab_max(lo[:, 1], hi[:, 1], v)


def allocate_samples(patches, target):
    """Power-of-two counts proportional to mass, doubled until certified.

    Returns (counts, certificate).
    """
    m = np.array([p.mass for p in patches])
    share = m / m.sum()
    N = max(len(patches), 1)
    while True:
        counts = np.maximum(1, 2.0 ** np.round(np.log2(np.maximum(N * share, 1e-300))))
        counts = counts.astype(np.int64)
        cert = sample_certificate(patches, counts)
        if cert <= target or 2 * counts.sum() > MAX_SAMPLE:
            return counts, cert
        N *= 2


def smooth_terrain_approx(spec, cfg):
    """Weighted approximation of a smooth terrain for axis rectangles.

    Budget: eps/2 for the linear sandwich, at most eps/4 for per-patch
    stretched sampling and the rest for reduction.  If no reduction fits,
    the sample is returned with a warning.
    """
    eps = cfg.eps
    e_split = eps / 2
    f = e_split / (1 + e_split)
    patches = smooth_split(spec, f)
    counts, e_sample = allocate_samples(patches, eps / 4)
    parts = [stretched_vdc(int(n), p) for p, n in zip(patches, counts)]
    U = _mixed(WeightedPointSet.concat(parts, dim=2))
    log = [LogEntry("split", len(patches), e_split), LogEntry("sample", len(U), e_sample)]
    rest = eps - e_split - e_sample
    warning = None
    if rest <= 0:
        warning = "sample size cap reached; certified error exceeds eps"
    if rest > 0:
        P, rc = weighted_epsilon_approx(U, cfg.with_eps(min(rest, 0.999)))
        log.extend(rc.halve_log)
        warning = warning or rc.warning
        block = rc.block_size
    else:
        P, block = U, 0
    cert = ApproxCertificate(eps, float(sum(e.error for e in log)), tuple(log), len(P), len(U),
                             block, warning)
    return P, cert


# ------------------------------------------------------------------- gaussians

@dataclass(frozen=True)
class GaussianSpec:
    """Axis-aligned bivariate normal density."""

    mean: tuple
    sigmas: tuple

    def __post_init__(self):
        m = tuple(float(v) for v in self.mean)
        s = tuple(float(v) for v in self.sigmas)
        if len(m) != 2 or len(s) != 2:
            raise ValueError("mean and sigmas must have two entries")
        if min(s) <= 0 or not all(map(math.isfinite, m + s)):
            raise ValueError("sigmas must be positive and finite")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "sigmas", s)

    @property
    def peak(self):
        return 1.0 / (2 * math.pi * self.sigmas[0] * self.sigmas[1])

    def density(self, p):
        p = np.atleast_2d(p)
        u = (p - np.array(self.mean)) / np.array(self.sigmas)
        return self.peak * np.exp(-0.5 * np.sum(u * u, axis=1))

    def gradient(self, p):
        p = np.atleast_2d(p)
        s2 = np.array(self.sigmas) ** 2
        return -(p - np.array(self.mean)) / s2 * self.density(p)[:, None]

    def rect_mass(self, lo, hi):
        out = 1.0
        for a in range(2):
            z = NormalDist(self.mean[a], self.sigmas[a])
            out *= z.cdf(hi[a]) - z.cdf(lo[a])
        return out

    @property
    def hessian_bound(self):
        """Global bound peak / sigma_min^2 on the Hessian's spectral norm."""
        return self.peak / min(self.sigmas) ** 2

    def local_bounds(self, rect):
        m = np.array(self.mean)
        s = np.array(self.sigmas)
        far = np.maximum(np.abs(rect.lo - m), np.abs(rect.hi - m))
        near = m - np.clip(m, rect.lo, rect.hi)
        z = float(self.density((m + far)[None])[0])
        fmax = float(self.density((m + near)[None])[0])
        g2 = float(np.sum((far / s ** 2) ** 2))
        lam = min(self.hessian_bound, fmax * max(g2, 1.0 / float(np.min(s)) ** 2))
        return z, lam


def truncation_half_width(sigma, eps):
    """sigma * sqrt(2 ln(1 / (eps sqrt(pi/2)))), the tail cutoff for eps."""
    arg = eps * math.sqrt(math.pi / 2)
    if not 0 < arg < 1:
        raise ValueError("eps out of range for the tail formula")
    return sigma * math.sqrt(2 * math.log(1 / arg))


def gaussian_truncate(g, eps):
    """Box around the mean holding Gaussian mass at least 1 - eps/2.

    Each half-width is the tail cutoff at eps/2, which leaves at most eps/4
    two-sided tail per axis; the product mass is checked with the error
    function, falling back to exact normal quantiles.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    m = np.array(g.mean)
    w = np.array([truncation_half_width(s, eps / 2) for s in g.sigmas])
    box = AxisRect(m - w, m + w)
    if g.rect_mass(box.lo, box.hi) < 1 - eps / 2:
        q = NormalDist().inv_cdf(1 - eps / 8)
        w = np.array(g.sigmas) * q
        box = AxisRect(m - w, m + w)
    return box


def gaussian_spec_on(g, box):
    """Smooth terrain spec of the density over a box, with local bounds."""
    corner = np.array(g.mean) + np.maximum(np.abs(box.lo - g.mean), np.abs(box.hi - g.mean))
    return SmoothTerrainSpec(box, g.density, g.hessian_bound, float(g.density(corner[None])[0]),
                             g.gradient, g.local_bounds)


def gaussian_approx(g, eps, cfg=None):
    """Weighted approximation of a bivariate normal for axis rectangles.

    Truncation at eps/2 costs t/(1-t) for lost mass t; the remaining
    budget goes to the smooth terrain pipeline on the box.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    box = gaussian_truncate(g, min(eps / 2, 0.49))
    t = 1.0 - g.rect_mass(box.lo, box.hi)
    charge = t / (1 - t)
    spec = gaussian_spec_on(g, box)
    base = cfg if cfg is not None else ReduceConfig(eps, check_decrease=False)
    P, sc = smooth_terrain_approx(spec, base.with_eps(eps - charge))
    log = (LogEntry("truncate", 0, charge),) + sc.halve_log
    cert = ApproxCertificate(eps, charge + sc.accumulated_error, log, len(P), sc.input_size,
                             sc.block_size, sc.warning)
    return P, cert
