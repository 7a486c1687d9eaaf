"""Points, ranges, polygons, terrains and exact linear integration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORIENT_TOL = 1e-12
AREA_TOL = 1e-9


def _as_f64(a, ndim):
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


# ----------------------------------------------------------------- points

@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """Finite points in 1 to 3 dimensions with strictly positive weights."""

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights=None, dim=None):
        pts = np.array(points, dtype=np.float64)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, dim or 2)
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        if dim is not None and pts.shape[1] != dim:
            raise ValueError("points do not match dim")
        if not 1 <= pts.shape[1] <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinate")
        w = np.ones(len(pts)) if weights is None else np.array(weights, dtype=np.float64).ravel()
        if len(w) != len(pts):
            raise ValueError("points and weights differ in length")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and positive")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total_weight(self):
        return float(np.sum(self.weights))

    def __len__(self):
        return len(self.points)

    def subset(self, idx):
        idx = np.asarray(idx)
        return WeightedPointSet(self.points[idx], self.weights[idx], dim=self.dim)

    def scaled(self, factor):
        return WeightedPointSet(self.points, self.weights * factor, dim=self.dim)

    @staticmethod
    def concat(sets, dim=None):
        sets = list(sets)
        if not sets:
            return WeightedPointSet(np.zeros((0, dim or 2)), dim=dim)
        d = sets[0].dim
        return WeightedPointSet(np.concatenate([s.points for s in sets]).reshape(-1, d),
                                np.concatenate([s.weights for s in sets]), dim=d)

    def same_as(self, other):
        return (self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))


# ------------------------------------------------------------ directions

@dataclass(frozen=True, eq=False)
class DirectionSet:
    """k pairwise non-parallel unit vectors in d dimensions."""

    dirs: np.ndarray

    def __init__(self, dirs, normalize=False):
        d = np.array(dirs, dtype=np.float64)
        if d.ndim == 1:
            d = d.reshape(1, -1)
        if d.ndim != 2 or len(d) == 0:
            raise ValueError("need at least one direction")
        if not 1 <= d.shape[1] <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        norms = np.linalg.norm(d, axis=1)
        if normalize:
            if np.any(norms == 0):
                raise ValueError("zero direction")
            d = d / norms[:, None]
        elif np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("directions must have unit norm")
        for i in range(len(d)):
            for j in range(i):
                if abs(abs(float(np.dot(d[i], d[j]))) - 1.0) <= 1e-12:
                    raise ValueError("parallel directions")
        d.setflags(write=False)
        object.__setattr__(self, "dirs", d)

    @classmethod
    def axes(cls, dim):
        return cls(np.eye(dim))

    @property
    def dim(self):
        return self.dirs.shape[1]

    @property
    def k(self):
        return self.dirs.shape[0]

    @property
    def is_axis(self):
        return self.k == self.dim and np.array_equal(self.dirs, np.eye(self.dim))


def project(points, dirs):
    """Projections of points onto each direction, shape (n, k).

    Computed coordinate by coordinate in a fixed order so that a single
    point and a batch containing it project to bit-identical values.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    dv = dirs.dirs if isinstance(dirs, DirectionSet) else np.asarray(dirs, dtype=np.float64)
    out = np.empty((len(pts), len(dv)))
    for j, u in enumerate(dv):
        if np.count_nonzero(u) == 1 and u[np.flatnonzero(u)[0]] == 1.0:
            out[:, j] = pts[:, np.flatnonzero(u)[0]]
            continue
        acc = pts[:, 0] * u[0]
        for c in range(1, len(u)):
            acc = acc + pts[:, c] * u[c]
        out[:, j] = acc
    return out


@dataclass(frozen=True)
class RangeFamily:
    """Axis boxes in ``dim`` dimensions, or k-oriented ranges over ``dirs``."""

    kind: str
    dirs: DirectionSet

    @classmethod
    def rect(cls, dim=2):
        return cls("rect", DirectionSet.axes(dim))

    @classmethod
    def kdir(cls, dirs):
        if not isinstance(dirs, DirectionSet):
            dirs = DirectionSet(dirs, normalize=True)
        return cls("kdir", dirs)

    @property
    def dim(self):
        return self.dirs.dim

    @property
    def k(self):
        return self.dirs.k

    def make_range(self, lo, hi):
        if self.kind == "rect":
            return AxisRect(lo, hi)
        return KOrientedRange(self.dirs, np.stack([lo, hi], axis=1))

    def describe(self):
        if self.kind == "rect":
            return {"kind": "rect", "dim": self.dim}
        return {"kind": "kdir", "dirs": self.dirs.dirs.tolist()}


# ---------------------------------------------------------------- ranges

@dataclass(frozen=True, eq=False)
class AxisRect:
    """Closed axis-parallel box [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi):
        lo = _as_f64(np.atleast_1d(lo), 1)
        hi = _as_f64(np.atleast_1d(hi), 1)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi differ in dimension")
        if np.any(lo > hi):
            raise ValueError("lo must not exceed hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def area(self):
        return float(np.prod(self.hi - self.lo))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def contains_many(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValueError("dimension mismatch")
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def intersect(self, other):
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return AxisRect(lo, hi)

    def to_polygon(self):
        (x0, y0), (x1, y1) = self.lo, self.hi
        return ConvexPolygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def to_json(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class KOrientedRange:
    """Intersection of closed slabs a_i <= <beta_i, p> <= b_i."""

    dirs: DirectionSet
    intervals: np.ndarray

    def __init__(self, dirs, intervals):
        iv = _as_f64(intervals, 2)
        if iv.shape != (dirs.k, 2):
            raise ValueError("need one interval per direction")
        if np.any(iv[:, 0] > iv[:, 1]):
            raise ValueError("interval bounds out of order")
        if dirs.k >= dirs.dim and np.linalg.matrix_rank(dirs.dirs) < dirs.dim:
            raise ValueError("slab intersection is unbounded")
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "intervals", iv)

    @property
    def dim(self):
        return self.dirs.dim

    def contains_many(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValueError("dimension mismatch")
        pr = project(pts, self.dirs)
        return np.all((pr >= self.intervals[:, 0]) & (pr <= self.intervals[:, 1]), axis=1)

    def to_json(self):
        return {"dirs": self.dirs.dirs.tolist(), "intervals": self.intervals.tolist()}


def contains(rng, p):
    """True iff point ``p`` lies in the closed range."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) != rng.dim:
        raise ValueError("dimension mismatch")
    return bool(rng.contains_many(p[None, :])[0])


# -------------------------------------------------------------- polygons

def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Counterclockwise convex polygon with positive area."""

    vertices: np.ndarray

    def __init__(self, vertices, check=True):
        v = np.array(vertices, dtype=np.float64).reshape(-1, 2)
        if check:
            keep = np.ones(len(v), dtype=bool)
            for i in range(len(v)):
                if np.array_equal(v[i], v[(i + 1) % len(v)]) and len(v) > 1:
                    keep[i] = False
            v = v[keep]
            if len(v) < 3:
                raise ValueError("polygon needs three distinct vertices")
            if not np.all(np.isfinite(v)):
                raise ValueError("non-finite vertex")
            area = _signed_area(v)
            scale = max(1.0, float(np.max(np.abs(v)))) ** 2
            if area <= ORIENT_TOL * scale:
                raise ValueError("polygon must be counterclockwise with positive area")
            e = np.roll(v, -1, axis=0) - v
            cr = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
            if np.any(cr < -ORIENT_TOL * scale):
                raise ValueError("polygon is not convex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self):
        return _signed_area(self.vertices)

    def bbox(self):
        return AxisRect(self.vertices.min(axis=0), self.vertices.max(axis=0))

    def contains_many(self, points, tol=ORIENT_TOL):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        v = self.vertices
        inside = np.ones(len(pts), dtype=bool)
        for i in range(len(v)):
            a = v[i]
            b = v[(i + 1) % len(v)]
            cr = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
            inside &= cr >= -tol
        return inside


def clip(poly, halfplane):
    """Intersect ``poly`` with {p : <normal, p> <= offset}; None if empty."""
    normal, offset = halfplane
    nx, ny = float(normal[0]), float(normal[1])
    v = poly.vertices
    out = []
    m = len(v)
    for i in range(m):
        p = v[i]
        q = v[(i + 1) % m]
        dp = nx * p[0] + ny * p[1] - offset
        dq = nx * q[0] + ny * q[1] - offset
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            s = dp / (dp - dq)
            out.append(p + s * (q - p))
    if len(out) < 3:
        return None
    arr = np.array(out)
    area = _signed_area(arr)
    scale = max(1.0, float(np.max(np.abs(arr)))) ** 2
    if area <= ORIENT_TOL * scale:
        return None
    return ConvexPolygon(arr, check=False)


def clip_to_rect(poly, rect):
    """Intersect a polygon with a 2D axis box; None if empty."""
    out = poly
    for normal, off in (((1.0, 0.0), rect.hi[0]), ((-1.0, 0.0), -rect.lo[0]),
                        ((0.0, 1.0), rect.hi[1]), ((0.0, -1.0), -rect.lo[1])):
        out = clip(out, (normal, off))
        if out is None:
            return None
    return out


def integrate_linear(poly, coeffs):
    """Exact integral of a*x + b*y + c over a polygon (shoelace moments)."""
    a, b, c = (float(t) for t in coeffs)
    v = poly.vertices
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cr = x0 * y1 - x1 * y0
    area2 = float(np.sum(cr))
    mx = float(np.sum((x0 + x1) * cr))
    my = float(np.sum((y0 + y1) * cr))
    return a * mx / 6.0 + b * my / 6.0 + c * area2 / 2.0


def box_linear_integral(lo, hi, coeffs):
    """Closed form of the same integral over an axis box."""
    a, b, c = coeffs
    (x1, y1), (x2, y2) = lo, hi
    return (a * (x2 * x2 - x1 * x1) * (y2 - y1) / 2.0 + b * (y2 * y2 - y1 * y1) * (x2 - x1) / 2.0
            + c * (x2 - x1) * (y2 - y1))


# -------------------------------------------------------------- terrains

@dataclass(frozen=True, eq=False)
class LinearPatch:
    """Axis rectangle carrying a strictly positive linear density."""

    rect: AxisRect
    coeffs: tuple

    def __init__(self, rect, coeffs):
        if not isinstance(rect, AxisRect):
            rect = AxisRect(*rect)
        if rect.dim != 2:
            raise ValueError("patches are 2D")
        if rect.area <= 0:
            raise ValueError("patch rectangle has zero area")
        co = tuple(float(t) for t in coeffs)
        if len(co) != 3 or not all(np.isfinite(co)):
            raise ValueError("coeffs must be three finite numbers")
        object.__setattr__(self, "rect", rect)
        object.__setattr__(self, "coeffs", co)
        if self.min_height() <= 0:
            raise ValueError("height must be strictly positive on the patch")

    def height(self, points):
        p = np.atleast_2d(points)
        a, b, c = self.coeffs
        return a * p[:, 0] + b * p[:, 1] + c

    def min_height(self):
        (x0, y0), (x1, y1) = self.rect.lo, self.rect.hi
        a, b, c = self.coeffs
        return c + min(a * x0, a * x1) + min(b * y0, b * y1)

    @property
    def mass(self):
        return box_linear_integral(self.rect.lo, self.rect.hi, self.coeffs)


def _plane_through(p):
    """Coefficients (a, b, c) of the plane through three (x, y, z) points."""
    m = np.column_stack([p[:, 0], p[:, 1], np.ones(3)])
    return np.linalg.solve(m, p[:, 2])


@dataclass(frozen=True, eq=False)
class PLTerrain:
    """Triangulated base with a linear height per triangle."""

    triangles: np.ndarray
    coeffs: np.ndarray
    base_box: AxisRect

    def __init__(self, triangles, coeffs, base_box=None, check=True):
        tri = np.array(triangles, dtype=np.float64).reshape(-1, 3, 2)
        co = np.array(coeffs, dtype=np.float64).reshape(-1, 3)
        if len(tri) != len(co):
            raise ValueError("one coefficient triple per triangle")
        if len(tri) == 0:
            raise ValueError("terrain needs at least one triangle")
        e1 = tri[:, 1] - tri[:, 0]
        e2 = tri[:, 2] - tri[:, 0]
        cr = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        flip = cr < 0
        tri[flip] = tri[flip][:, [0, 2, 1]]
        if base_box is None:
            flat = tri.reshape(-1, 2)
            base_box = AxisRect(flat.min(axis=0), flat.max(axis=0))
        tri.setflags(write=False)
        co.setflags(write=False)
        object.__setattr__(self, "triangles", tri)
        object.__setattr__(self, "coeffs", co)
        object.__setattr__(self, "base_box", base_box)
        if check:
            self.validate()

    @classmethod
    def from_mesh(cls, vertices, triangles, check=True):
        v = np.asarray(vertices, dtype=np.float64)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must be [x, y, z] triples")
        if t.ndim != 2 or t.shape[1] != 3 or t.min() < 0 or t.max() >= len(v):
            raise ValueError("bad triangle indices")
        tri = v[t][:, :, :2]
        co = np.array([_plane_through(v[f]) for f in t])
        return cls(tri, co, check=check)

    @classmethod
    def flat(cls, rect, height=1.0):
        (x0, y0), (x1, y1) = rect.lo, rect.hi
        tri = [[(x0, y0), (x1, y0), (x1, y1)], [(x0, y0), (x1, y1), (x0, y1)]]
        return cls(tri, [(0.0, 0.0, height)] * 2, base_box=rect)

    def validate(self):
        tri = self.triangles
        areas = self.areas()
        scale = max(1.0, float(np.max(np.abs(tri)))) ** 2
        if np.any(areas <= ORIENT_TOL * scale):
            raise ValueError("degenerate triangle")
        box = self.base_box
        if abs(float(np.sum(areas)) - box.area) > AREA_TOL * max(1.0, box.area):
            raise ValueError("triangles do not tile the base box")
        flat = tri.reshape(-1, 2)
        if np.any(flat < box.lo - 1e-9) or np.any(flat > box.hi + 1e-9):
            raise ValueError("triangle outside the base box")
        cen = tri.mean(axis=1)
        hits = np.zeros(len(tri), dtype=np.int64)
        for t in tri:
            hits += _in_triangle(cen, t, -1e-12).astype(np.int64)
        if np.any(hits != 1):
            raise ValueError("triangles overlap")
        heights = {}
        for t, (a, b, c) in zip(tri, self.coeffs):
            for x, y in t:
                h = a * x + b * y + c
                key = (float(x), float(y))
                if key in heights and abs(heights[key] - h) > 1e-9 * max(1.0, abs(h)):
                    raise ValueError("height is discontinuous across a shared vertex")
                heights.setdefault(key, h)

    def areas(self):
        tri = self.triangles
        e1 = tri[:, 1] - tri[:, 0]
        e2 = tri[:, 2] - tri[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def vertex_heights(self):
        t = self.triangles
        c = self.coeffs
        return c[:, None, 0] * t[:, :, 0] + c[:, None, 1] * t[:, :, 1] + c[:, None, 2]

    @property
    def has_negative(self):
        return bool(np.any(self.vertex_heights() < 0))

    def piece_masses(self):
        return np.array([integrate_linear(ConvexPolygon(t, check=False), c)
                         for t, c in zip(self.triangles, self.coeffs)])

    @property
    def total_mass(self):
        return float(np.sum(self.piece_masses()))

    def height(self, points):
        """Height at each point; NaN outside the triangulation."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.full(len(pts), np.nan)
        todo = np.ones(len(pts), dtype=bool)
        for t, (a, b, c) in zip(self.triangles, self.coeffs):
            lo = t.min(axis=0)
            hi = t.max(axis=0)
            cand = todo & np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1)
            if not cand.any():
                continue
            idx = np.flatnonzero(cand)
            ok = _in_triangle(pts[idx], t, -1e-12)
            idx = idx[ok]
            out[idx] = a * pts[idx, 0] + b * pts[idx, 1] + c
            todo[idx] = False
        return out

    def split_at_zero(self):
        """Positive and negative parts as two nonnegative terrains."""
        pos_t, pos_c, neg_t, neg_c = [], [], [], []
        zero = np.zeros(3)
        for t, co in zip(self.triangles, self.coeffs):
            poly = ConvexPolygon(t, check=False)
            a, b, c = co
            up = clip(poly, ((-a, -b), c))      # h >= 0
            dn = clip(poly, ((a, b), -c))       # h <= 0
            for part, sign in ((up, 1), (dn, -1)):
                if part is None:
                    continue
                for tri in _fan(part.vertices):
                    if sign > 0:
                        pos_t.append(tri); pos_c.append(co); neg_t.append(tri); neg_c.append(zero)
                    else:
                        pos_t.append(tri); pos_c.append(zero); neg_t.append(tri); neg_c.append(-co)
        return (PLTerrain(pos_t, pos_c, self.base_box, check=False),
                PLTerrain(neg_t, neg_c, self.base_box, check=False))

    def to_json(self):
        return {"triangles": self.triangles.tolist(), "coeffs": self.coeffs.tolist(),
                "base_box": self.base_box.to_json()}


def _fan(v):
    return [np.array([v[0], v[i], v[i + 1]]) for i in range(1, len(v) - 1)]


def _in_triangle(pts, t, tol):
    inside = np.ones(len(pts), dtype=bool)
    for i in range(3):
        a = t[i]
        b = t[(i + 1) % 3]
        cr = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cr >= tol
    return inside


def terrain_measure(T, R):
    """Measure of the terrain inside the closed rectangle R (clamped to the base)."""
    box = R.intersect(T.base_box)
    if box is None:
        return 0.0
    total = 0.0
    for t, co in zip(T.triangles, T.coeffs):
        part = clip_to_rect(ConvexPolygon(t, check=False), box)
        if part is not None:
            total += integrate_linear(part, co)
    return total
