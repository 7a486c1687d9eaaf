"""Canonical subsets, Beck-Fiala coloring and the halving step."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .geometry import DirectionSet, RangeFamily, WeightedPointSet, project

SIGNATURE_SEED = 0x5EED5
MEASURE_K3_MAX = 128


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def _dirs(spec, dim):
    if spec is None or spec == "rect":
        return DirectionSet.axes(dim)
    if isinstance(spec, RangeFamily):
        return spec.dirs
    if isinstance(spec, DirectionSet):
        return spec
    raise TypeError("expected a DirectionSet, RangeFamily or 'rect'")


@dataclass(frozen=True, eq=False)
class CanonicalIncidence:
    """Rows of the canonical set system in compressed sparse form.

    ``row_idx[row_ptr[r]:row_ptr[r+1]]`` lists the points of row r in
    increasing order; ``pt_rows`` is the transpose.  ``ranks[j]`` is each
    point's rank along direction j.
    """

    n: int
    row_ptr: np.ndarray
    row_idx: np.ndarray
    pt_ptr: np.ndarray
    pt_rows: np.ndarray
    t: int
    full_row: int
    ranks: np.ndarray

    @property
    def num_rows(self):
        return len(self.row_ptr) - 1

    @property
    def rows(self):
        return [self.row_idx[self.row_ptr[r]:self.row_ptr[r + 1]] for r in range(self.num_rows)]

    def row_sums(self, chi):
        vals = np.asarray(chi, dtype=np.int64)[self.row_idx]
        return np.add.reduceat(vals, self.row_ptr[:-1])


@dataclass(frozen=True, eq=False)
class Coloring:
    signs: np.ndarray

    def __init__(self, signs):
        s = np.array(signs, dtype=np.int8).ravel()
        if not np.all((s == 1) | (s == -1)):
            raise ValueError("signs must be +1 or -1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    def __len__(self):
        return len(self.signs)

    @property
    def balanced(self):
        return int(np.sum(self.signs)) == 0

    def to_json(self):
        return [int(v) for v in self.signs]


def canonical_structure(X, dirs=None):
    """Canonical rows: one dyadic rank interval per direction, intersected.

    Levels q run over 1..log2(n) in each direction; empty and repeated
    intersections are dropped and the full set is added as its own row.
    """
    n = len(X)
    if not _is_pow2(n):
        raise ValueError("point count must be a power of two")
    ds = _dirs(dirs, X.dim)
    k = ds.k
    if k < 1:
        raise ValueError("need at least one direction")
    L = n.bit_length() - 1
    pr = project(X.points, ds)
    idx = np.arange(n)
    ranks = np.empty((k, n), dtype=np.int64)
    for j in range(k):
        order = np.lexsort((idx, pr[:, j]))
        ranks[j, order] = idx
    rng = np.random.default_rng(SIGNATURE_SEED)
    h1 = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    h2 = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    orders, gs, s1s, s2s, lns = [], [], [], [], []
    for li, levels in enumerate(itertools.product(range(1, L + 1), repeat=k)):
        key = np.zeros(n, dtype=np.int64)
        for j, q in enumerate(levels):
            key = (key << q) | (ranks[j] >> (L - q))
        order = np.argsort(key, kind="stable")
        ks = key[order]
        starts = np.flatnonzero(np.concatenate(([True], ks[1:] != ks[:-1])))
        lns.append(np.diff(np.concatenate((starts, [n]))))
        s1s.append(np.add.reduceat(h1[order], starts))
        s2s.append(np.add.reduceat(h2[order], starts))
        gs.append(starts + li * n)
        orders.append(order)
    gstart = np.concatenate(gs)
    lens = np.concatenate(lns)
    s1, s2 = np.concatenate(s1s), np.concatenate(s2s)
    srt = np.lexsort((lens, s2, s1))
    new = np.ones(len(srt), dtype=bool)
    new[1:] = (np.diff(s1[srt]) != 0) | (np.diff(s2[srt]) != 0) | (np.diff(lens[srt]) != 0)
    first = np.sort(srt[new])
    gstart, lens = gstart[first], lens[first]
    flat = np.concatenate(orders)
    offs = np.concatenate(([0], np.cumsum(lens)[:-1]))
    gathered = flat[np.repeat(gstart - offs, lens) + np.arange(int(lens.sum()))]
    full_row = len(lens)
    chunks = [gathered, idx]
    sizes = np.concatenate([lens, [n]])
    row_ptr = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
    row_idx = np.concatenate(chunks).astype(np.int64)
    owner = np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)
    by_pt = np.argsort(row_idx, kind="stable")
    pt_rows = owner[by_pt]
    pt_ptr = np.concatenate(([0], np.cumsum(np.bincount(row_idx, minlength=n)))).astype(np.int64)
    t = int(np.max(np.diff(pt_ptr)))
    return CanonicalIncidence(n, row_ptr, row_idx, pt_ptr, pt_rows, t, full_row, ranks)


def zorder(ranks):
    """Visiting order interleaving the rank bits of all directions."""
    k, n = ranks.shape
    if k == 1:
        return np.argsort(ranks[0], kind="stable")
    bits = max(int(n - 1).bit_length(), 1)
    key = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        for j in range(k):
            key |= ((ranks[j] >> b) & 1) << (k * b + (k - 1 - j))
    return np.argsort(key, kind="stable")


def _rebalance(inc, chi):
    """Flip majority signs until exactly half are +1, least damage first."""
    chi = chi.copy()
    sums = inc.row_sums(chi)
    excess = int(np.sum(chi))
    owner = np.repeat(np.arange(inc.n), np.diff(inc.pt_ptr))
    while excess != 0:
        sign = 1 if excess > 0 else -1
        after = np.abs(sums[inc.pt_rows] - 2 * chi[owner])
        score = np.zeros(inc.n, dtype=np.int64)
        np.maximum.at(score, owner, after)
        score[chi != sign] = np.iinfo(np.int64).max
        i = int(np.argmin(score))
        sums[inc.pt_rows[inc.pt_ptr[i]:inc.pt_ptr[i + 1]]] -= 2 * sign
        chi[i] = -sign
        excess -= 2 * sign
    return chi


def beck_fiala(inc, window=64):
    """Coloring with every canonical row imbalance at most 2t - 1.

    Iterated rounding on a sliding window of ``window + 1`` floating
    variables in Z-order; exactly half the signs end up +1.
    """
    order = zorder(inc.ranks)
    x = kernels.bf_core(inc.n, inc.row_ptr, inc.row_idx, inc.pt_ptr, inc.pt_rows, inc.t,
                        order, window, inc.full_row)
    chi = np.where(x > 0, 1, -1).astype(np.int64)
    if inc.n % 2 == 0:
        chi = _rebalance(inc, chi)
    worst = int(np.max(np.abs(inc.row_sums(chi))))
    if worst > 2 * inc.t - 1:
        raise AssertionError(f"row bound violated: {worst} > {2 * inc.t - 1}")
    return Coloring(chi)


def certified_bound(n, t, k):
    """Provable halving error (2t-1)(2 ceil(log2 n))^k / n."""
    return (2 * t - 1) * (2 * math.ceil(math.log2(n))) ** k / n if n > 1 else 1.0


def _max_box_abs(points, s, dirs):
    pr = project(points, dirs)
    k = pr.shape[1]
    inv, sizes = [], []
    for j in range(k):
        u, iv = np.unique(pr[:, j], return_inverse=True)
        inv.append(iv.astype(np.int64))
        sizes.append(len(u))
    if k == 1:
        return kernels.max_abs_box(inv[0], np.zeros(len(s), np.int64), s, sizes[0], 1)
    if k == 2:
        return kernels.max_abs_box(inv[0], inv[1], s, sizes[0], sizes[1])
    best = 0.0
    for z0 in range(sizes[2]):
        for z1 in range(z0, sizes[2]):
            sel = (inv[2] >= z0) & (inv[2] <= z1)
            best = max(best, kernels.max_abs_box(inv[0][sel], inv[1][sel], s[sel],
                                                 sizes[0], sizes[1]))
    return best


def measured_halving_error(points, weights, keep, new_weights, dirs):
    """Exact max range gap between the kept half and the whole set."""
    s = -weights / np.sum(weights)
    s = s.copy()
    s[keep] += new_weights / np.sum(new_weights)
    return float(_max_box_abs(points, s, dirs))


@dataclass(frozen=True, eq=False)
class HalveResult:
    kept: WeightedPointSet
    chi: Coloring
    bound: float
    measured: Optional[float]
    error: float
    kept_index: np.ndarray
    t: int


def halve_arrays(points, weights, dirs, window=64, measure=True):
    """Halve raw arrays; returns (keep mask, new kept weights, bound, measured, chi, t)."""
    n = len(points)
    X = WeightedPointSet(points, weights)
    inc = canonical_structure(X, dirs)
    chi = beck_fiala(inc, window)
    keep = chi.signs == 1
    kw = weights[keep]
    new_w = kw * (np.sum(weights) / np.sum(kw))
    bound = certified_bound(n, inc.t, dirs.k)
    measured = None
    if measure and (dirs.k <= 2 or n <= MEASURE_K3_MAX):
        measured = measured_halving_error(points, weights, keep, new_w, dirs)
    return keep, new_w, bound, measured, chi, inc.t


def halve(X, family=None, window=64, measure=True):
    """Keep the +1 color class of a Beck-Fiala coloring, weights rescaled.

    The step's error is the smaller of the provable bound and the exactly
    measured range error (when measurable).
    """
    n = len(X)
    if n < 2 or not _is_pow2(n):
        raise ValueError("halving needs a power-of-two size of at least 2")
    ds = _dirs(family, X.dim)
    keep, new_w, bound, measured, chi, t = halve_arrays(X.points, X.weights, ds, window, measure)
    err = bound if measured is None else min(bound, measured)
    kept = WeightedPointSet(X.points[keep], new_w, dim=X.dim)
    return HalveResult(kept, chi, bound, measured, err, np.flatnonzero(keep), t)
