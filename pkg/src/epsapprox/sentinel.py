"""Sentinel subsets for cut detection, and disjoint families of them.

P is an eps-sentinel of D when every range holding at least eps|D| points
of D holds at least (3/4)eps|P| points of P, and every range holding at
least (3/4)eps|P| points of P holds at least eps|D|/2 points of D.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .discrepancy import _dirs, _is_pow2, _max_box_abs, beck_fiala, canonical_structure
from .geometry import DirectionSet, RangeFamily, WeightedPointSet, project
from .merge_reduce import epsilon_approx

SHUFFLE_SEED = 0


@dataclass(frozen=True, eq=False)
class SentinelFamily:
    """Pairwise disjoint sentinel sets; ``index_sets`` point into the ground set."""

    sets: tuple
    eps: float
    family: RangeFamily
    index_sets: tuple

    def __post_init__(self):
        if not self.sets or any(len(s) == 0 for s in self.sets):
            raise ValueError("sentinel sets must be nonempty")
        seen = np.concatenate(self.index_sets)
        if len(np.unique(seen)) != len(seen):
            raise ValueError("sentinel sets overlap")

    def __len__(self):
        return len(self.sets)

    def to_json(self):
        return {"eps": self.eps, "family": self.family.describe(),
                "sizes": [len(s) for s in self.sets],
                "index_sets": [[int(i) for i in ix] for ix in self.index_sets]}


@dataclass(frozen=True)
class SentinelVerdict:
    """Outcome of an exhaustive check; ``condition`` is 1 or 2 on failure."""

    ok: bool
    condition: int = 0
    witness: Optional[object] = None
    ground_count: int = 0
    sentinel_count: int = 0
    ranges_checked: int = 0

    def __bool__(self):
        return self.ok

    def to_json(self):
        w = self.witness
        return {"ok": self.ok, "condition": self.condition,
                "witness": w.to_json() if w is not None else None,
                "ground_count": self.ground_count, "sentinel_count": self.sentinel_count,
                "ranges_checked": self.ranges_checked}


def _family(family, dim):
    if family is None or family == "rect":
        return RangeFamily.rect(dim)
    if isinstance(family, DirectionSet):
        return RangeFamily.kdir(family)
    return family


def _multiplicity(P, D):
    """Per-point sentinel multiplicity over D's points; raises if P is not inside D."""
    keys = {}
    for i, row in enumerate(map(tuple, D.points)):
        keys.setdefault(row, []).append(i)
    mult = np.zeros(len(D))
    used = {}
    for row in map(tuple, P.points):
        slots = keys.get(row)
        k = used.get(row, 0)
        if slots is None or k >= len(slots):
            raise ValueError("sentinel set is not contained in the ground set")
        mult[slots[k]] += 1.0
        used[row] = k + 1
    return mult


def _witness(fam, vals, bounds):
    lo = np.array([vals[j][b[0]] for j, b in enumerate(bounds)])
    hi = np.array([vals[j][b[1]] for j, b in enumerate(bounds)])
    return fam.make_range(lo, hi)


def verify_sentinel(P, D, eps, family=None):
    """Exhaustively test both sentinel conditions over all distinct ranges.

    Ranges are enumerated with boundaries at the projections of D's points,
    which covers every distinct subset of D.  Returns a verdict whose
    witness is the first violating range found.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    fam = _family(family, D.dim)
    if fam.k > 3:
        raise ValueError("at most three directions are supported")
    mult = _multiplicity(P, D)
    nd, npt = float(len(D)), float(len(P))
    need_d, thr_p = eps * nd, 0.75 * eps * npt
    need_p, thr_d = 0.75 * eps * npt, 0.5 * eps * nd
    pr = project(D.points, fam.dirs)
    vals, inv = [], []
    for j in range(fam.k):
        u, iv = np.unique(pr[:, j], return_inverse=True)
        vals.append(u)
        inv.append(iv.astype(np.int64))
    ind = np.ones(len(D))
    sizes = [len(u) for u in vals]
    checked = int(np.prod([s * (s + 1) // 2 for s in sizes]))
    if fam.k == 1:
        zs = [None]
        ix, iy, ny = inv[0], np.zeros(len(D), np.int64), 1
    else:
        zs = [None] if fam.k == 2 else [(a, b) for a in range(sizes[2]) for b in range(a, sizes[2])]
        ix, iy, ny = inv[0], inv[1], sizes[1]
    for z in zs:
        sel = slice(None) if z is None else (inv[2] >= z[0]) & (inv[2] <= z[1])
        kind, x1, x2, y1, y2 = kernels.sentinel_scan(ix[sel], iy[sel], ind[sel], mult[sel],
                                                     sizes[0], ny, need_d, need_p, thr_d, thr_p)
        if kind:
            bounds = [(x1, x2)] if fam.k == 1 else [(x1, x2), (y1, y2)]
            if z is not None:
                bounds.append(z)
            inside = np.ones(len(D), dtype=bool)
            for j, (a, b) in enumerate(bounds):
                inside &= (inv[j] >= a) & (inv[j] <= b)
            return SentinelVerdict(False, int(kind), _witness(fam, vals, bounds),
                                   int(inside.sum()), int(mult[inside].sum()), checked)
    return SentinelVerdict(True, ranges_checked=checked)


def build_sentinels(D, cfg):
    """An eps/4-approximation of D, returned as a unit-weight subset of D."""
    if len(D) == 0:
        raise ValueError("ground set is empty")
    sub = cfg.with_eps(cfg.eps / 4)
    _, _, idx = epsilon_approx(WeightedPointSet(D.points, dim=D.dim), sub, return_index=True)
    return WeightedPointSet(D.points[np.sort(idx)], dim=D.dim)


def _gap(D, parts, dirs):
    """Largest range gap between each part (as a fraction) and D."""
    out = []
    for ix in parts:
        s = np.full(len(D), -1.0 / len(D))
        s[ix] += 1.0 / len(ix)
        out.append(_max_box_abs(D.points, s, dirs))
    return max(out)


def _split(points, idx, dirs, window):
    """Both color classes of one balanced halving, + class first."""
    inc = canonical_structure(WeightedPointSet(points[idx]), dirs)
    chi = beck_fiala(inc, window).signs
    return idx[chi == 1], idx[chi == -1]


def disjoint_sentinels(D, eps, family=None, block_size=1024, window=64, verify=True):
    """Disjoint sentinel sets from a full halving tree over each block.

    D is shuffled with a fixed seed and cut into blocks of a power-of-two
    size; points past the last full block are left out.  Each block is
    halved repeatedly and both color classes are kept, so level d holds 2^d
    disjoint pieces per block; piece j of every block is unioned into set j.
    The deepest level whose sets all stay within eps/4 of D over every range
    (and pass verification) is returned, in depth-first order with the +
    branch first.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    fam = _family(family, D.dim)
    dirs = _dirs(fam, D.dim)
    n = len(D)
    b = min(block_size, 1 << (n.bit_length() - 1)) if n else 0
    if n < 2 or not _is_pow2(b) or b < 2:
        return SentinelFamily((D,), eps, fam, (np.arange(n),))
    perm = np.random.default_rng(SHUFFLE_SEED).permutation(n)
    blocks = [perm[i * b:(i + 1) * b] for i in range(n // b)]
    level = [[blk] for blk in blocks]
    best = [np.sort(np.concatenate(blocks))]
    while len(level[0][0]) >= 2:
        nxt = []
        for pieces in level:
            row = []
            for p in pieces:
                row.extend(_split(D.points, p, dirs, window))
            nxt.append(row)
        sets = [np.sort(np.concatenate([row[j] for row in nxt])) for j in range(len(nxt[0]))]
        if _gap(D, sets, dirs) > eps / 4:
            break
        if verify and not all(verify_sentinel(D.subset(s), D, eps, fam) for s in sets):
            break
        best, level = sets, nxt
    sets = tuple(WeightedPointSet(D.points[s], dim=D.dim) for s in best)
    return SentinelFamily(sets, eps, fam, tuple(best))
