"""Merge-reduce construction of weighted epsilon-approximations."""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .discrepancy import _dirs, _is_pow2, halve_arrays
from .geometry import RangeFamily, WeightedPointSet

PAD_WEIGHT = 1e-12
CALIBRATION_SEEDS = 4


@functools.lru_cache(maxsize=None)
def _calibration(dirs_key, dim, min_block, window):
    """Mean measured halving error at min_block and 2*min_block."""
    dirs = _dirs(None, dim) if dirs_key is None else _dirs_from_key(dirs_key, dim)
    out = []
    for n in (min_block, 2 * min_block):
        errs = []
        for s in range(CALIBRATION_SEEDS):
            pts = np.random.default_rng(1000 + s).random((n, dim))
            keep, nw, bound, measured, _, _ = halve_arrays(pts, np.ones(n), dirs, window,
                                                           measure=True)
            errs.append(bound if measured is None else min(bound, measured))
        out.append(float(np.mean(errs)))
    return tuple(out)


def _dirs_from_key(key, dim):
    from .geometry import DirectionSet
    return DirectionSet(np.array(key, dtype=np.float64).reshape(-1, dim))


@dataclass(frozen=True)
class ReduceConfig:
    """Parameters of the merge-reduce pipeline.

    Construction measures the halving error at ``min_block`` and twice that
    size on seeded uniform data and rejects configurations where it does
    not drop by the factor ``1 - delta``.
    """

    eps: float
    family: RangeFamily = field(default_factory=RangeFamily.rect)
    block_size: int = 256
    w_exponent: int = 4
    delta: float = 0.05
    min_block: int = 64
    max_block: int = 4096
    window: int = 64
    threads: int = 1
    check_decrease: bool = True

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")
        if not _is_pow2(self.min_block) or self.min_block < 2:
            raise ValueError("min_block must be a power of two >= 2")
        if not _is_pow2(self.block_size) or self.block_size < self.min_block:
            raise ValueError("block_size must be a power of two >= min_block")
        if not _is_pow2(self.max_block) or self.max_block < self.block_size:
            raise ValueError("max_block must be a power of two >= block_size")
        if not (0.0 < self.delta <= 1.0):
            raise ValueError("delta must lie in (0, 1]")
        if self.w_exponent < 0 or self.threads < 1 or self.window < 1:
            raise ValueError("invalid w_exponent, threads or window")
        if self.check_decrease:
            f1, f2 = self.calibration()
            if f2 > (1.0 - self.delta) * f1:
                raise ValueError(
                    f"halving error does not decrease geometrically at min_block="
                    f"{self.min_block}: f(2n)={f2:.4g} > (1-delta)f(n)={(1 - self.delta) * f1:.4g}")

    @property
    def dirs(self):
        return self.family.dirs

    def calibration(self):
        d = self.dirs
        key = None if self.family.kind == "rect" else tuple(d.dirs.ravel().tolist())
        return _calibration(key, d.dim, self.min_block, self.window)

    def with_eps(self, eps):
        return replace(self, eps=eps, check_decrease=False)

    def to_json(self):
        return {"eps": self.eps, "family": self.family.describe(), "block_size": self.block_size,
                "w_exponent": self.w_exponent, "delta": self.delta, "min_block": self.min_block,
                "max_block": self.max_block, "window": self.window}


@dataclass(frozen=True)
class LogEntry:
    stage: str
    size: int
    error: float

    def to_json(self):
        return {"stage": self.stage, "size": self.size, "error": self.error}


@dataclass(frozen=True)
class ApproxCertificate:
    """Running error ledger; accumulated_error is the sum of the log."""

    eps: float
    accumulated_error: float
    halve_log: tuple
    output_size: int
    input_size: int
    block_size: int = 0
    warning: Optional[str] = None

    def to_json(self):
        return {"eps": self.eps, "accumulated_error": self.accumulated_error,
                "halve_log": [e.to_json() for e in self.halve_log],
                "output_size": self.output_size, "input_size": self.input_size,
                "block_size": self.block_size, "warning": self.warning}


def _next_pow2(n):
    return 1 << max(0, (n - 1).bit_length())


def _padded_size(n, b):
    return _next_pow2(n) if n <= b else b * _next_pow2(-(-n // b))


def _pad(X, N):
    n = len(X)
    src = np.arange(N - n) % n
    tiny = PAD_WEIGHT * float(np.min(X.weights))
    pts = np.concatenate([X.points, X.points[src]])
    w = np.concatenate([X.weights, np.full(N - n, tiny)])
    return pts, w


class _Run:
    """One pipeline execution over padded arrays."""

    def __init__(self, pts, w, cfg, n_real):
        self.pts = pts
        self.w = w
        self.cfg = cfg
        self.dirs = cfg.dirs
        self.W = float(np.sum(w))
        self.n_real = n_real
        self.cache = {}

    def halve(self, idx, wt):
        key = (idx[0], len(idx), idx[-1])
        hit = self.cache.pop(key, None)
        if hit is not None and np.array_equal(hit[0], idx):
            return hit[1]
        keep, nw, bound, measured, _, _ = halve_arrays(self.pts[idx], wt, self.dirs,
                                                       self.cfg.window)
        err = bound if measured is None else min(bound, measured)
        return idx[keep], nw, err

    def halve_many(self, sets):
        if self.cfg.threads > 1 and len(sets) > 1:
            with ThreadPoolExecutor(self.cfg.threads) as ex:
                return list(ex.map(lambda s: self.halve(*s), sets))
        return [self.halve(*s) for s in sets]


def _choose_block(run, N, eps):
    """Double the block size until a pilot halving projects within eps/2.

    Returns (block size, projected stage-one error).  Merged sets never
    exceed max_block, so the block size stays at most max_block / 2.
    """
    cfg = run.cfg
    b = cfg.block_size
    while True:
        if N <= b or 2 * b > cfg.max_block:
            return b, 0.0
        rounds = int(math.log2(N // b))
        idx = np.arange(2 * b)
        res = run.halve(idx, run.w[idx])
        run.cache = {(0, 2 * b, 2 * b - 1): (idx, res)}
        projected = res[2] * rounds
        if projected <= eps / 2 or 4 * b > cfg.max_block or 2 * b >= N:
            return b, projected
        b *= 2


def epsilon_approx(X, cfg, return_index=False):
    """Weighted eps-approximation of X for cfg.family by merge and halve.

    Stage one merges blocks pairwise, halving each merged set, with a bare
    merge after every w+2 halving rounds.  A round whose certified error
    would overrun the budget is replaced by bare merges, as is stage one
    entirely when a pilot halving projects past the budget.  Stage two
    halves the surviving set while the budget allows.  Sets larger than
    max_block are never halved.  The certified error of a step is the
    smaller of the provable bound and the exactly measured range error.
    If nothing can be halved, X is returned with a warning.
    """
    n = len(X)
    if n < 1:
        raise ValueError("empty input")
    if X.dim != cfg.family.dim:
        raise ValueError("point dimension does not match the range family")
    eps = cfg.eps
    b0 = cfg.block_size
    N = _padded_size(n, b0)
    pts, w = _pad(X, N)
    run = _Run(pts, w, cfg, n)
    b, projected = _choose_block(run, N, eps)
    if b != b0:
        N2 = _padded_size(n, b)
        if N2 != N:
            pts, w = _pad(X, N2)
            run = _Run(pts, w, cfg, n)
            run.cache = {}
            N = N2
    log = []
    acc = 0.0
    pad_frac = float(np.sum(w[n:])) / run.W
    if N > n:
        e = 4.0 * pad_frac
        log.append(LogEntry("padding", N - n, e))
        acc += e
    blk = min(b, N)
    sets = [(np.arange(i, i + blk), w[i:i + blk].copy()) for i in range(0, N, blk)]
    since_skip = 0
    stage1_open = projected <= eps
    refused = not stage1_open
    while len(sets) > 1:
        merged = [(np.concatenate([sets[i][0], sets[i + 1][0]]),
                   np.concatenate([sets[i][1], sets[i + 1][1]])) for i in range(0, len(sets), 2)]
        size = len(merged[0][0])
        if since_skip == cfg.w_exponent + 2:
            since_skip = 0
            sets = merged
            continue
        if not stage1_open or size < max(cfg.min_block, 2) or size > cfg.max_block:
            sets = merged
            continue
        results = run.halve_many(merged)
        round_err = sum(float(np.sum(m[1])) / run.W * r[2] for m, r in zip(merged, results))
        if acc + round_err > eps:
            stage1_open = False
            refused = True
            sets = merged
            continue
        acc += round_err
        log.append(LogEntry("merge", size, round_err))
        sets = [(r[0], r[1]) for r in results]
        since_skip += 1
    idx, wt = sets[0]
    while len(idx) >= max(cfg.min_block, 2):
        if len(idx) > cfg.max_block:
            refused = True
            break
        kidx, kw, err = run.halve(idx, wt)
        if acc + err > eps:
            refused = True
            break
        acc += err
        log.append(LogEntry("reduce", len(idx), err))
        idx, wt = kidx, kw
    halved = any(e.stage in ("merge", "reduce") for e in log)
    if not halved:
        warning = "error budget too small for any halving; input returned" if refused else None
        cert = ApproxCertificate(eps, 0.0, (), n, n, b, warning)
        return (X, cert, np.arange(n)) if return_index else (X, cert)
    real = idx < n
    idx, wt = idx[real], wt[real]
    order = np.argsort(idx, kind="stable")
    idx, wt = idx[order], wt[order]
    wt = wt * (X.total_weight / float(np.sum(wt)))
    P = WeightedPointSet(X.points[idx], wt, dim=X.dim)
    cert = ApproxCertificate(eps, float(sum(e.error for e in log)), tuple(log), len(P), n, b)
    if return_index:
        return P, cert, idx
    return P, cert


def weight_buckets(weights):
    """Dyadic bucket id floor(log2(w / w_min)) for every weight."""
    w = np.asarray(weights, dtype=np.float64)
    r = w / np.min(w)
    b = np.floor(np.log2(r)).astype(np.int64)
    b[r < 1.0] = 0
    return b


def weighted_epsilon_approx(X, cfg, return_index=False):
    """Weighted approximation by dyadic weight buckets.

    Each bucket of weights within a factor two is reduced separately; the
    union is charged the weight-averaged bucket errors.
    """
    if len(X) < 1:
        raise ValueError("empty input")
    if np.any(X.weights <= 0):
        raise ValueError("weights must be positive")
    bk = weight_buckets(X.weights)
    ids = np.unique(bk)
    if len(ids) == 1:
        return epsilon_approx(X, cfg, return_index)
    W = X.total_weight
    parts, idxs, log = [], [], []
    acc = 0.0
    warnings = []
    for b in ids:
        sel = np.flatnonzero(bk == b)
        sub = X.subset(sel)
        P, cert, loc = epsilon_approx(sub, cfg, return_index=True)
        share = sub.total_weight / W
        acc += share * cert.accumulated_error
        log.extend(LogEntry(f"bucket{b}:{e.stage}", e.size, share * e.error) for e in cert.halve_log)
        parts.append(P)
        idxs.append(sel[loc])
        if cert.warning:
            warnings.append(f"bucket {b}: {cert.warning}")
    idx = np.concatenate(idxs)
    order = np.argsort(idx, kind="stable")
    P = WeightedPointSet.concat(parts, dim=X.dim)
    P = WeightedPointSet(P.points[order], P.weights[order], dim=X.dim)
    cert = ApproxCertificate(cfg.eps, float(sum(e.error for e in log)), tuple(log), len(P), len(X),
                             cfg.block_size, "; ".join(warnings) or None)
    if return_index:
        return P, cert, idx[order]
    return P, cert


def baseline_size(eps, delta_fail, c=8.0):
    return int(math.ceil(c / eps ** 2 * math.log(1.0 / (eps * delta_fail))))


def random_sample_baseline(X, eps, delta_fail, seed=0):
    """Uniform sample without replacement, reweighted to keep total weight."""
    if not (0 < eps < 1) or not (0 < delta_fail < 1):
        raise ValueError("eps and delta_fail must lie in (0, 1)")
    n = len(X)
    m = min(n, baseline_size(eps, delta_fail))
    if m >= n:
        return X
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    sub = X.subset(idx)
    return sub.scaled(X.total_weight / sub.total_weight)
