"""Pure NumPy implementations of the hot kernels.

These mirror the compiled kernels in ``_ckernels.pyx`` and are used when the
extension is unavailable or ``EPSAPPROX_PURE=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np

PIVOT_TOL = 1e-10


def _best_subarray(vals):
    """Nonempty maximum-sum contiguous run of each row of ``vals``.

    Returns (best, lo, hi) arrays, one entry per row.
    """
    r, c = vals.shape
    pre = np.zeros((r, c + 1))
    np.cumsum(vals, axis=1, out=pre[:, 1:])
    runmin = np.minimum.accumulate(pre[:, :-1], axis=1)
    gain = pre[:, 1:] - runmin
    hi = np.argmax(gain, axis=1)
    best = gain[np.arange(r), hi]
    lo = np.empty(r, dtype=np.int64)
    for j in range(r):
        seg = pre[j, : hi[j] + 1]
        lo[j] = int(np.argmin(seg))
    return best, lo, hi


def max_box_dense(grid):
    """Maximum-sum nonempty axis box of a dense 2D array.

    Returns (best, r0, r1, c0, c1) with inclusive index bounds.
    """
    g = np.asarray(grid, dtype=np.float64)
    nr, nc = g.shape
    best = -math.inf
    arg = (0, 0, 0, 0)
    for r0 in range(nr):
        acc = np.cumsum(g[r0:], axis=0)
        b, lo, hi = _best_subarray(acc)
        j = int(np.argmax(b))
        if b[j] > best:
            best = float(b[j])
            arg = (r0, r0 + j, int(lo[j]), int(hi[j]))
    return (best,) + arg


def max_box_2d(ix, iy, w, nx, ny):
    """Maximum-sum nonempty box over a sparse weighted grid.

    Points sit at integer cells (ix, iy) of an nx-by-ny grid; cells without
    points count as zero.  Returns (best, x0, x1, y0, y1).
    """
    grid = np.zeros((ny, nx))
    np.add.at(grid, (np.asarray(iy), np.asarray(ix)), np.asarray(w, dtype=np.float64))
    best, r0, r1, c0, c1 = max_box_dense(grid)
    return best, c0, c1, r0, r1


def max_abs_box(ix, iy, w, nx, ny):
    """Largest |box sum| over a sparse weighted grid, value only."""
    if len(ix) == 0 or ny == 0:
        return 0.0
    grid = np.zeros((ny, nx))
    np.add.at(grid, (np.asarray(iy), np.asarray(ix)), np.asarray(w, dtype=np.float64))
    return max(max_box_dense(grid)[0], max_box_dense(-grid)[0])


def _nullvec(a):
    """A nonzero null vector of a short-wide matrix via Gauss-Jordan."""
    a = a.copy()
    r, c = a.shape
    v = np.zeros(c)
    pivcols = []
    row = 0
    for col in range(c):
        if row == r:
            break
        p = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[p, col]) <= PIVOT_TOL:
            continue
        if p != row:
            a[[row, p]] = a[[p, row]]
        a[row] = a[row] / a[row, col]
        f = a[:, col].copy()
        f[row] = 0.0
        a -= f[:, None] * a[row][None, :]
        pivcols.append(col)
        row += 1
    piv = set(pivcols)
    free = next(j for j in range(c) if j not in piv)
    v[free] = 1.0
    for k, col in enumerate(pivcols):
        v[col] = -a[k, free]
    return v


def bf_core(n, row_ptr, row_idx, pt_ptr, pt_rows, t, order, window, full_row, tol=1e-9):
    """Windowed iterated rounding; returns the final fractional vector.

    Rows with more than ``t`` floating variables are always kept tight.
    Among the rest, ``full_row`` goes first, then larger rows, up to one
    fewer than the window size; rows left out become loose for good.
    """
    nrows = len(row_ptr) - 1
    x = np.zeros(n)
    floating = np.ones(n, dtype=bool)
    cnt = np.diff(row_ptr).astype(np.int64)
    tight = np.ones(nrows, dtype=bool)
    nfloat = n
    pos = 0
    while nfloat > 0:
        while not floating[order[pos]]:
            pos += 1
        sel = []
        i = pos
        while len(sel) < window + 1 and i < n:
            if floating[order[i]]:
                sel.append(order[i])
            i += 1
        for attempt in range(2):
            cand = set()
            for v_ in sel:
                for r in pt_rows[pt_ptr[v_]:pt_ptr[v_ + 1]]:
                    if tight[r]:
                        cand.add(int(r))
            mand = sorted(r for r in cand if cnt[r] > t)
            if len(mand) < len(sel) or len(sel) == nfloat:
                break
            sel = [int(j) for j in order if floating[j]]
        opt = [r for r in cand if cnt[r] <= t]
        opt.sort(key=lambda r: (r != full_row, -cnt[r], r))
        room = max(len(sel) - 1 - len(mand), 0)
        chosen = mand + opt[:room]
        for r in opt[room:]:
            tight[r] = False
        col = {v_: j for j, v_ in enumerate(sel)}
        if chosen:
            a = np.zeros((len(chosen), len(sel)))
            for k, r in enumerate(chosen):
                for p in row_idx[row_ptr[r]:row_ptr[r + 1]]:
                    j = col.get(int(p))
                    if j is not None:
                        a[k, j] = 1.0
            d = _nullvec(a)
        else:
            d = np.zeros(len(sel))
            d[0] = 1.0
        xs = x[sel]
        up = math.inf
        dn = math.inf
        for j in range(len(sel)):
            if d[j] > 0:
                up = min(up, (1.0 - xs[j]) / d[j])
                dn = min(dn, (xs[j] + 1.0) / d[j])
            elif d[j] < 0:
                up = min(up, (-1.0 - xs[j]) / d[j])
                dn = min(dn, (xs[j] - 1.0) / d[j])
        step = up if up <= dn else -dn
        xs = xs + step * d
        for j, v_ in enumerate(sel):
            if abs(xs[j]) >= 1.0 - tol:
                xs[j] = 1.0 if xs[j] > 0 else -1.0
                floating[v_] = False
                nfloat -= 1
                cnt[pt_rows[pt_ptr[v_]:pt_ptr[v_ + 1]]] -= 1
        x[sel] = xs
    return x


def rect_pair_table(ix, iy, um, ub, nx, ny, nm, nb):
    """Achievable (count_M, count_B) pairs over all grid rectangles.

    Rectangles are [x1, x2] x [y1, y2] over compressed coordinates.  Returns
    a boolean table and, per reachable pair, the first rectangle in
    lexicographic (x1, x2, y1, y2) order.
    """
    seen = np.zeros((nm + 1, nb + 1), dtype=bool)
    wit = np.full((nm + 1, nb + 1, 4), -1, dtype=np.int64)
    gm = np.zeros((nx, ny), dtype=np.int64)
    gb = np.zeros((nx, ny), dtype=np.int64)
    np.add.at(gm, (ix, iy), um)
    np.add.at(gb, (ix, iy), ub)
    yi, yj = np.triu_indices(ny)
    for x1 in range(nx):
        cm = np.zeros(ny, dtype=np.int64)
        cb = np.zeros(ny, dtype=np.int64)
        for x2 in range(x1, nx):
            cm += gm[x2]
            cb += gb[x2]
            pm = np.concatenate(([0], np.cumsum(cm)))
            pb = np.concatenate(([0], np.cumsum(cb)))
            sm = pm[yj + 1] - pm[yi]
            sb = pb[yj + 1] - pb[yi]
            new = ~seen[sm, sb]
            if new.any():
                idx = np.nonzero(new)[0]
                key = sm[idx] * (nb + 1) + sb[idx]
                _, first = np.unique(key, return_index=True)
                idx = idx[first]
                seen[sm[idx], sb[idx]] = True
                wit[sm[idx], sb[idx]] = np.stack(
                    [np.full(len(idx), x1), np.full(len(idx), x2), yi[idx], yj[idx]], axis=1)
    return seen, wit


def rect_stat_max(ix, iy, wm, wb, nx, ny, mode, p0, p1, p2):
    """Best rectangle under a built-in statistic of weight fractions.

    mode 0: p0*m + p1*b + p2.  mode 1: Poisson with clamp p0.
    Returns (best, x1, x2, y1, y2, m, b).
    """
    gm = np.zeros((nx, ny))
    gb = np.zeros((nx, ny))
    np.add.at(gm, (ix, iy), wm)
    np.add.at(gb, (ix, iy), wb)
    yi, yj = np.triu_indices(ny)
    best = -math.inf
    arg = None
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
            if mode == 0:
                val = p0 * sm + p1 * sb + p2
            else:
                m = np.clip(sm, p0, 1 - p0)
                b = np.clip(sb, p0, 1 - p0)
                val = m * np.log(m / b) + (1 - m) * np.log((1 - m) / (1 - b))
            k = int(np.argmax(val))
            if val[k] > best:
                best = float(val[k])
                arg = (x1, x2, int(yi[k]), int(yj[k]), float(sm[k]), float(sb[k]))
    return (best,) + arg


def _clip_box(poly, x0, x1, y0, y1):
    for axis, bound, keep_le in ((0, x1, True), (0, x0, False), (1, y1, True), (1, y0, False)):
        if not poly:
            return poly
        out = []
        m = len(poly)
        for k in range(m):
            p = poly[k]
            q = poly[(k + 1) % m]
            dp = (p[axis] - bound) if keep_le else (bound - p[axis])
            dq = (q[axis] - bound) if keep_le else (bound - q[axis])
            if dp <= 0:
                out.append(p)
            if (dp < 0 < dq) or (dq < 0 < dp):
                s = dp / (dp - dq)
                out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
        poly = out
    return poly


def _poly_linear_integral(poly, a, b, c):
    area = 0.0
    mx = 0.0
    my = 0.0
    m = len(poly)
    for k in range(m):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % m]
        cr = x0 * y1 - x1 * y0
        area += cr
        mx += (x0 + x1) * cr
        my += (y0 + y1) * cr
    return a * mx / 6.0 + b * my / 6.0 + c * area / 2.0


def cell_masses(tris, coeffs, xs, ys):
    """Integral of a piecewise-linear height over every grid cell.

    ``tris`` is (m, 3, 2) counterclockwise, ``coeffs`` (m, 3) holds (a, b, c)
    of a*x + b*y + c, and the grid lines are ``xs`` and ``ys``.  Returns an
    array of shape (len(xs) - 1, len(ys) - 1).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.zeros((len(xs) - 1, len(ys) - 1))
    for tri, (a, b, c) in zip(np.asarray(tris), np.asarray(coeffs)):
        lo = tri.min(axis=0)
        hi = tri.max(axis=0)
        i0 = max(int(np.searchsorted(xs, lo[0], side="right")) - 1, 0)
        i1 = min(int(np.searchsorted(xs, hi[0], side="left")), len(xs) - 1)
        j0 = max(int(np.searchsorted(ys, lo[1], side="right")) - 1, 0)
        j1 = min(int(np.searchsorted(ys, hi[1], side="left")), len(ys) - 1)
        base = [tuple(map(float, p)) for p in tri]
        for i in range(i0, i1):
            for j in range(j0, j1):
                poly = _clip_box(base, xs[i], xs[i + 1], ys[j], ys[j + 1])
                if len(poly) >= 3:
                    out[i, j] += _poly_linear_integral(poly, a, b, c)
    return out


def sentinel_scan(ix, iy, ind, inp, nx, ny, need_d, need_p, thr_d, thr_p):
    """Search for a rectangle violating either sentinel condition.

    Points of the ground set sit at compressed (ix, iy) with ground weight
    ``ind`` and sentinel weight ``inp``.  Condition one fails on a rectangle
    with ground weight >= need_d and sentinel weight < thr_p.  Condition two
    fails on a rectangle with sentinel weight >= need_p and ground weight
    < thr_d.  Returns (kind, x1, x2, y1, y2) for the first violation in
    (x1, x2, y1, y2) order, or kind 0 if none.
    """
    gd = np.zeros((nx, ny))
    gp = np.zeros((nx, ny))
    np.add.at(gd, (ix, iy), ind)
    np.add.at(gp, (ix, iy), inp)
    yi, yj = np.triu_indices(ny)
    order = np.lexsort((yj, yi))
    yi = yi[order]
    yj = yj[order]
    for x1 in range(nx):
        cd = np.zeros(ny)
        cp = np.zeros(ny)
        for x2 in range(x1, nx):
            cd += gd[x2]
            cp += gp[x2]
            pd = np.concatenate(([0.0], np.cumsum(cd)))
            pp = np.concatenate(([0.0], np.cumsum(cp)))
            sd = pd[yj + 1] - pd[yi]
            sp = pp[yj + 1] - pp[yi]
            bad1 = (sd >= need_d) & (sp < thr_p)
            bad2 = (sp >= need_p) & (sd < thr_d)
            bad = bad1 | bad2
            if bad.any():
                k = int(np.argmax(bad))
                kind = 1 if bad1[k] else 2
                return kind, x1, x2, int(yi[k]), int(yj[k])
    return 0, -1, -1, -1, -1


def piece_roots(breaks, coeffs):
    """Interior zeros of each local quadratic piece, (N, 2) NaN-padded, sorted per row."""
    lo, hi = breaks[:-1], breaks[1:]
    c0, c1, c2 = coeffs.T
    r = np.full((len(coeffs), 2), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = c2 == 0
        r[:, 0] = np.where(lin & (c1 != 0), -c0 / c1, np.nan)
        if not lin.all():
            disc = c1 * c1 - 4 * c2 * c0
            sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
            q = -0.5 * (c1 + np.where(c1 >= 0, sq, -sq))
            ra = np.where(q != 0, q / c2, np.nan)
            rb = np.where(q != 0, c0 / q, np.nan)
            quad = ~lin
            r[quad, 0] = np.fmin(ra, rb)[quad]
            r[quad, 1] = np.fmax(ra, rb)[quad]
    r = r + lo[:, None]
    r[~((r > lo[:, None]) & (r < hi[:, None]))] = np.nan
    return r


def sweep_1d(breaks, coeffs, mode):
    """Prefix-integral sweep over breakpoints and zeros of a piecewise quadratic.

    mode 0: best prefix (value, start, t); mode 1: best contiguous run
    (value, l, r), or (0, start, start) when nothing is positive.
    """
    n = len(coeffs)
    xs = np.column_stack([breaks[:-1], piece_roots(breaks, coeffs)]).ravel()
    ks = np.repeat(np.arange(n), 3)
    ok = ~np.isnan(xs)
    xs = np.append(xs[ok], breaks[-1])
    ks = ks[ok]
    c = coeffs[ks]
    a0 = breaks[ks]

    def anti(u):
        return u * (c[:, 0] + u * (c[:, 1] / 2 + u * c[:, 2] / 3))

    F = np.concatenate(([0.0], np.cumsum(anti(xs[1:] - a0) - anti(xs[:-1] - a0))))
    if mode == 0:
        k = int(np.argmax(F))
        return float(F[k]), float(xs[0]), float(xs[k])
    run_min = np.minimum.accumulate(F)
    gain = F - run_min
    j = int(np.argmax(gain))
    if gain[j] <= 0:
        return 0.0, float(xs[0]), float(xs[0])
    i = int(np.argmax(F[:j + 1] == run_min[j]))
    return float(gain[j]), float(xs[i]), float(xs[j])
