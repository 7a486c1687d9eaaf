# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Each function matches its twin in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt, INFINITY
from libc.stdlib cimport malloc, realloc, free, qsort
from libc.string cimport memset

cnp.import_array()

ctypedef cnp.int64_t i64

cdef double PIVOT_TOL = 1e-10


# ---------------------------------------------------------------- max box

cdef inline void _combine(double* sm, double* pre, i64* pre_e, double* suf, i64* suf_s,
                          double* bst, i64* bl, i64* br, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t a = 2 * k
    cdef Py_ssize_t b = 2 * k + 1
    cdef double c
    sm[k] = sm[a] + sm[b]
    c = sm[a] + pre[b]
    if pre[a] >= c:
        pre[k] = pre[a]
        pre_e[k] = pre_e[a]
    else:
        pre[k] = c
        pre_e[k] = pre_e[b]
    c = sm[b] + suf[a]
    if c >= suf[b]:
        suf[k] = c
        suf_s[k] = suf_s[a]
    else:
        suf[k] = suf[b]
        suf_s[k] = suf_s[b]
    bst[k] = bst[a]
    bl[k] = bl[a]
    br[k] = br[a]
    c = suf[a] + pre[b]
    if c > bst[k]:
        bst[k] = c
        bl[k] = suf_s[a]
        br[k] = pre_e[b]
    if bst[b] > bst[k]:
        bst[k] = bst[b]
        bl[k] = bl[b]
        br[k] = br[b]


def max_box_2d(i64[::1] ix, i64[::1] iy, double[::1] w, Py_ssize_t nx, Py_ssize_t ny):
    """Maximum-sum nonempty box over a sparse weighted grid (segment tree)."""
    cdef Py_ssize_t n = ix.shape[0]
    cdef Py_ssize_t P = 1
    while P < nx:
        P *= 2
    cdef Py_ssize_t m = 2 * P
    sm_a = np.zeros(m); pre_a = np.zeros(m); suf_a = np.zeros(m); bst_a = np.zeros(m)
    pe_a = np.zeros(m, dtype=np.int64); ss_a = np.zeros(m, dtype=np.int64)
    bl_a = np.zeros(m, dtype=np.int64); br_a = np.zeros(m, dtype=np.int64)
    cdef double[::1] sm = sm_a, pre = pre_a, suf = suf_a, bst = bst_a
    cdef i64[::1] pe = pe_a, ss = ss_a, bl = bl_a, br = br_a
    order = np.argsort(np.asarray(iy), kind="stable").astype(np.int64)
    cdef i64[::1] od = order
    start_a = np.zeros(ny + 1, dtype=np.int64)
    np.add.at(start_a, np.asarray(iy) + 1, 1)
    start_a = np.cumsum(start_a).astype(np.int64)
    cdef i64[::1] rs = start_a
    cdef Py_ssize_t a, b, q, k, i, p
    cdef double best = -INFINITY
    cdef i64 bx0 = 0, bx1 = 0, by0 = 0, by1 = 0
    cdef double v
    with nogil:
        for a in range(ny):
            for i in range(P):
                k = P + i
                sm[k] = 0.0
                pe[k] = i
                ss[k] = i
                bl[k] = i
                br[k] = i
                if i < nx:
                    pre[k] = 0.0
                    suf[k] = 0.0
                    bst[k] = 0.0
                else:
                    pre[k] = -INFINITY
                    suf[k] = -INFINITY
                    bst[k] = -INFINITY
            for k in range(P - 1, 0, -1):
                _combine(&sm[0], &pre[0], &pe[0], &suf[0], &ss[0], &bst[0], &bl[0], &br[0], k)
            for b in range(a, ny):
                for q in range(rs[b], rs[b + 1]):
                    p = od[q]
                    k = P + ix[p]
                    v = sm[k] + w[p]
                    sm[k] = v
                    pre[k] = v
                    suf[k] = v
                    bst[k] = v
                    k >>= 1
                    while k >= 1:
                        _combine(&sm[0], &pre[0], &pe[0], &suf[0], &ss[0], &bst[0], &bl[0], &br[0], k)
                        k >>= 1
                if bst[1] > best:
                    best = bst[1]
                    bx0 = bl[1]
                    bx1 = br[1]
                    by0 = a
                    by1 = b
    return best, int(bx0), int(bx1), int(by0), int(by1)


cdef struct Node2:
    double sm, hp, hs, hb, lp, ls, lb


cdef inline double _mx(double a, double b) noexcept nogil:
    return a if a >= b else b


cdef inline double _mn(double a, double b) noexcept nogil:
    return a if a <= b else b


cdef inline void _comb2(Node2* t, Py_ssize_t k) noexcept nogil:
    cdef Node2* a = &t[2 * k]
    cdef Node2* b = &t[2 * k + 1]
    cdef Node2* o = &t[k]
    o.sm = a.sm + b.sm
    o.hp = _mx(a.hp, a.sm + b.hp)
    o.hs = _mx(b.hs, b.sm + a.hs)
    o.hb = _mx(_mx(a.hb, b.hb), a.hs + b.hp)
    o.lp = _mn(a.lp, a.sm + b.lp)
    o.ls = _mn(b.ls, b.sm + a.ls)
    o.lb = _mn(_mn(a.lb, b.lb), a.ls + b.lp)


def max_abs_box(i64[::1] ix, i64[::1] iy, double[::1] w, Py_ssize_t nx, Py_ssize_t ny):
    """Largest |box sum| over a sparse weighted grid, value only."""
    cdef Py_ssize_t n = ix.shape[0]
    cdef Py_ssize_t P = 1
    while P < nx:
        P *= 2
    cdef Node2* t = <Node2*> malloc(2 * P * sizeof(Node2))
    if t == NULL:
        raise MemoryError()
    order = np.argsort(np.asarray(iy), kind="stable").astype(np.int64)
    cdef i64[::1] od = order
    start_a = np.zeros(ny + 1, dtype=np.int64)
    np.add.at(start_a, np.asarray(iy) + 1, 1)
    start_a = np.cumsum(start_a).astype(np.int64)
    cdef i64[::1] rs = start_a
    cdef Py_ssize_t a, b, q, k, i, p
    cdef double hi = -INFINITY, lo = INFINITY, v
    with nogil:
        for a in range(ny):
            for i in range(P):
                k = P + i
                t[k].sm = 0.0
                if i < nx:
                    t[k].hp = 0.0; t[k].hs = 0.0; t[k].hb = 0.0
                    t[k].lp = 0.0; t[k].ls = 0.0; t[k].lb = 0.0
                else:
                    t[k].hp = -INFINITY; t[k].hs = -INFINITY; t[k].hb = -INFINITY
                    t[k].lp = INFINITY; t[k].ls = INFINITY; t[k].lb = INFINITY
            for k in range(P - 1, 0, -1):
                _comb2(t, k)
            for b in range(a, ny):
                for q in range(rs[b], rs[b + 1]):
                    p = od[q]
                    k = P + ix[p]
                    v = t[k].sm + w[p]
                    t[k].sm = v
                    t[k].hp = v; t[k].hs = v; t[k].hb = v
                    t[k].lp = v; t[k].ls = v; t[k].lb = v
                    k >>= 1
                    while k >= 1:
                        _comb2(t, k)
                        k >>= 1
                if t[1].hb > hi:
                    hi = t[1].hb
                if t[1].lb < lo:
                    lo = t[1].lb
    free(t)
    if n == 0 or ny == 0:
        return 0.0
    return _mx(hi, -lo)


def max_box_dense(double[:, ::1] g):
    """Maximum-sum nonempty axis box of a dense array (Kadane over row pairs)."""
    cdef Py_ssize_t nr = g.shape[0], nc = g.shape[1]
    col_a = np.zeros(nc)
    cdef double[::1] col = col_a
    cdef Py_ssize_t r0, r1, c, st
    cdef double best = -INFINITY, cur
    cdef i64 a0 = 0, a1 = 0, c0 = 0, c1 = 0
    with nogil:
        for r0 in range(nr):
            for c in range(nc):
                col[c] = 0.0
            for r1 in range(r0, nr):
                for c in range(nc):
                    col[c] += g[r1, c]
                cur = -INFINITY
                st = 0
                for c in range(nc):
                    if cur < 0.0:
                        cur = col[c]
                        st = c
                    else:
                        cur = cur + col[c]
                    if cur > best:
                        best = cur
                        a0 = r0
                        a1 = r1
                        c0 = st
                        c1 = c
    return best, int(a0), int(a1), int(c0), int(c1)


# ---------------------------------------------------------- Beck-Fiala core

cdef int _cmp_i64(const void* a, const void* b) noexcept nogil:
    cdef i64 x = (<i64*>a)[0]
    cdef i64 y = (<i64*>b)[0]
    return (x > y) - (x < y)


cdef void _nullvec(double* A, Py_ssize_t r, Py_ssize_t c, double* v, i64* pivcols) noexcept nogil:
    cdef Py_ssize_t row = 0, col, i, j, p, np_ = 0, free_col = 0
    cdef double best, piv, fi, tmp
    for col in range(c):
        if row == r:
            break
        p = row
        best = fabs(A[row * c + col])
        for i in range(row + 1, r):
            if fabs(A[i * c + col]) > best:
                best = fabs(A[i * c + col])
                p = i
        if best <= PIVOT_TOL:
            continue
        if p != row:
            for j in range(c):
                tmp = A[row * c + j]
                A[row * c + j] = A[p * c + j]
                A[p * c + j] = tmp
        piv = A[row * c + col]
        for j in range(c):
            A[row * c + j] = A[row * c + j] / piv
        for i in range(r):
            if i == row:
                continue
            fi = A[i * c + col]
            if fi != 0.0:
                for j in range(c):
                    A[i * c + j] = A[i * c + j] - fi * A[row * c + j]
        pivcols[np_] = col
        np_ += 1
        row += 1
    for j in range(c):
        v[j] = 0.0
    # first non-pivot column
    i = 0
    for j in range(c):
        if i < np_ and pivcols[i] == j:
            i += 1
        else:
            free_col = j
            break
    v[free_col] = 1.0
    for i in range(np_):
        v[pivcols[i]] = -A[i * c + free_col]


def bf_core(Py_ssize_t n, i64[::1] row_ptr, i64[::1] row_idx, i64[::1] pt_ptr, i64[::1] pt_rows,
            i64 t, i64[::1] order, Py_ssize_t window, i64 full_row, double tol=1e-9):
    """Windowed iterated rounding; returns the final fractional vector."""
    cdef Py_ssize_t nrows = row_ptr.shape[0] - 1
    x_a = np.zeros(n)
    cdef double[::1] x = x_a
    fl_a = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] floating = fl_a
    cnt_a = np.diff(np.asarray(row_ptr)).astype(np.int64)
    cdef i64[::1] cnt = cnt_a
    tight_a = np.ones(nrows, dtype=np.uint8)
    cdef cnp.uint8_t[::1] tight = tight_a
    stamp_a = np.full(nrows, -1, dtype=np.int64)
    cdef i64[::1] stamp = stamp_a
    colpos_a = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] colpos = colpos_a

    cdef Py_ssize_t cap_sel = n + 1
    cdef i64* sel = <i64*>malloc(cap_sel * sizeof(i64))
    cdef Py_ssize_t cap_rows = 1024
    cdef i64* cand = <i64*>malloc(cap_rows * sizeof(i64))
    cdef i64* mand = <i64*>malloc(cap_rows * sizeof(i64))
    cdef i64* opt = <i64*>malloc(cap_rows * sizeof(i64))
    cdef Py_ssize_t cap_A = (window + 1) * (window + 1)
    cdef double* A = <double*>malloc(cap_A * sizeof(double))
    cdef double* d = <double*>malloc(cap_sel * sizeof(double))
    cdef i64* piv = <i64*>malloc(cap_sel * sizeof(i64))

    cdef Py_ssize_t nfloat = n, pos = 0, i, j, k, q, ns, nc, nm, no, room, nch, it = 0, attempt
    cdef i64 r, v_, p, big
    cdef double up, dn, step, xv
    if sel == NULL or cand == NULL or mand == NULL or opt == NULL or A == NULL or d == NULL or piv == NULL:
        raise MemoryError()
    big = (t + 1) * nrows
    try:
        while nfloat > 0:
            while not floating[order[pos]]:
                pos += 1
            ns = 0
            i = pos
            while ns < window + 1 and i < n:
                if floating[order[i]]:
                    sel[ns] = order[i]
                    ns += 1
                i += 1
            for attempt in range(2):
                it += 1
                nc = 0
                for k in range(ns):
                    v_ = sel[k]
                    for q in range(pt_ptr[v_], pt_ptr[v_ + 1]):
                        r = pt_rows[q]
                        if tight[r] and stamp[r] != it:
                            stamp[r] = it
                            if nc == cap_rows:
                                cap_rows *= 2
                                cand = <i64*>realloc(cand, cap_rows * sizeof(i64))
                                mand = <i64*>realloc(mand, cap_rows * sizeof(i64))
                                opt = <i64*>realloc(opt, cap_rows * sizeof(i64))
                                if cand == NULL or mand == NULL or opt == NULL:
                                    raise MemoryError()
                            cand[nc] = r
                            nc += 1
                nm = 0
                no = 0
                for k in range(nc):
                    r = cand[k]
                    if cnt[r] > t:
                        mand[nm] = r
                        nm += 1
                    else:
                        opt[no] = (0 if r == full_row else big) + (t - cnt[r]) * nrows + r
                        no += 1
                if nm < ns or ns == nfloat:
                    break
                ns = 0
                for i in range(n):
                    if floating[order[i]]:
                        sel[ns] = order[i]
                        ns += 1
            qsort(mand, nm, sizeof(i64), _cmp_i64)
            qsort(opt, no, sizeof(i64), _cmp_i64)
            room = ns - 1 - nm
            if room < 0:
                room = 0
            if room > no:
                room = no
            for k in range(room, no):
                tight[opt[k] % nrows] = 0
            nch = nm + room
            for k in range(ns):
                colpos[sel[k]] = k
            if nch > 0:
                if nch * ns > cap_A:
                    cap_A = nch * ns
                    A = <double*>realloc(A, cap_A * sizeof(double))
                    if A == NULL:
                        raise MemoryError()
                memset(A, 0, nch * ns * sizeof(double))
                for k in range(nch):
                    r = mand[k] if k < nm else opt[k - nm] % nrows
                    for q in range(row_ptr[r], row_ptr[r + 1]):
                        p = colpos[row_idx[q]]
                        if p >= 0:
                            A[k * ns + p] = 1.0
                _nullvec(A, nch, ns, d, piv)
            else:
                for k in range(ns):
                    d[k] = 0.0
                d[0] = 1.0
            for k in range(ns):
                colpos[sel[k]] = -1
            up = INFINITY
            dn = INFINITY
            for k in range(ns):
                xv = x[sel[k]]
                if d[k] > 0:
                    up = min(up, (1.0 - xv) / d[k])
                    dn = min(dn, (xv + 1.0) / d[k])
                elif d[k] < 0:
                    up = min(up, (-1.0 - xv) / d[k])
                    dn = min(dn, (xv - 1.0) / d[k])
            step = up if up <= dn else -dn
            for k in range(ns):
                v_ = sel[k]
                xv = x[v_] + step * d[k]
                if fabs(xv) >= 1.0 - tol:
                    xv = 1.0 if xv > 0 else -1.0
                    floating[v_] = 0
                    nfloat -= 1
                    for q in range(pt_ptr[v_], pt_ptr[v_ + 1]):
                        cnt[pt_rows[q]] -= 1
                x[v_] = xv
    finally:
        free(sel); free(cand); free(mand); free(opt); free(A); free(d); free(piv)
    return x_a


# ------------------------------------------------------- scan enumerations

def rect_pair_table(i64[::1] ix, i64[::1] iy, i64[::1] um, i64[::1] ub,
                    Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t nm, Py_ssize_t nb):
    """Achievable (count_M, count_B) pairs with first lexicographic witness."""
    seen_a = np.zeros((nm + 1, nb + 1), dtype=np.uint8)
    wit_a = np.full((nm + 1, nb + 1, 4), -1, dtype=np.int64)
    gm_a = np.zeros((nx, ny), dtype=np.int64)
    gb_a = np.zeros((nx, ny), dtype=np.int64)
    np.add.at(gm_a, (np.asarray(ix), np.asarray(iy)), np.asarray(um))
    np.add.at(gb_a, (np.asarray(ix), np.asarray(iy)), np.asarray(ub))
    cdef cnp.uint8_t[:, ::1] seen = seen_a
    cdef i64[:, :, ::1] wit = wit_a
    cdef i64[:, ::1] gm = gm_a, gb = gb_a
    cm_a = np.zeros(ny, dtype=np.int64)
    cb_a = np.zeros(ny, dtype=np.int64)
    cdef i64[::1] cm = cm_a, cb = cb_a
    cdef Py_ssize_t x1, x2, y1, y2
    cdef i64 sm, sb
    with nogil:
        for x1 in range(nx):
            for y1 in range(ny):
                cm[y1] = 0
                cb[y1] = 0
            for x2 in range(x1, nx):
                for y1 in range(ny):
                    cm[y1] += gm[x2, y1]
                    cb[y1] += gb[x2, y1]
                for y1 in range(ny):
                    sm = 0
                    sb = 0
                    for y2 in range(y1, ny):
                        sm += cm[y2]
                        sb += cb[y2]
                        if not seen[sm, sb]:
                            seen[sm, sb] = 1
                            wit[sm, sb, 0] = x1
                            wit[sm, sb, 1] = x2
                            wit[sm, sb, 2] = y1
                            wit[sm, sb, 3] = y2
    return seen_a.astype(bool), wit_a


def rect_stat_max(i64[::1] ix, i64[::1] iy, double[::1] wm, double[::1] wb,
                  Py_ssize_t nx, Py_ssize_t ny, int mode, double p0, double p1, double p2):
    """Best rectangle under a built-in statistic (0 linear, 1 Poisson)."""
    gm_a = np.zeros((nx, ny))
    gb_a = np.zeros((nx, ny))
    np.add.at(gm_a, (np.asarray(ix), np.asarray(iy)), np.asarray(wm))
    np.add.at(gb_a, (np.asarray(ix), np.asarray(iy)), np.asarray(wb))
    cdef double[:, ::1] gm = gm_a, gb = gb_a
    cm_a = np.zeros(ny)
    cb_a = np.zeros(ny)
    cdef double[::1] cm = cm_a, cb = cb_a
    cdef Py_ssize_t x1, x2, y1, y2
    cdef double sm, sb, m, b, val, best = -INFINITY, bm = 0.0, bb = 0.0
    cdef i64 a0 = 0, a1 = 0, a2 = 0, a3 = 0
    with nogil:
        for x1 in range(nx):
            for y1 in range(ny):
                cm[y1] = 0.0
                cb[y1] = 0.0
            for x2 in range(x1, nx):
                for y1 in range(ny):
                    cm[y1] += gm[x2, y1]
                    cb[y1] += gb[x2, y1]
                for y1 in range(ny):
                    sm = 0.0
                    sb = 0.0
                    for y2 in range(y1, ny):
                        sm += cm[y2]
                        sb += cb[y2]
                        if mode == 0:
                            val = p0 * sm + p1 * sb + p2
                        else:
                            m = min(max(sm, p0), 1.0 - p0)
                            b = min(max(sb, p0), 1.0 - p0)
                            val = m * log(m / b) + (1.0 - m) * log((1.0 - m) / (1.0 - b))
                        if val > best:
                            best = val
                            a0 = x1; a1 = x2; a2 = y1; a3 = y2
                            bm = sm; bb = sb
    return best, int(a0), int(a1), int(a2), int(a3), bm, bb


# ------------------------------------------------------------ cell masses

cdef Py_ssize_t _clip_half(double* px, double* py, Py_ssize_t m, int axis, double bound, bint keep_le,
                           double* ox, double* oy) noexcept nogil:
    cdef Py_ssize_t k, o = 0
    cdef double dp, dq, s, ax, ay, bx, by
    for k in range(m):
        ax = px[k]; ay = py[k]
        bx = px[(k + 1) % m]; by = py[(k + 1) % m]
        if axis == 0:
            dp = (ax - bound) if keep_le else (bound - ax)
            dq = (bx - bound) if keep_le else (bound - bx)
        else:
            dp = (ay - bound) if keep_le else (bound - ay)
            dq = (by - bound) if keep_le else (bound - by)
        if dp <= 0:
            ox[o] = ax; oy[o] = ay; o += 1
        if (dp < 0 and 0 < dq) or (dq < 0 and 0 < dp):
            s = dp / (dp - dq)
            ox[o] = ax + s * (bx - ax)
            oy[o] = ay + s * (by - ay)
            o += 1
    return o


def cell_masses(double[:, :, ::1] tris, double[:, ::1] coeffs, double[::1] xs, double[::1] ys):
    """Integral of a piecewise-linear height over every grid cell."""
    cdef Py_ssize_t ncx = xs.shape[0] - 1, ncy = ys.shape[0] - 1, m = tris.shape[0]
    out_a = np.zeros((ncx, ncy))
    cdef double[:, ::1] out = out_a
    cdef double bx[16]
    cdef double by[16]
    cdef double cx[16]
    cdef double cy[16]
    cdef Py_ssize_t t_, i, j, i0, i1, j0, j1, k, nv
    cdef double lx, hx, ly, hy, area, mx, my, cr, a, b, c
    xs_np = np.asarray(xs)
    ys_np = np.asarray(ys)
    tri_np = np.asarray(tris)
    lo = tri_np.min(axis=1)
    hi = tri_np.max(axis=1)
    ri0 = np.maximum(np.searchsorted(xs_np, lo[:, 0], side="right") - 1, 0).astype(np.int64)
    ri1 = np.minimum(np.searchsorted(xs_np, hi[:, 0], side="left"), ncx).astype(np.int64)
    rj0 = np.maximum(np.searchsorted(ys_np, lo[:, 1], side="right") - 1, 0).astype(np.int64)
    rj1 = np.minimum(np.searchsorted(ys_np, hi[:, 1], side="left"), ncy).astype(np.int64)
    cdef i64[::1] I0 = ri0, I1 = ri1, J0 = rj0, J1 = rj1
    with nogil:
        for t_ in range(m):
            a = coeffs[t_, 0]; b = coeffs[t_, 1]; c = coeffs[t_, 2]
            for i in range(I0[t_], I1[t_]):
                for j in range(J0[t_], J1[t_]):
                    for k in range(3):
                        bx[k] = tris[t_, k, 0]
                        by[k] = tris[t_, k, 1]
                    nv = _clip_half(bx, by, 3, 0, xs[i + 1], True, cx, cy)
                    if nv == 0:
                        continue
                    nv = _clip_half(cx, cy, nv, 0, xs[i], False, bx, by)
                    if nv == 0:
                        continue
                    nv = _clip_half(bx, by, nv, 1, ys[j + 1], True, cx, cy)
                    if nv == 0:
                        continue
                    nv = _clip_half(cx, cy, nv, 1, ys[j], False, bx, by)
                    if nv < 3:
                        continue
                    area = 0.0; mx = 0.0; my = 0.0
                    for k in range(nv):
                        cr = bx[k] * by[(k + 1) % nv] - bx[(k + 1) % nv] * by[k]
                        area += cr
                        mx += (bx[k] + bx[(k + 1) % nv]) * cr
                        my += (by[k] + by[(k + 1) % nv]) * cr
                    out[i, j] += a * mx / 6.0 + b * my / 6.0 + c * area / 2.0
    return out_a


# ---------------------------------------------------------- sentinel scan

def sentinel_scan(i64[::1] ix, i64[::1] iy, double[::1] ind, double[::1] inp,
                  Py_ssize_t nx, Py_ssize_t ny, double need_d, double need_p,
                  double thr_d, double thr_p):
    """First rectangle violating either sentinel condition, in O(n^3)."""
    gd_a = np.zeros((nx, ny))
    gp_a = np.zeros((nx, ny))
    np.add.at(gd_a, (np.asarray(ix), np.asarray(iy)), np.asarray(ind))
    np.add.at(gp_a, (np.asarray(ix), np.asarray(iy)), np.asarray(inp))
    cdef double[:, ::1] gd = gd_a, gp = gp_a
    cd_a = np.zeros(ny)
    cp_a = np.zeros(ny)
    PD_a = np.zeros(ny + 1)
    PP_a = np.zeros(ny + 1)
    cdef double[::1] cd = cd_a, cp = cp_a, PD = PD_a, PP = PP_a
    cdef Py_ssize_t x1, x2, y1, e1, e2, j1, j2, y
    cdef int kind = 0
    cdef i64 r0 = -1, r1 = -1, r2 = -1, r3 = -1
    cdef bint v1, v2
    with nogil:
        for x1 in range(nx):
            for y in range(ny):
                cd[y] = 0.0
                cp[y] = 0.0
            for x2 in range(x1, nx):
                for y in range(ny):
                    cd[y] += gd[x2, y]
                    cp[y] += gp[x2, y]
                    PD[y + 1] = PD[y] + cd[y]
                    PP[y + 1] = PP[y] + cp[y]
                j1 = 1
                j2 = 1
                for y1 in range(ny):
                    e1 = j1 if j1 > y1 + 1 else y1 + 1
                    while e1 <= ny and PD[e1] - PD[y1] < need_d:
                        e1 += 1
                    j1 = e1
                    e2 = j2 if j2 > y1 + 1 else y1 + 1
                    while e2 <= ny and PP[e2] - PP[y1] < need_p:
                        e2 += 1
                    j2 = e2
                    v1 = e1 <= ny and PP[e1] - PP[y1] < thr_p
                    v2 = e2 <= ny and PD[e2] - PD[y1] < thr_d
                    if v1 or v2:
                        if v1 and (not v2 or e1 <= e2):
                            kind = 1
                            r3 = e1 - 1
                        else:
                            kind = 2
                            r3 = e2 - 1
                        r0 = x1; r1 = x2; r2 = y1
                        break
                if kind != 0:
                    break
            if kind != 0:
                break
    return kind, int(r0), int(r1), int(r2), int(r3)



# ------------------------------------------------------------- 1D sweeps

cdef inline double _anti(double c0, double c1, double c2, double u) noexcept nogil:
    return u * (c0 + u * (c1 / 2 + u * c2 / 3))


def sweep_1d(double[::1] breaks, double[:, ::1] coeffs, int mode):
    """Single pass over breakpoints and zeros; same candidates and ties as the NumPy twin."""
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t k, j, m
    cdef double a0, hi, c0, c1, c2, disc, sq, q, ra, rb, t
    cdef double pts[4]
    cdef double F = 0.0, best = 0.0, run_min = 0.0, gain
    cdef double x0 = breaks[0]
    cdef double best_l = x0, best_r = x0, min_x = x0
    with nogil:
        for k in range(n):
            a0 = breaks[k]
            hi = breaks[k + 1]
            c0 = coeffs[k, 0]
            c1 = coeffs[k, 1]
            c2 = coeffs[k, 2]
            m = 0
            if c2 == 0:
                if c1 != 0:
                    t = -c0 / c1 + a0
                    if t > a0 and t < hi:
                        pts[m] = t
                        m += 1
            else:
                disc = c1 * c1 - 4 * c2 * c0
                if disc >= 0:
                    sq = sqrt(disc)
                    q = -0.5 * (c1 + (sq if c1 >= 0 else -sq))
                    if q != 0:
                        ra = q / c2
                        rb = c0 / q
                        if rb < ra:
                            ra, rb = rb, ra
                        ra = ra + a0
                        rb = rb + a0
                        if ra > a0 and ra < hi:
                            pts[m] = ra
                            m += 1
                        if rb > a0 and rb < hi:
                            pts[m] = rb
                            m += 1
            pts[m] = hi
            m += 1
            t = a0
            for j in range(m):
                F += _anti(c0, c1, c2, pts[j] - a0) - _anti(c0, c1, c2, t - a0)
                t = pts[j]
                if mode == 0:
                    if F > best:
                        best = F
                        best_r = t
                else:
                    if F < run_min:
                        run_min = F
                        min_x = t
                    gain = F - run_min
                    if gain > best:
                        best = gain
                        best_l = min_x
                        best_r = t
    return best, best_l, best_r
