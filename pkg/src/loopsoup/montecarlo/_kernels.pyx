# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels for discretized Brownian loops.

The filled interior of a closed polyline is the region bounded by its outer
boundary.  The boundary is traced exactly: all self-intersections are found
with a uniform-grid spatial hash, the polyline is split at them into a
planar graph, and the unbounded face is walked from the leftmost vertex
always taking the most clockwise turn.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, floor, sqrt, M_PI

cnp.import_array()


cdef inline double _cw_angle(double ra, double a):
    cdef double d = ra - a
    while d <= 0.0:
        d += 2.0 * M_PI
    while d > 2.0 * M_PI:
        d -= 2.0 * M_PI
    return d


def find_intersections(double[::1] xs, double[::1] ys, double cell):
    """Proper crossings between non-adjacent segments of a closed polyline.

    Returns ``(i, j, ti, tj)`` arrays with ``i < j`` the segment indices and
    ``ti``, ``tj`` the crossing parameters along each segment.
    """
    cdef Py_ssize_t n = xs.shape[0] - 1
    cdef Py_ssize_t s, i, j, c, p, q, r, a, b, ci, cj, nx, ny, i0, i1, j0, j1, m = 0, cap
    cdef double x0 = np.min(xs), y0 = np.min(ys), x1 = np.max(xs), y1 = np.max(ys)
    cdef double ax, ay, bx, by, cx, cy, dx, dy, den, ex, ey, t, u, px, py
    nx = <Py_ssize_t>((x1 - x0) / cell) + 1
    ny = <Py_ssize_t>((y1 - y0) / cell) + 1
    cdef cnp.int64_t[::1] cnt = np.zeros(nx * ny + 1, np.int64)
    for s in range(n):
        i0 = <Py_ssize_t>((min(xs[s], xs[s + 1]) - x0) / cell)
        i1 = <Py_ssize_t>((max(xs[s], xs[s + 1]) - x0) / cell)
        j0 = <Py_ssize_t>((min(ys[s], ys[s + 1]) - y0) / cell)
        j1 = <Py_ssize_t>((max(ys[s], ys[s + 1]) - y0) / cell)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                cnt[i * ny + j + 1] += 1
    for c in range(nx * ny):
        cnt[c + 1] += cnt[c]
    cdef cnp.int64_t[::1] fillp = np.array(cnt[: nx * ny], np.int64)
    cdef cnp.int64_t[::1] ent = np.empty(cnt[nx * ny], np.int64)
    for s in range(n):
        i0 = <Py_ssize_t>((min(xs[s], xs[s + 1]) - x0) / cell)
        i1 = <Py_ssize_t>((max(xs[s], xs[s + 1]) - x0) / cell)
        j0 = <Py_ssize_t>((min(ys[s], ys[s + 1]) - y0) / cell)
        j1 = <Py_ssize_t>((max(ys[s], ys[s + 1]) - y0) / cell)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                ent[fillp[i * ny + j]] = s
                fillp[i * ny + j] += 1
    cap = 16 * n + 16
    si_a = np.empty(cap, np.int64)
    sj_a = np.empty(cap, np.int64)
    ti_a = np.empty(cap)
    tj_a = np.empty(cap)
    cdef cnp.int64_t[::1] si = si_a, sj = sj_a
    cdef double[::1] ti = ti_a, tj = tj_a
    for c in range(nx * ny):
        a = cnt[c]
        b = cnt[c + 1]
        for p in range(a, b):
            s = ent[p]
            for q in range(p + 1, b):
                r = ent[q]
                i = min(s, r)
                j = max(s, r)
                if i == j or j == i + 1 or (i == 0 and j == n - 1):
                    continue
                ax = xs[i]; ay = ys[i]; bx = xs[i + 1] - ax; by = ys[i + 1] - ay
                cx = xs[j]; cy = ys[j]; dx = xs[j + 1] - cx; dy = ys[j + 1] - cy
                den = bx * dy - by * dx
                if den == 0.0:
                    continue
                ex = cx - ax; ey = cy - ay
                t = (ex * dy - ey * dx) / den
                u = (ex * by - ey * bx) / den
                if t <= 0.0 or t >= 1.0 or u <= 0.0 or u >= 1.0:
                    continue
                # count each crossing once: in the cell holding the point
                px = ax + t * bx; py = ay + t * by
                ci = <Py_ssize_t>((px - x0) / cell); cj = <Py_ssize_t>((py - y0) / cell)
                if ci * ny + cj != c:
                    continue
                if m >= cap:
                    cap *= 2
                    si_a = np.resize(si_a, cap); sj_a = np.resize(sj_a, cap)
                    ti_a = np.resize(ti_a, cap); tj_a = np.resize(tj_a, cap)
                    si = si_a; sj = sj_a; ti = ti_a; tj = tj_a
                si[m] = i; sj[m] = j; ti[m] = t; tj[m] = u
                m += 1
    return si_a[:m].copy(), sj_a[:m].copy(), ti_a[:m].copy(), tj_a[:m].copy()


def outer_boundary(double[::1] xs, double[::1] ys, double cell):
    """Vertices of the outer boundary of a closed polyline (first = last)."""
    cdef Py_ssize_t n = xs.shape[0] - 1
    si_a, sj_a, ti_a, tj_a = find_intersections(xs, ys, cell)
    cdef cnp.int64_t[::1] si = si_a, sj = sj_a
    cdef double[::1] ti = ti_a, tj = tj_a
    cdef Py_ssize_t m = si.shape[0]
    cdef Py_ssize_t k, s, p, a, b, q, u, v, kk, o, dk, s0, best, first_next, steps, no
    cdef Py_ssize_t N = n + m, L = n + 2 * m
    cdef cnp.int64_t[::1] segcnt = np.zeros(n + 1, np.int64)
    for k in range(m):
        segcnt[si[k] + 1] += 1
        segcnt[sj[k] + 1] += 1
    for s in range(n):
        segcnt[s + 1] += segcnt[s]
    cdef cnp.int64_t[::1] pos = np.array(segcnt[:n], np.int64)
    st_a = np.empty(2 * m)
    sn_a = np.empty(2 * m, np.int64)
    cdef double[::1] st = st_a
    cdef cnp.int64_t[::1] sn = sn_a
    for k in range(m):
        p = pos[si[k]]; st[p] = ti[k]; sn[p] = n + k; pos[si[k]] += 1
        p = pos[sj[k]]; st[p] = tj[k]; sn[p] = n + k; pos[sj[k]] += 1
    cdef double[::1] nxs = np.empty(N), nys = np.empty(N)
    for k in range(n):
        nxs[k] = xs[k]; nys[k] = ys[k]
    for k in range(m):
        s = si[k]
        nxs[n + k] = xs[s] + ti[k] * (xs[s + 1] - xs[s])
        nys[n + k] = ys[s] + ti[k] * (ys[s + 1] - ys[s])
    # node sequence along the path, intersections inserted in order
    cdef cnp.int64_t[::1] seq = np.empty(L + 1, np.int64)
    cdef double tkey
    cdef Py_ssize_t nkey
    q = 0
    for s in range(n):
        seq[q] = s; q += 1
        a = segcnt[s]; b = segcnt[s + 1]
        # insertion sort of the (few) crossings on this segment by parameter
        for p in range(a + 1, b):
            tkey = st[p]; nkey = sn[p]
            o = p - 1
            while o >= a and st[o] > tkey:
                st[o + 1] = st[o]; sn[o + 1] = sn[o]
                o -= 1
            st[o + 1] = tkey; sn[o + 1] = nkey
        for o in range(a, b):
            seq[q] = sn[o]; q += 1
    seq[L] = 0
    cdef cnp.int64_t[:, ::1] occ = np.full((N, 2), -1, np.int64)
    for k in range(L):
        u = seq[k]
        if occ[u, 0] < 0:
            occ[u, 0] = k
        else:
            occ[u, 1] = k
    s0 = 0
    for v in range(n):
        if nxs[v] < nxs[s0] or (nxs[v] == nxs[s0] and nys[v] < nys[s0]):
            s0 = v
    cdef double prevx = nxs[s0] - 1.0, prevy = nys[s0], ra, ang, bestang
    cdef cnp.int64_t[::1] out = np.empty(4 * L + 8, np.int64)
    no = 0
    u = s0
    first_next = -1
    steps = 0
    while True:
        ra = atan2(prevy - nys[u], prevx - nxs[u])
        best = -1
        bestang = 1e9
        for o in range(2):
            k = occ[u, o]
            if k < 0:
                continue
            for dk in (-1, 1):
                kk = k + dk
                if kk < 0:
                    kk = L - 1
                if kk > L:
                    kk = 1
                v = seq[kk]
                if v == u:
                    continue
                ang = _cw_angle(ra, atan2(nys[v] - nys[u], nxs[v] - nxs[u]))
                if ang < bestang:
                    bestang = ang
                    best = v
        if u == s0 and steps > 0 and best == first_next:
            break
        if steps == 0:
            first_next = best
        out[no] = u; no += 1
        prevx = nxs[u]; prevy = nys[u]
        u = best
        steps += 1
        if steps > 4 * L + 4:
            break
    bx = np.empty(no + 1)
    by = np.empty(no + 1)
    for k in range(no):
        bx[k] = nxs[out[k]]; by[k] = nys[out[k]]
    bx[no] = bx[0]; by[no] = by[0]
    return bx, by


def winding_number(double[::1] xs, double[::1] ys, double px, double py):
    cdef Py_ssize_t k, n = xs.shape[0] - 1
    cdef long w = 0
    cdef double cr
    for k in range(n):
        cr = (xs[k + 1] - xs[k]) * (py - ys[k]) - (px - xs[k]) * (ys[k + 1] - ys[k])
        if ys[k] <= py:
            if ys[k + 1] > py and cr > 0:
                w += 1
        elif ys[k + 1] <= py and cr < 0:
            w -= 1
    return w


def min_distance_to_path(double[::1] xs, double[::1] ys, double px, double py):
    cdef Py_ssize_t k, n = xs.shape[0] - 1
    cdef double best = 1e300, dx, dy, ex, ey, t, l2, d
    for k in range(n):
        dx = xs[k + 1] - xs[k]; dy = ys[k + 1] - ys[k]
        ex = px - xs[k]; ey = py - ys[k]
        l2 = dx * dx + dy * dy
        t = 0.0 if l2 == 0.0 else (ex * dx + ey * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        dx = ex - t * dx; dy = ey - t * dy
        d = dx * dx + dy * dy
        if d < best:
            best = d
    return sqrt(best)


def fill_contains_many(double[::1] xs, double[::1] ys, double[::1] px, double[::1] py, double cell):
    """Filled-interior membership of several points in one closed polyline.

    For a few points a nonzero winding number already implies membership
    and the outer boundary is traced only when some candidate has winding
    number zero; for many points the boundary is traced first and each
    point is tested against it alone.
    """
    cdef Py_ssize_t k, npts = px.shape[0]
    out_a = np.zeros(npts, np.uint8)
    cdef cnp.uint8_t[::1] out = out_a
    cdef double x0 = np.min(xs), x1 = np.max(xs), y0 = np.min(ys), y1 = np.max(ys)
    cdef bint need = False
    cdef Py_ssize_t ninside = 0
    cdef cnp.uint8_t[::1] pend = np.zeros(npts, np.uint8)
    for k in range(npts):
        if not (px[k] <= x0 or px[k] >= x1 or py[k] <= y0 or py[k] >= y1):
            pend[k] = 1
            ninside += 1
    if ninside > 8:
        need = True
    for k in range(npts):
        if need or not pend[k]:
            continue
        if winding_number(xs, ys, px[k], py[k]) != 0:
            pend[k] = 0
            out[k] = 1
        else:
            pend[k] = 1
            need = True
    if need:
        bx, by = outer_boundary(xs, ys, cell)
        for k in range(npts):
            if pend[k] and winding_number(bx, by, px[k], py[k]) != 0:
                out[k] = 1
    return out_a


def flood_fill_grid(double[::1] xs, double[::1] ys, double x0, double y0, double h,
                    Py_ssize_t nx, Py_ssize_t ny):
    """Rasterize a polyline and flood the exterior from the grid corner.

    Cell codes: 0 interior (filled), 1 path, 2 exterior.
    """
    g_a = np.zeros((nx, ny), np.uint8)
    cdef cnp.uint8_t[:, ::1] g = g_a
    cdef Py_ssize_t k, s, msteps, i, j, a, b, d, sp, n = xs.shape[0]
    cdef double ax, ay, bx, by, L, t
    for k in range(n - 1):
        ax = (xs[k] - x0) / h; ay = (ys[k] - y0) / h
        bx = (xs[k + 1] - x0) / h; by = (ys[k + 1] - y0) / h
        L = max(abs(bx - ax), abs(by - ay))
        msteps = <Py_ssize_t>(L * 4) + 1
        for s in range(msteps + 1):
            t = s / <double>msteps
            i = <Py_ssize_t>floor(ax + (bx - ax) * t)
            j = <Py_ssize_t>floor(ay + (by - ay) * t)
            if 0 <= i < nx and 0 <= j < ny:
                g[i, j] = 1
    cdef cnp.int64_t[:, ::1] stack = np.empty((nx * ny, 2), np.int64)
    if g[0, 0] != 0:
        return g_a
    g[0, 0] = 2
    stack[0, 0] = 0; stack[0, 1] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        i = stack[sp, 0]; j = stack[sp, 1]
        for d in range(4):
            a = i; b = j
            if d == 0:
                a += 1
            elif d == 1:
                a -= 1
            elif d == 2:
                b += 1
            else:
                b -= 1
            if 0 <= a < nx and 0 <= b < ny and g[a, b] == 0:
                g[a, b] = 2
                stack[sp, 0] = a; stack[sp, 1] = b
                sp += 1
    return g_a


def polygon_area(double[::1] xs, double[::1] ys):
    cdef Py_ssize_t k
    cdef double acc = 0.0
    for k in range(xs.shape[0] - 1):
        acc += xs[k] * ys[k + 1] - xs[k + 1] * ys[k]
    return 0.5 * acc
