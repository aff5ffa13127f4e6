"""Pure-Python reference implementation of the loop geometry kernels.

Same algorithms and signatures as the compiled module; used when the
extension is unavailable or ``LOOPSOUP_PURE_PYTHON=1`` is set.
Intersections are found by a vectorized all-pairs test instead of a
spatial hash.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np


def find_intersections(xs, ys, cell=None):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    n = len(xs) - 1
    ax, ay = xs[:-1], ys[:-1]
    bx, by = xs[1:] - ax, ys[1:] - ay
    I, J = np.triu_indices(n, k=2)
    keep = ~((I == 0) & (J == n - 1))
    I, J = I[keep], J[keep]
    # bounding-box rejection before the exact test
    lo_x = np.minimum(xs[:-1], xs[1:])
    hi_x = np.maximum(xs[:-1], xs[1:])
    lo_y = np.minimum(ys[:-1], ys[1:])
    hi_y = np.maximum(ys[:-1], ys[1:])
    ov = (lo_x[I] <= hi_x[J]) & (lo_x[J] <= hi_x[I]) & (lo_y[I] <= hi_y[J]) & (lo_y[J] <= hi_y[I])
    I, J = I[ov], J[ov]
    den = bx[I] * by[J] - by[I] * bx[J]
    nz = den != 0.0
    I, J, den = I[nz], J[nz], den[nz]
    ex, ey = ax[J] - ax[I], ay[J] - ay[I]
    t = (ex * by[J] - ey * bx[J]) / den
    u = (ex * by[I] - ey * bx[I]) / den
    ok = (t > 0) & (t < 1) & (u > 0) & (u < 1)
    return I[ok].astype(np.int64), J[ok].astype(np.int64), t[ok], u[ok]


def _cw_angle(ra, a):
    d = ra - a
    while d <= 0.0:
        d += 2.0 * math.pi
    while d > 2.0 * math.pi:
        d -= 2.0 * math.pi
    return d


def outer_boundary(xs, ys, cell=None):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    n = len(xs) - 1
    si, sj, ti, tj = find_intersections(xs, ys)
    m = len(si)
    per_seg = [[] for _ in range(n)]
    for k in range(m):
        per_seg[si[k]].append((ti[k], n + k))
        per_seg[sj[k]].append((tj[k], n + k))
    nxs = np.concatenate([xs[:n], xs[si] + ti * (xs[si + 1] - xs[si])])
    nys = np.concatenate([ys[:n], ys[si] + ti * (ys[si + 1] - ys[si])])
    seq = []
    for s in range(n):
        seq.append(s)
        seq.extend(node for _, node in sorted(per_seg[s]))
    L = len(seq)
    seq.append(0)
    occ = [[] for _ in range(n + m)]
    for k in range(L):
        occ[seq[k]].append(k)
    s0 = int(np.lexsort((nys[:n], nxs[:n]))[0])
    prev = (nxs[s0] - 1.0, nys[s0])
    u = s0
    out = []
    first_next = None
    steps = 0
    while True:
        ra = math.atan2(prev[1] - nys[u], prev[0] - nxs[u])
        best, bestang = -1, 1e9
        for k in occ[u]:
            for kk in (k - 1 if k > 0 else L - 1, k + 1):
                v = seq[kk]
                if v == u:
                    continue
                ang = _cw_angle(ra, math.atan2(nys[v] - nys[u], nxs[v] - nxs[u]))
                if ang < bestang:
                    bestang, best = ang, v
        if u == s0 and steps > 0 and best == first_next:
            break
        if steps == 0:
            first_next = best
        out.append(u)
        prev = (nxs[u], nys[u])
        u = best
        steps += 1
        if steps > 4 * L + 4:
            break
    out.append(out[0])
    return nxs[out].copy(), nys[out].copy()


def winding_number(xs, ys, px, py):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    x0, y0, x1, y1 = xs[:-1], ys[:-1], xs[1:], ys[1:]
    cr = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (cr > 0)
    down = (y0 > py) & (y1 <= py) & (cr < 0)
    return int(up.sum() - down.sum())


def min_distance_to_path(xs, ys, px, py):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    dx, dy = np.diff(xs), np.diff(ys)
    ex, ey = px - xs[:-1], py - ys[:-1]
    l2 = dx * dx + dy * dy
    t = np.where(l2 > 0, (ex * dx + ey * dy) / np.where(l2 > 0, l2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return float(np.sqrt(np.min((ex - t * dx) ** 2 + (ey - t * dy) ** 2)))


def fill_contains_many(xs, ys, px, py, cell=None):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    out = np.zeros(len(px), np.uint8)
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    pending = []
    for k, (a, b) in enumerate(zip(px, py)):
        if a <= x0 or a >= x1 or b <= y0 or b >= y1:
            continue
        if winding_number(xs, ys, a, b) != 0:
            out[k] = 1
        else:
            pending.append(k)
    if pending:
        bx, by = outer_boundary(xs, ys)
        for k in pending:
            if winding_number(bx, by, px[k], py[k]) != 0:
                out[k] = 1
    return out


def flood_fill_grid(xs, ys, x0, y0, h, nx, ny):
    g = np.zeros((nx, ny), np.uint8)
    xs = (np.asarray(xs, float) - x0) / h
    ys = (np.asarray(ys, float) - y0) / h
    for k in range(len(xs) - 1):
        L = max(abs(xs[k + 1] - xs[k]), abs(ys[k + 1] - ys[k]))
        ms = int(L * 4) + 1
        t = np.arange(ms + 1) / ms
        i = np.floor(xs[k] + (xs[k + 1] - xs[k]) * t).astype(int)
        j = np.floor(ys[k] + (ys[k + 1] - ys[k]) * t).astype(int)
        ok = (i >= 0) & (i < nx) & (j >= 0) & (j < ny)
        g[i[ok], j[ok]] = 1
    if g[0, 0] != 0:
        return g
    g[0, 0] = 2
    queue = deque([(0, 0)])
    while queue:
        i, j = queue.popleft()
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < nx and 0 <= b < ny and g[a, b] == 0:
                g[a, b] = 2
                queue.append((a, b))
    return g


def polygon_area(xs, ys):
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    return 0.5 * float(np.sum(xs[:-1] * ys[1:] - xs[1:] * ys[:-1]))
