# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled 2-D geometry kernels.

Mirrors ``approachlab._kernels._ref`` function for function; array set-up
(dedup, sorting) stays in numpy, the inner loops are C. Semantics must match
the reference module exactly -- the equivalence is enforced by tests.
"""

from libc.math cimport sqrt, atan2, cos, sin, fmod, M_PI

import numpy as np


cdef inline double _cross3(double ox, double oy, double ax, double ay,
                           double bx, double by) nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


cdef _chain(double[:, ::1] uniq):
    # monotone chain over lexicographically sorted unique points
    cdef Py_ssize_t n = uniq.shape[0]
    cdef Py_ssize_t i, k = 0
    out = np.empty((2 * n, 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        while k > 1 and _cross3(o[k - 2, 0], o[k - 2, 1], o[k - 1, 0],
                                o[k - 1, 1], uniq[i, 0], uniq[i, 1]) <= 0.0:
            k -= 1
        o[k, 0] = uniq[i, 0]
        o[k, 1] = uniq[i, 1]
        k += 1
    cdef Py_ssize_t lower = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower and _cross3(o[k - 2, 0], o[k - 2, 1], o[k - 1, 0],
                                     o[k - 1, 1], uniq[i, 0], uniq[i, 1]) <= 0.0:
            k -= 1
        o[k, 0] = uniq[i, 0]
        o[k, 1] = uniq[i, 1]
        k += 1
    return out[: k - 1]


def convex_hull_2d(pts):
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) array")
    uniq = np.ascontiguousarray(np.unique(pts, axis=0))
    if uniq.shape[0] <= 2:
        return uniq
    hull = _chain(uniq)
    if hull.shape[0] < 3:  # all collinear
        return np.vstack([uniq[0], uniq[-1]])
    return hull


cdef inline void _seg_nearest(double px, double py, double ax, double ay,
                              double bx, double by, double *ox, double *oy) nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef double t
    if den <= 0.0:
        ox[0] = ax
        oy[0] = ay
        return
    t = ((px - ax) * dx + (py - ay) * dy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ox[0] = ax + t * dx
    oy[0] = ay + t * dy


cdef inline bint _inside(double px, double py, double[:, ::1] h, double tol) nogil:
    cdef Py_ssize_t n = h.shape[0], j, jn
    cdef double ex, ey, cr, elen, scale
    for j in range(n):
        jn = j + 1 if j + 1 < n else 0
        ex = h[jn, 0] - h[j, 0]
        ey = h[jn, 1] - h[j, 1]
        cr = ex * (py - h[j, 1]) - ey * (px - h[j, 0])
        elen = sqrt(ex * ex + ey * ey)
        scale = elen if elen > 1.0 else 1.0
        if cr < -tol * scale:
            return 0
    return 1


def points_in_hull_2d(xs, hull, double tol=1e-9):
    xs = np.ascontiguousarray(np.atleast_2d(np.asarray(xs, dtype=np.float64)))
    hull = np.ascontiguousarray(np.asarray(hull, dtype=np.float64))
    cdef double[:, ::1] x = xs
    cdef double[:, ::1] h = hull
    cdef Py_ssize_t m = x.shape[0], nh = h.shape[0], i
    if nh == 0:
        raise ValueError("empty hull")
    out = np.empty(m, dtype=bool)
    cdef unsigned char[::1] o = out.view(np.uint8)
    cdef double nx, ny, d
    if nh == 1:
        for i in range(m):
            d = sqrt((x[i, 0] - h[0, 0]) ** 2 + (x[i, 1] - h[0, 1]) ** 2)
            o[i] = d <= tol
        return out
    if nh == 2:
        for i in range(m):
            _seg_nearest(x[i, 0], x[i, 1], h[0, 0], h[0, 1], h[1, 0], h[1, 1],
                         &nx, &ny)
            d = sqrt((x[i, 0] - nx) ** 2 + (x[i, 1] - ny) ** 2)
            o[i] = d <= tol
        return out
    for i in range(m):
        o[i] = _inside(x[i, 0], x[i, 1], h, tol)
    return out


cdef double _dist_hull(double px, double py, double[:, ::1] h) nogil:
    cdef Py_ssize_t n = h.shape[0], j, jn
    cdef double nx, ny, d, best
    if n == 1:
        return sqrt((px - h[0, 0]) ** 2 + (py - h[0, 1]) ** 2)
    if n == 2:
        _seg_nearest(px, py, h[0, 0], h[0, 1], h[1, 0], h[1, 1], &nx, &ny)
        return sqrt((px - nx) ** 2 + (py - ny) ** 2)
    if _inside(px, py, h, 0.0):
        return 0.0
    best = 1e308
    for j in range(n):
        jn = j + 1 if j + 1 < n else 0
        _seg_nearest(px, py, h[j, 0], h[j, 1], h[jn, 0], h[jn, 1], &nx, &ny)
        d = sqrt((px - nx) ** 2 + (py - ny) ** 2)
        if d < best:
            best = d
    return best


def point_hull_distance_2d(x, hull):
    x = np.asarray(x, dtype=np.float64)
    hull = np.ascontiguousarray(np.asarray(hull, dtype=np.float64))
    if hull.shape[0] == 0:
        raise ValueError("empty hull")
    cdef double[:, ::1] h = hull
    return _dist_hull(x[0], x[1], h)


def project_to_hull_2d(x, hull):
    x = np.asarray(x, dtype=np.float64)
    hull = np.ascontiguousarray(np.asarray(hull, dtype=np.float64))
    cdef double[:, ::1] h = hull
    cdef Py_ssize_t n = h.shape[0], j, jn
    cdef double px = x[0], py = x[1]
    cdef double nx, ny, d, best, bx, by
    if n == 0:
        raise ValueError("empty hull")
    if n == 1:
        return hull[0].copy()
    if n == 2:
        _seg_nearest(px, py, h[0, 0], h[0, 1], h[1, 0], h[1, 1], &nx, &ny)
        return np.array([nx, ny])
    if _inside(px, py, h, 0.0):
        return x.copy()
    best = 1e308
    bx = h[0, 0]
    by = h[0, 1]
    for j in range(n):
        jn = j + 1 if j + 1 < n else 0
        _seg_nearest(px, py, h[j, 0], h[j, 1], h[jn, 0], h[jn, 1], &nx, &ny)
        d = sqrt((px - nx) ** 2 + (py - ny) ** 2)
        if d < best:
            best = d
            bx = nx
            by = ny
    return np.array([bx, by])


def halfspace_depth_2d(x, pts, double tol=1e-12):
    x = np.asarray(x, dtype=np.float64)
    pts = np.ascontiguousarray(np.asarray(pts, dtype=np.float64))
    cdef Py_ssize_t n = pts.shape[0]
    if n == 0:
        raise ValueError("empty cloud")
    diffs = np.ascontiguousarray(pts - x)
    cdef double[:, ::1] d = diffs
    cdef Py_ssize_t i, nf = 0, n_near = 0
    cdef double r
    far = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] f = far
    for i in range(n):
        r = sqrt(d[i, 0] * d[i, 0] + d[i, 1] * d[i, 1])
        if r > tol:
            f[nf, 0] = d[i, 0]
            f[nf, 1] = d[i, 1]
            nf += 1
        else:
            n_near += 1
    if nf == 0:
        return n_near
    theta = np.arctan2(far[:nf, 1], far[:nf, 0])
    brk = np.concatenate([theta + np.pi / 2.0, theta - np.pi / 2.0])
    brk = np.unique(np.mod(brk, 2.0 * np.pi))
    mids = np.mod((brk + np.roll(brk, -1)) / 2.0, 2.0 * np.pi)
    mids[-1] = np.mod((brk[-1] + brk[0] + 2.0 * np.pi) / 2.0, 2.0 * np.pi)
    cand = np.ascontiguousarray(np.concatenate([brk, mids]))
    cdef double[::1] c = cand
    cdef Py_ssize_t m = c.shape[0], j
    cdef Py_ssize_t cnt, best = nf + 1
    cdef double lx, ly
    with nogil:
        for j in range(m):
            lx = cos(c[j])
            ly = sin(c[j])
            cnt = 0
            for i in range(nf):
                if lx * f[i, 0] + ly * f[i, 1] >= -tol:
                    cnt += 1
            if cnt < best:
                best = cnt
    return n_near + best


def hull_stream_2d(pts):
    pts = np.ascontiguousarray(np.asarray(pts, dtype=np.float64))
    cdef Py_ssize_t T = pts.shape[0], t
    dists = np.zeros(T, dtype=np.float64)
    cdef double[::1] dv = dists
    if T == 0:
        return dists, pts.reshape(0, 2)
    hull = pts[0:1].copy()
    cdef double[:, ::1] h = hull
    cdef double dist
    for t in range(1, T):
        dist = _dist_hull(pts[t, 0], pts[t, 1], h)
        dv[t] = dist
        if dist > 0.0:
            hull = convex_hull_2d(np.vstack([hull, pts[t : t + 1]]))
            h = hull
    return dists, hull
