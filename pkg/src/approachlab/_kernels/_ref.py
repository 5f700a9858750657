"""Pure-numpy reference implementations of the 2-D geometry kernels.

These are the import-time fallback for the compiled module
``approachlab._kernels._fast`` and the ground truth it is tested against.
All hulls are counterclockwise vertex arrays; degenerate hulls (single
point, segment) are represented by 1- or 2-row arrays.
"""

import numpy as np

__all__ = [
    "convex_hull_2d",
    "point_hull_distance_2d",
    "project_to_hull_2d",
    "points_in_hull_2d",
    "halfspace_depth_2d",
    "hull_stream_2d",
]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(pts):
    """Monotone-chain hull of an (n,2) array, CCW, collinear points dropped."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) array")
    uniq = np.unique(pts, axis=0)
    n = uniq.shape[0]
    if n <= 2:
        return uniq
    lower = []
    for p in uniq:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in uniq[::-1]:
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:  # all collinear
        return np.vstack([uniq[0], uniq[-1]])
    return np.array(hull)


def _segment_nearest(x, a, b):
    d = b - a
    den = float(d @ d)
    if den <= 0.0:
        return a
    t = float((x - a) @ d) / den
    t = min(1.0, max(0.0, t))
    return a + t * d


def points_in_hull_2d(xs, hull, tol=1e-9):
    """Boolean mask: which query points lie in the hull (within tol)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    hull = np.asarray(hull, dtype=np.float64)
    h = hull.shape[0]
    if h == 0:
        raise ValueError("empty hull")
    if h == 1:
        return np.linalg.norm(xs - hull[0], axis=1) <= tol
    if h == 2:
        out = np.empty(xs.shape[0], dtype=bool)
        for i, x in enumerate(xs):
            out[i] = np.linalg.norm(x - _segment_nearest(x, hull[0], hull[1])) <= tol
        return out
    a = hull
    b = np.roll(hull, -1, axis=0)
    e = b - a  # (h,2)
    # cross(e_j, x - a_j) >= -tol for all edges j
    cr = e[None, :, 0] * (xs[:, None, 1] - a[None, :, 1]) - e[None, :, 1] * (
        xs[:, None, 0] - a[None, :, 0]
    )
    elen = np.linalg.norm(e, axis=1)
    return np.all(cr >= -tol * np.maximum(elen, 1.0), axis=1)


def point_hull_distance_2d(x, hull):
    """Euclidean distance from a point to a CCW convex polygon (0 inside)."""
    x = np.asarray(x, dtype=np.float64)
    hull = np.asarray(hull, dtype=np.float64)
    h = hull.shape[0]
    if h == 0:
        raise ValueError("empty hull")
    if h == 1:
        return float(np.linalg.norm(x - hull[0]))
    if h == 2:
        return float(np.linalg.norm(x - _segment_nearest(x, hull[0], hull[1])))
    if points_in_hull_2d(x[None, :], hull, tol=0.0)[0]:
        return 0.0
    b = np.roll(hull, -1, axis=0)
    best = np.inf
    for j in range(h):
        d = np.linalg.norm(x - _segment_nearest(x, hull[j], b[j]))
        if d < best:
            best = d
    return float(best)


def project_to_hull_2d(x, hull):
    """Nearest point of a CCW convex polygon to x (x itself if inside)."""
    x = np.asarray(x, dtype=np.float64)
    hull = np.asarray(hull, dtype=np.float64)
    h = hull.shape[0]
    if h == 0:
        raise ValueError("empty hull")
    if h == 1:
        return hull[0].copy()
    if h == 2:
        return _segment_nearest(x, hull[0], hull[1])
    if points_in_hull_2d(x[None, :], hull, tol=0.0)[0]:
        return x.copy()
    b = np.roll(hull, -1, axis=0)
    best = np.inf
    best_p = hull[0]
    for j in range(h):
        p = _segment_nearest(x, hull[j], b[j])
        d = np.linalg.norm(x - p)
        if d < best:
            best = d
            best_p = p
    return best_p.copy()


def halfspace_depth_2d(x, pts, tol=1e-12):
    """Exact Tukey halfspace depth of x in a 2-D cloud.

    depth(x) = min over unit directions lam of
    #{i : <lam, p_i - x> >= -tol}.  The count is piecewise constant in the
    direction angle with breakpoints at angle(p_i - x) +- pi/2, so evaluating
    all breakpoints plus the midpoints of consecutive breakpoints is exact.
    """
    x = np.asarray(x, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty cloud")
    diffs = pts - x
    r = np.hypot(diffs[:, 0], diffs[:, 1])
    far = r > tol
    n_near = int(np.sum(~far))  # coincident points are counted for every lam
    d = diffs[far]
    if d.shape[0] == 0:
        return n_near
    theta = np.arctan2(d[:, 1], d[:, 0])
    brk = np.concatenate([theta + np.pi / 2.0, theta - np.pi / 2.0])
    brk = np.mod(brk, 2.0 * np.pi)
    brk = np.unique(brk)
    mids = np.mod((brk + np.roll(brk, -1)) / 2.0, 2.0 * np.pi)
    mids[-1] = np.mod((brk[-1] + brk[0] + 2.0 * np.pi) / 2.0, 2.0 * np.pi)
    cand = np.concatenate([brk, mids])
    lam = np.stack([np.cos(cand), np.sin(cand)], axis=1)
    counts = np.sum(lam @ d.T >= -tol, axis=1)
    return n_near + int(counts.min())


def hull_stream_2d(pts):
    """Incremental hull over a point stream.

    Returns (dists, hull) where dists[t] is the distance of pts[t] to the
    hull of pts[:t] (0 for t=0) and hull is the final CCW hull.
    """
    pts = np.asarray(pts, dtype=np.float64)
    T = pts.shape[0]
    dists = np.zeros(T)
    if T == 0:
        return dists, pts.reshape(0, 2)
    hull = pts[0:1].copy()
    for t in range(1, T):
        d = point_hull_distance_2d(pts[t], hull)
        dists[t] = d
        if d > 0.0:
            hull = convex_hull_2d(np.vstack([hull, pts[t]]))
    return dists, hull
