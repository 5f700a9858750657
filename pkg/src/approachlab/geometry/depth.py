"""Halfspace (Tukey) depth and the trimmed intersection set Q_int.

Membership in the trimmed set is a depth query: a point survives every
deletion of at most N cloud points iff every open halfspace containing it
holds more than N points, i.e. iff its halfspace depth exceeds N. The
equivalence is validated against subset enumeration in the test suite.

Exact depth is available for cloud dimension <= 2 (pairwise-normal
direction enumeration); higher dimensions fall back to direction sampling,
which upper-bounds the true depth.
"""

import numpy as np

from .. import _kernels
from ..errors import DimensionTooHigh, EmptyCloud
from .primitives import as_points
from .offsetmax import offmax

DEPTH_TIE_TOL = 1e-12
SAMPLED_DIRECTIONS = 100_000


def _depth_1d(x, pts, tol):
    lo = int(np.sum(pts >= x - tol))
    hi = int(np.sum(pts <= x + tol))
    return min(lo, hi)


def _depth_candidates_2d(x, pts, tol):
    """Candidate directions: breakpoint angles theta_i +- pi/2 plus arc midpoints."""
    diffs = pts - x
    r = np.hypot(diffs[:, 0], diffs[:, 1])
    far = diffs[r > tol]
    n_near = pts.shape[0] - far.shape[0]
    if far.shape[0] == 0:
        return n_near, far, np.zeros((0, 2))
    theta = np.arctan2(far[:, 1], far[:, 0])
    brk = np.unique(np.mod(np.concatenate([theta + np.pi / 2, theta - np.pi / 2]), 2 * np.pi))
    mids = np.mod((brk + np.roll(brk, -1)) / 2.0, 2 * np.pi)
    mids[-1] = np.mod((brk[-1] + brk[0] + 2 * np.pi) / 2.0, 2 * np.pi)
    ang = np.concatenate([brk, mids])
    return n_near, far, np.stack([np.cos(ang), np.sin(ang)], axis=1)


def depth_with_direction(x, cloud, tol=DEPTH_TIE_TOL):
    """Exact 2-D depth together with a direction achieving the minimum count."""
    pts = as_points(cloud)
    x = np.asarray(x, dtype=np.float64)
    if pts.shape[1] != 2:
        raise DimensionTooHigh("directional depth witness is exact only in 2-D")
    n_near, far, lam = _depth_candidates_2d(x, pts, tol)
    if lam.shape[0] == 0:
        return n_near, np.array([1.0, 0.0])
    counts = np.sum(lam @ far.T >= -tol, axis=1)
    j = int(np.argmin(counts))
    return n_near + int(counts[j]), lam[j]


def halfspace_depth(x, cloud, method="auto", directions=SAMPLED_DIRECTIONS,
                    seed=0, tol=DEPTH_TIE_TOL):
    """Tukey depth of x: min over unit lam of #{i : <lam, p_i - x> >= -tol}.

    ``method``: "exact" (dim <= 2 only), "sampled" (any dim, upper bound),
    or "auto" (exact when possible).
    """
    pts = as_points(cloud)
    x = np.asarray(x, dtype=np.float64)
    k = pts.shape[1]
    if method == "auto":
        method = "exact" if k <= 2 else "sampled"
    if method == "exact":
        if k == 1:
            return _depth_1d(float(x[0]), pts[:, 0], tol)
        if k == 2:
            return int(_kernels.halfspace_depth_2d(x, pts, tol))
        raise DimensionTooHigh(f"exact depth unsupported in dimension {k}")
    rng = np.random.default_rng(seed)
    diffs = pts - x
    best = pts.shape[0]
    best_lam = None
    chunk = 4096
    remaining = directions
    while remaining > 0:
        m = min(chunk, remaining)
        lam = rng.standard_normal((m, k))
        lam /= np.linalg.norm(lam, axis=1, keepdims=True)
        counts = np.sum(lam @ diffs.T >= -tol, axis=1)
        j = int(np.argmin(counts))
        if counts[j] < best:
            best = int(counts[j])
            best_lam = lam[j]
        remaining -= m
    if best_lam is not None:
        scale = 0.5
        for _ in range(12):
            lam = best_lam[None, :] + scale * rng.standard_normal((64, k))
            lam /= np.linalg.norm(lam, axis=1, keepdims=True)
            counts = np.sum(lam @ diffs.T >= -tol, axis=1)
            j = int(np.argmin(counts))
            if counts[j] < best:
                best = int(counts[j])
                best_lam = lam[j]
            scale /= 2.0
    return best


def q_int_membership(x, cloud, removals, method="auto", **kw) -> bool:
    """Is x in conv(cloud \\ R) for every removal set R with |R| <= removals?"""
    pts = as_points(cloud)
    if removals < 0 or removals >= pts.shape[0]:
        raise ValueError(f"removals={removals} must lie in [0, {pts.shape[0] - 1}]")
    return halfspace_depth(x, pts, method=method, **kw) > removals


def qint_halfspaces_2d(cloud, removals):
    """Exact outer description of the 2-D trimmed set as <lam_j, x> <= b_j rows.

    Directions are all pairwise normals (both signs); the offset in direction
    lam is the (removals+1)-th largest projection of the cloud. Facets of the
    depth region lie on lines through two cloud points, so this family is
    exact. Quadratic in the cloud size; meant for moderate clouds.
    """
    pts = as_points(cloud)
    n = pts.shape[0]
    if pts.shape[1] != 2:
        raise DimensionTooHigh("exact trimmed-set description requires 2-D")
    dirs = [np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])]
    if n >= 2:
        ii, jj = np.triu_indices(n, k=1)
        e = pts[jj] - pts[ii]
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        ln = np.linalg.norm(nrm, axis=1)
        good = nrm[ln > 1e-14] / ln[ln > 1e-14, None]
        dirs.append(good)
        dirs.append(-good)
    lam = np.vstack(dirs)
    proj = lam @ pts.T
    if removals == 0:
        b = np.max(proj, axis=1)
    else:
        b = -np.partition(-proj, removals, axis=1)[:, removals]
    return lam, b


def _clip_polygon(poly, a, b, tol=1e-12):
    """Sutherland-Hodgman clip of a convex polygon by <a, x> <= b."""
    if len(poly) == 0:
        return poly
    out = []
    vals = [float(a @ p) - b for p in poly]
    m = len(poly)
    for i in range(m):
        j = (i + 1) % m
        pi, pj = poly[i], poly[j]
        vi, vj = vals[i], vals[j]
        if vi <= tol:
            out.append(pi)
        if (vi <= tol) != (vj <= tol):
            t = vi / (vi - vj)
            out.append(pi + t * (pj - pi))
    return out


def qint_polygon_2d(cloud, removals, tol=1e-12):
    """Exact vertex list (CCW) of the 2-D trimmed set; empty array if void."""
    pts = as_points(cloud)
    lam, b = qint_halfspaces_2d(pts, removals)
    lo = pts.min(axis=0) - 1.0
    hi = pts.max(axis=0) + 1.0
    poly = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
            np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
    for a_j, b_j in zip(lam, b):
        poly = _clip_polygon(poly, a_j, b_j, tol=tol)
        if not poly:
            return np.zeros((0, 2))
    arr = np.array(poly)
    if arr.shape[0] <= 2:
        return arr
    return _kernels.convex_hull_2d(arr)
