"""Hull distances, support functions, and projections over finite point clouds."""

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import EmptyCloud

# Numeric defaults, overridable per call.
MNP_GAP = 1e-8          # Frank-Wolfe stopping gap for the min-norm point
MNP_MAX_ITER = 10_000
MEMBERSHIP_TOL = 1e-9
DUALITY_DIRECTIONS = 512


@dataclass(frozen=True)
class PointCloud:
    """Finite point set in loss or payoff space, optionally tagged by round."""

    points: np.ndarray
    rounds: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=np.float64)))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def as_points(cloud) -> np.ndarray:
    """Accept a PointCloud or any array-like; return an (n, k) float array."""
    if isinstance(cloud, PointCloud):
        pts = cloud.points
    else:
        pts = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if pts.size == 0:
        raise EmptyCloud("operation requires a nonempty point cloud")
    return pts


def support(cloud, lam) -> float:
    """Support value max_i <point_i, lam>."""
    pts = as_points(cloud)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape[0] != pts.shape[1]:
        raise ValueError(f"direction dim {lam.shape[0]} != cloud dim {pts.shape[1]}")
    return float(np.max(pts @ lam))


def dist_to_hull(x, cloud, gap=MNP_GAP, max_iter=MNP_MAX_ITER):
    """Distance from x to conv(cloud) with the achieving convex weights.

    Min-norm point by away-step Frank-Wolfe over the weight simplex with
    exact line search; stops once the Frank-Wolfe gap falls below ``gap``.
    Returns (distance, weights).
    """
    pts = as_points(cloud)
    x = np.asarray(x, dtype=np.float64)
    n, k = pts.shape
    if x.shape[0] != k:
        raise ValueError(f"point dim {x.shape[0]} != cloud dim {k}")
    if n == 1:
        return float(np.linalg.norm(x - pts[0])), np.ones(1)

    w = np.zeros(n)
    w[int(np.argmin(np.linalg.norm(pts - x, axis=1)))] = 1.0
    y = w @ pts
    for _ in range(max_iter):
        g = pts @ (y - x)  # gradient of 0.5*||w@pts - x||^2 wrt w
        gw = float(w @ g)
        s = int(np.argmin(g))
        fw_gap = gw - g[s]
        if fw_gap <= gap:
            break
        active = w > 1e-16
        a_candidates = np.where(active)[0]
        a = a_candidates[int(np.argmax(g[a_candidates]))]
        away_gap = g[a] - gw
        if fw_gap >= away_gap:
            d = -w.copy()
            d[s] += 1.0
            gamma_max = 1.0
            dgap = fw_gap
        else:
            d = w.copy()
            d[a] -= 1.0
            wa = w[a]
            if wa >= 1.0 - 1e-16:
                gamma_max = 0.0
            else:
                gamma_max = wa / (1.0 - wa)
            dgap = away_gap
        dv = d @ pts
        den = float(dv @ dv)
        if den <= 1e-300 or gamma_max <= 0.0:
            break
        gamma = min(gamma_max, dgap / den)
        w = w + gamma * d
        np.clip(w, 0.0, None, out=w)
        w /= w.sum()
        y = w @ pts
    return float(np.linalg.norm(y - x)), w


def project_to_hull(x, cloud, gap=MNP_GAP, max_iter=MNP_MAX_ITER):
    """Euclidean projection of x onto conv(cloud), via the min-norm witness."""
    pts = as_points(cloud)
    _, w = dist_to_hull(x, pts, gap=gap, max_iter=max_iter)
    return w @ pts


def _unit_directions(k, m, seed=0):
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((m, k))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _face_edge_normals_3d(x, pts):
    """Directions from segments/faces of a small 3-D cloud toward x.

    When x is outside the hull, the optimal separating direction points
    from the nearest face, edge, or vertex; enumerating all point pairs
    and triples covers each case exactly.
    """
    n = pts.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            d = pts[j] - pts[i]
            den = float(d @ d)
            if den <= 1e-28:
                continue
            t = min(1.0, max(0.0, float((x - pts[i]) @ d) / den))
            v = x - (pts[i] + t * d)
            nv = np.linalg.norm(v)
            if nv > 1e-14:
                out.append(v / nv)
            for l in range(j + 1, n):
                nrm = np.cross(d, pts[l] - pts[i])
                nn = np.linalg.norm(nrm)
                if nn <= 1e-14:
                    continue
                nrm = nrm / nn
                if float(nrm @ (x - pts[i])) < 0:
                    nrm = -nrm
                out.append(nrm)
    return np.array(out) if out else np.zeros((0, 3))


def dist_via_support(x, cloud, directions=DUALITY_DIRECTIONS, refine=True, seed=0):
    """Dual distance estimate sup_lam <lam, x> - sigma(lam) over unit lam.

    Independent of :func:`dist_to_hull`; always a lower bound on the true
    distance, clamped at 0. With refinement it matches the primal value to
    1e-4 in dimension <= 3 (exactly in 2-D, where the optimal direction is
    an edge normal or points from a vertex to x).
    """
    pts = as_points(cloud)
    x = np.asarray(x, dtype=np.float64)
    k = pts.shape[1]
    cands = [_unit_directions(k, directions, seed=seed)]
    diffs = x[None, :] - pts
    norms = np.linalg.norm(diffs, axis=1)
    keep = norms > 1e-14
    if np.any(keep):
        cands.append(diffs[keep] / norms[keep, None])
    if k == 2 and pts.shape[0] >= 3:
        hull = _kernels.convex_hull_2d(pts)
        if hull.shape[0] >= 2:
            e = np.roll(hull, -1, axis=0) - hull
            nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)  # outward normals (CCW hull)
            ln = np.linalg.norm(nrm, axis=1)
            good = ln > 1e-14
            cands.append(nrm[good] / ln[good, None])
    if k == 3 and pts.shape[0] <= 60:
        cands.append(_face_edge_normals_3d(x, pts))
    lam = np.vstack(cands)
    vals = lam @ x - np.max(lam @ pts.T, axis=1)
    best = int(np.argmax(vals))
    best_val, best_lam = float(vals[best]), lam[best]
    if refine and k in (2, 3):
        rng = np.random.default_rng(seed + 1)
        scale = 0.5
        for _ in range(24):
            local = best_lam[None, :] + scale * rng.standard_normal((192, k))
            local /= np.linalg.norm(local, axis=1, keepdims=True)
            lv = local @ x - np.max(local @ pts.T, axis=1)
            j = int(np.argmax(lv))
            if lv[j] > best_val:
                best_val, best_lam = float(lv[j]), local[j]
            scale /= 2.0
    return max(best_val, 0.0)
