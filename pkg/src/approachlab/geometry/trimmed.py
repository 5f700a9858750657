"""Robust-mean and maximin targets over (trimmed) epoch clouds.

Both operations are small LPs at heart. The trimmed set Q_int never needs
to be materialized: every direction lam yields a valid outer constraint
<lam, x> <= offmax^N(projections), and exact 2-D depth supplies a violated
direction whenever a candidate point escapes the set, so cutting planes
converge to the exact answer for cloud dimension <= 2.
"""

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .. import _kernels
from ..errors import Infeasible
from .depth import depth_with_direction, halfspace_depth, _depth_1d, DEPTH_TIE_TOL
from .offsetmax import offmax
from .primitives import as_points

TV_GAP = 1e-4
MAXIMIN_GAP = 1e-4


def _region_directions(k, count=64, seed=0):
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((4 * count, k))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _offmax_rhs(pts, lam, removals):
    proj = lam @ pts.T
    if removals == 0:
        return np.max(proj, axis=1)
    return -np.partition(-proj, removals, axis=1)[:, removals]


def _violated_direction(x, pts, removals, tol=DEPTH_TIE_TOL):
    """A direction certifying depth(x) <= removals, or None if none exists."""
    k = pts.shape[1]
    if k == 1:
        xv = float(x[0])
        if _depth_1d(xv, pts[:, 0], tol) > removals:
            return None
        lo = int(np.sum(pts[:, 0] >= xv - tol))
        return np.array([1.0]) if lo <= removals else np.array([-1.0])
    if k == 2:
        dep, lam = depth_with_direction(x, pts, tol=tol)
        return None if dep > removals else lam
    # sampled upper bound only; best effort in higher dimension
    dep = halfspace_depth(x, pts, method="sampled")
    if dep > removals:
        return None
    rng = np.random.default_rng(int(1e6 * abs(float(np.sum(x)))) % (2**31))
    diffs = pts - x
    lam = rng.standard_normal((20000, k))
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    counts = np.sum(lam @ diffs.T >= -tol, axis=1)
    return lam[int(np.argmin(counts))]


def tv_closest_mean(epoch_cloud, removals, tol=TV_GAP, max_cuts=60):
    """Reweighting of the epoch closest to uniform whose mean stays in Q_int.

    Minimizes sum_i |alpha_i - 1/n| subject to alpha in the simplex and
    sum_i alpha_i ell_i in the trimmed set with the given removal budget.
    Returns (alpha, mean, tv). Raises Infeasible when no reweighted mean can
    reach the trimmed set (removal budget too large for the epoch).
    """
    pts = as_points(epoch_cloud)
    n, k = pts.shape
    if removals < 0 or removals >= n:
        raise Infeasible(f"removals={removals} with only {n} epoch points")
    if removals == 0:
        alpha = np.full(n, 1.0 / n)
        return alpha, alpha @ pts, 0.0

    lam = _region_directions(k)
    rows = [(lam, _offmax_rhs(pts, lam, removals))]

    # variables z = [alpha (n), s (n)], objective sum(s)
    c = np.concatenate([np.zeros(n), np.ones(n)])
    eye = sparse.eye(n, format="csr")
    A_abs = sparse.vstack([sparse.hstack([eye, -eye]), sparse.hstack([-eye, -eye])], format="csr")
    b_abs = np.concatenate([np.full(n, 1.0 / n), np.full(n, -1.0 / n)])
    A_eq = sparse.hstack([sparse.csr_matrix(np.ones((1, n))), sparse.csr_matrix((1, n))])
    bounds = [(0.0, None)] * (2 * n)

    for _ in range(max_cuts):
        lam_all = np.vstack([r[0] for r in rows])
        b_all = np.concatenate([r[1] for r in rows])
        A_reg = sparse.hstack(
            [sparse.csr_matrix(lam_all @ pts.T), sparse.csr_matrix((lam_all.shape[0], n))]
        )
        res = linprog(
            c,
            A_ub=sparse.vstack([A_abs, A_reg], format="csr"),
            b_ub=np.concatenate([b_abs, b_all]),
            A_eq=A_eq,
            b_eq=np.array([1.0]),
            bounds=bounds,
            method="highs",
        )
        if res.status == 2:
            raise Infeasible("no reweighted epoch mean lies in the trimmed set")
        if not res.success:
            raise RuntimeError(f"tv_closest_mean LP failed: {res.message}")
        alpha = np.clip(res.x[:n], 0.0, None)
        alpha /= alpha.sum()
        mean = alpha @ pts
        cut = _violated_direction(mean, pts, removals)
        if cut is None:
            tv = float(np.sum(np.abs(alpha - 1.0 / n)))
            return alpha, mean, tv
        rows.append((cut[None, :], _offmax_rhs(pts, cut[None, :], removals)))
    raise RuntimeError("tv_closest_mean cut generation did not converge")


def _directional_game(instance, lam):
    """Closure evaluating g(ell) = min_p <lam, u(p, ell)> and a supgradient."""
    c0, cp, cl, M = instance.payoff.direction_coeffs(lam)

    def g(ell):
        val, p_min = instance.player_set.min_linear(cp + M @ ell)
        return c0 + float(cl @ ell) + val, cl + M.T @ p_min

    return g


def _hull_rows_2d(pts):
    hull = _kernels.convex_hull_2d(pts)
    if hull.shape[0] == 1:
        v = hull[0]
        return np.vstack([np.eye(2), -np.eye(2)]), np.concatenate([v, -v])
    if hull.shape[0] == 2:
        a, b = hull
        t = b - a
        t = t / np.linalg.norm(t)
        nrm = np.array([t[1], -t[0]])
        lam = np.vstack([nrm, -nrm, t, -t])
        rhs = np.array([nrm @ a, -(nrm @ a), max(t @ a, t @ b), -min(t @ a, t @ b)])
        return lam, rhs
    e = np.roll(hull, -1, axis=0) - hull
    nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    return nrm, np.sum(nrm * hull, axis=1)


def _hull_rows(pts):
    k = pts.shape[1]
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.array([pts.max(), -pts.min()])
    if k == 2:
        return _hull_rows_2d(pts)
    from scipy.spatial import ConvexHull  # noqa: PLC0415

    hull = ConvexHull(pts)
    eq = hull.equations  # A x + b <= 0
    return eq[:, :-1], -eq[:, -1]


def _frank_wolfe_maximin(g, pts, tol, iters=4000):
    n = pts.shape[0]
    w = np.full(n, 1.0 / n)
    best_val, best_pt = -np.inf, w @ pts
    for it in range(iters):
        ell = w @ pts
        val, sg = g(ell)
        if val > best_val:
            best_val, best_pt = val, ell.copy()
        scores = pts @ sg
        s = int(np.argmax(scores))
        gap = float(scores[s] - sg @ ell)
        if gap <= tol and it > 32:
            break
        gamma = 2.0 / (it + 2.0)
        w *= 1.0 - gamma
        w[s] += gamma
    return best_pt


def maximin_point(lam, q_cloud, instance, removals=0, tol=MAXIMIN_GAP, max_iters=200):
    """argmax over the (trimmed) cloud hull of min_p <lam, u(p, ell)>.

    The inner minimum is evaluated through the structural payoff
    representation (closed form for balls/boxes, vertex scan for polytopes),
    making g concave in ell; the outer maximization is Kelley's cutting-plane
    method over the hull (or trimmed-set) constraints. Dimension <= 3 for
    the certified path; higher dimensions use a Frank-Wolfe fallback
    (removals=0 only). Ties (lam = 0) resolve to the cloud mean.
    """
    pts = as_points(q_cloud)
    n, k = pts.shape
    lam = np.asarray(lam, dtype=np.float64)
    if np.linalg.norm(lam) <= 1e-12:
        return pts.mean(axis=0)
    g = _directional_game(instance, lam)
    if n == 1:
        return pts[0].copy()
    if removals == 0 and k > 3:
        return _frank_wolfe_maximin(g, pts, tol)
    if removals > 0 and k > 2:
        raise NotImplementedError("trimmed maximin is supported for cloud dimension <= 2")

    if removals == 0:
        reg_lam, reg_b = _hull_rows(pts)
        seed = pts.mean(axis=0)
    else:
        reg_lam, reg_b = _hull_rows(pts)
        extra = _region_directions(k)
        reg_lam = np.vstack([reg_lam, extra])
        reg_b = np.concatenate([reg_b, _offmax_rhs(pts, extra, removals)])
        _, seed, _ = tv_closest_mean(pts, removals)

    best_val, best_sg = g(seed)
    best_pt = seed.copy()
    mean_val = best_val
    obj_rows = [(best_sg, best_val - best_sg @ seed)]

    lo = pts.min(axis=0) - 1.0
    hi = pts.max(axis=0) + 1.0
    bounds = [(float(a), float(b)) for a, b in zip(lo, hi)] + [(-4.0, 4.0)]
    c = np.zeros(k + 1)
    c[-1] = -1.0  # maximize s
    region = [reg_lam, reg_b]

    for _ in range(max_iters):
        m_obj = len(obj_rows)
        A = np.zeros((m_obj + region[0].shape[0], k + 1))
        b = np.zeros(m_obj + region[0].shape[0])
        for i, (sg, b0) in enumerate(obj_rows):
            A[i, :k] = -sg
            A[i, k] = 1.0
            b[i] = b0
        A[m_obj:, :k] = region[0]
        b[m_obj:] = region[1]
        res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        if not res.success:
            break
        ell = res.x[:k]
        s_star = res.x[k]
        if removals > 0:
            cut = _violated_direction(ell, pts, removals)
            if cut is not None:
                region[0] = np.vstack([region[0], cut[None, :]])
                region[1] = np.concatenate(
                    [region[1], _offmax_rhs(pts, cut[None, :], removals)]
                )
                val, sg = g(ell)  # objective cut is valid everywhere
                obj_rows.append((sg, val - sg @ ell))
                continue
        val, sg = g(ell)
        if val > best_val:
            best_val, best_pt = val, ell.copy()
        obj_rows.append((sg, val - sg @ ell))
        if s_star - best_val <= tol:
            break
    if abs(best_val - mean_val) <= 1e-12:
        return seed  # flat objective: documented tie rule
    return best_pt
