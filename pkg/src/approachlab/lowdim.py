"""Fast-rate algorithms for low-dimensional instances.

One-dimensional payoffs: a no-regret expert learner over a finite action
set, reset whenever the running average crosses the target picked after the
first round. Two-dimensional adversary sets: play Blackwell-style forcing
against the growing hull of observed losses, feeding the learner the
projection of each loss onto the current hull; the cumulative projection
distance is O(sqrt(T)) in the plane, so the myopic hull estimate costs only
a T^{-1/2} term.
"""

import numpy as np

from .adversaries import AdversarySpec, make_adversary
from .core import GameInstance, RunningAverage
from .errors import DimensionMismatch, EmptyHull
from .framework import EpochSchedule, Transcript
from .geometry import Hull2D, dist_to_hull, hull2d_insert
from .learners import MsMwC, build_cover


def _one_dim_actions(instance: GameInstance, T: int):
    P = instance.player_set
    if P.kind in ("polytope", "box", "simplex"):
        ext = P.extreme_points()
        if ext is not None and ext.shape[0] <= 4096:
            return ext
    return build_cover(P, resolution=1.0 / np.sqrt(T)).points


def run_one_dim(instance: GameInstance, adversary, T: int, seed: int = 0,
                actions=None) -> Transcript:
    """Reset-on-crossing learner for payoff dimension 1.

    The target c = u(p*(ell_1), ell_1) is fixed after round 1; afterwards the
    expert oracle receives the signed losses s_t * u(., ell_t) and is reset
    whenever s_t differs from the previous round's sign (sign(0) inherits,
    first round defaults to +1). Plays the oracle's mixed action as a point
    of conv(P). Transcript extras: per-round sign and reset flag; meta:
    target c, reset times, |u_bar - c|.
    """
    if instance.d != 1:
        raise DimensionMismatch(f"one-dim algorithm needs payoff dimension 1, got {instance.d}")
    if isinstance(adversary, AdversarySpec):
        adversary = make_adversary(adversary, instance, T, seed)
    acts = np.atleast_2d(actions) if actions is not None else _one_dim_actions(instance, T)
    n = acts.shape[0]
    oracle = MsMwC(n, horizon=T)

    p_hist = np.empty((T, instance.d_p))
    ell_hist = np.empty((T, instance.d_l))
    u_hist = np.empty((T, 1))
    signs = np.ones(T)
    resets = np.zeros(T, dtype=bool)
    ravg = RunningAverage(1)
    cum_xy = 0.0
    cum_y = np.zeros(n)

    p1 = acts[0]
    ell1 = adversary.next(0, p_hist[:0], ell_hist[:0])
    u1 = instance.payoff.evaluate(p1, ell1)
    c = float(instance.payoff.evaluate(instance.response.evaluate(ell1), ell1)[0])
    p_hist[0], ell_hist[0], u_hist[0] = p1, ell1, u1
    ravg.update(u1)

    s_prev = 1.0
    reset_times = []
    for t in range(1, T):
        diff = float(ravg.mean[0]) - c
        s_t = s_prev if diff == 0.0 else float(np.sign(diff))
        if s_t != s_prev:
            oracle.reset()
            resets[t] = True
            reset_times.append(t)
        signs[t] = s_t
        s_prev = s_t
        x_t = oracle.play()
        p_t = x_t @ acts
        ell_t = adversary.next(t, p_hist[:t], ell_hist[:t])
        u_t = instance.payoff.evaluate(p_t, ell_t)
        p_hist[t], ell_hist[t], u_hist[t] = p_t, ell_t, u_t
        ravg.update(u_t)
        y = np.clip(s_t * instance.payoff.evaluate_many_p(acts, ell_t)[:, 0], -1.0, 1.0)
        cum_xy += float(x_t @ y)
        cum_y += y
        oracle.update(y)

    u_bar = ravg.mean.copy()
    tr = Transcript(
        schedule=EpochSchedule(T=T, L=1),
        p=p_hist, ell=ell_hist, u=u_hist,
        lambdas=np.zeros((1, 1)),
        u_star=np.array([[c]]),
        g=(u_bar - c)[None, :],
        err_diag=np.array([0.0]),
        inner_regret=np.array([cum_xy - float(cum_y.min())]),
        epoch_tv=np.array([np.nan]),
        target_points=ell_hist[0][None, :].copy(),
        outer_regret=0.0,
        u_bar=u_bar,
        extras={"sign": signs, "reset": resets.astype(int)},
    )
    tr.meta = {"c": c, "reset_times": reset_times, "dist_to_c": abs(float(u_bar[0]) - c)}
    return tr


def target_model_points(instance: GameInstance, hull: Hull2D, arc_res: float) -> np.ndarray:
    """Sampled model of S(conv(hull)): response image of vertices + boundary.

    Boundary points are spaced ``arc_res`` along each hull edge; exact for
    piecewise-constant responses aligned with the sample, an inner
    approximation otherwise.
    """
    v = hull.vertices
    if v.shape[0] == 1:
        pts = v
    elif v.shape[0] == 2:
        n_s = max(2, int(np.ceil(np.linalg.norm(v[1] - v[0]) / arc_res)) + 1)
        pts = np.linspace(v[0], v[1], n_s)
    else:
        segs = [v]
        nxt = np.roll(v, -1, axis=0)
        for a, b in zip(v, nxt):
            n_s = int(np.ceil(np.linalg.norm(b - a) / arc_res))
            if n_s > 1:
                ts = np.linspace(0.0, 1.0, n_s, endpoint=False)[1:]
                segs.append(a[None, :] + ts[:, None] * (b - a)[None, :])
        pts = np.vstack(segs)
    return instance.response_image(pts)


def base_approachability_step(u_bar_prev, s_model, hull_vertices, instance: GameInstance,
                              audit_actions, tol: float = 1e-9):
    """One forcing step of the hull-tracking approachability learner.

    Returns (p_t, lam_t). lam_t points from the projection of the driving
    average onto the sampled target model toward the average (zero inside,
    in which case the response to the hull centroid is played); p_t
    minimizes over the audit actions the worst directional payoff over the
    hull vertices.
    """
    hull_vertices = np.atleast_2d(hull_vertices)
    if hull_vertices.shape[0] == 0:
        raise EmptyHull("base approachability step needs a nonempty hull")
    dist, w = dist_to_hull(u_bar_prev, s_model)
    if dist <= tol:
        lam = np.zeros(instance.d)
        centroid = hull_vertices.mean(axis=0)
        return instance.response.evaluate(centroid), lam
    lam = (u_bar_prev - w @ np.atleast_2d(s_model)) / dist
    profile = instance.payoff.directional_profile(lam, audit_actions, hull_vertices)
    worst = profile.max(axis=1)
    return audit_actions[int(np.argmin(worst))].copy(), lam


def run_two_dim(instance: GameInstance, adversary, T: int, seed: int = 0,
                audit_actions=None) -> Transcript:
    """Hull-tracking approachability for 2-D adversary action sets.

    Maintains the growing hull of observed losses, projects each new loss
    onto it, and drives a forcing learner on the projected game. Transcript
    extras: per-round projection distance; meta: the cumulative projection
    distance, the projection-error and approachability-error terms of the
    distance decomposition, and the final target-model cloud.
    """
    if instance.d_l != 2:
        raise DimensionMismatch(f"two-dim algorithm needs adversary dimension 2, got {instance.d_l}")
    if isinstance(adversary, AdversarySpec):
        adversary = make_adversary(adversary, instance, T, seed)
    if audit_actions is None:
        audit_actions = build_cover(instance.player_set,
                                    resolution=max(1.0 / np.sqrt(T), 1e-3),
                                    cap=200_000).points
    arc_res = 1.0 / np.sqrt(T)

    d, d_p, d_l = instance.d, instance.d_p, instance.d_l
    p_hist = np.empty((T, d_p))
    ell_hist = np.empty((T, d_l))
    u_hist = np.empty((T, d))
    proj_dist = np.zeros(T)
    real_avg = RunningAverage(d)
    proj_avg = RunningAverage(d)
    hull = Hull2D.empty()
    s_model = None
    lam_last = np.zeros(d)

    for t in range(T):
        if len(hull) == 0:
            p_t = np.zeros(d_p)  # arbitrary fixed first action: the set center
        else:
            if s_model is None:
                s_model = target_model_points(instance, hull, arc_res)
            p_t, lam_last = base_approachability_step(
                proj_avg.mean, s_model, hull.vertices, instance, audit_actions
            )
        ell_t = adversary.next(t, p_hist[:t], ell_hist[:t])
        u_t = instance.payoff.evaluate(p_t, ell_t)
        p_hist[t], ell_hist[t], u_hist[t] = p_t, ell_t, u_t
        real_avg.update(u_t)
        if len(hull) == 0:
            ell_hat = ell_t
            dist_before = 0.0
            hull = hull2d_insert(hull, ell_t)[1]
            s_model = None
        else:
            dist_before = hull.distance(ell_t)
            ell_hat = hull.project(ell_t) if dist_before > 0.0 else ell_t
            if dist_before > 0.0:
                hull = hull2d_insert(hull, ell_t)[1]
                s_model = None  # refresh the target model on hull growth
        proj_dist[t] = dist_before
        proj_avg.update(instance.payoff.evaluate(p_t, ell_hat))

    if s_model is None:
        s_model = target_model_points(instance, hull, arc_res)
    u_bar = real_avg.mean.copy()
    u_hat = proj_avg.mean.copy()
    approach_err, _ = dist_to_hull(u_hat, s_model)
    tr = Transcript(
        schedule=EpochSchedule(T=T, L=1),
        p=p_hist, ell=ell_hist, u=u_hist,
        lambdas=lam_last[None, :],
        u_star=u_hat[None, :],
        g=(u_bar - u_hat)[None, :],
        err_diag=np.array([0.0]),
        inner_regret=np.array([0.0]),
        epoch_tv=np.array([np.nan]),
        target_points=ell_hist[-1][None, :].copy(),
        outer_regret=0.0,
        u_bar=u_bar,
        extras={"proj_dist": proj_dist},
    )
    tr.meta = {
        "cumulative_hull_distance": float(proj_dist.sum()),
        "projection_error": float(np.linalg.norm(u_bar - u_hat)),
        "approachability_error": float(approach_err),
        "u_hat": u_hat,
        "s_model": s_model,
        "hull_vertices": hull.vertices,
    }
    return tr
