"""Epoch-based opportunistic learner with pluggable loss rules and targets.

An outer gradient-descent learner picks a payoff-space direction per epoch;
a fresh inner learner spends the epoch minimizing per-round surrogate
losses in that direction. The surrogates (loss rule) must upper-bound the
directional payoff; the per-epoch target (target function) must land in the
final opportunistic target set. Four presets instantiate the theorems:

    strict_eff  linear losses + epoch-mean response, OGD inner
    sto_eff     linear losses + TV-closest feasible mean, OGD inner
    strict_fast running-max losses + maximin response, expert inner
    sto_fast    offset-max losses + trimmed maximin response, expert inner
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .adversaries import AdversarySpec, BoundAdversary, make_adversary
from .core import ActionSet, GameInstance, RunningAverage
from .errors import (
    EmptyHistory,
    IncompleteEpoch,
    NetTooLarge,
    ScheduleMismatch,
    UnknownPreset,
)
from .geometry import maximin_point, tv_closest_mean
from .learners import OGD, CoveringNet, MsMwC, build_cover

AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class LossRule:
    """Per-round surrogate losses handed to the inner learner.

    linear: f_t(p) = <lam, u(p, ell_t)>, valid with equality.
    running_max: the largest directional payoff seen so far this epoch.
    offset_max: the (removals+1)-th largest seen so far, floored at the
    current round's value so validity is preserved under outliers.
    """

    kind: str
    removals: int = 0

    def __post_init__(self):
        if self.kind not in ("linear", "running_max", "offset_max"):
            raise ValueError(f"unknown loss rule {self.kind!r}")
        if self.removals < 0:
            raise ValueError("removals must be nonnegative")


@dataclass(frozen=True)
class TargetFunction:
    """Per-epoch target payoff guaranteed inside the final target set."""

    kind: str
    removals: int = 0

    def __post_init__(self):
        if self.kind not in ("mean", "tv_mean", "maximin", "maximin_trimmed"):
            raise ValueError(f"unknown target function {self.kind!r}")


@dataclass(frozen=True)
class EpochSchedule:
    T: int
    L: int

    def __post_init__(self):
        if self.L < 1 or self.T < 1:
            raise ScheduleMismatch("horizon and epoch count must be positive")
        if self.T % self.L != 0:
            raise ScheduleMismatch(f"L={self.L} does not divide T={self.T}")

    @property
    def T_e(self) -> int:
        return self.T // self.L


# ---------------------------------------------------------------------------
# loss-rule trackers (vectorized over a batch of actions)


class _LinearTracker:
    def push(self, h):
        return h


class _RunningMaxTracker:
    def __init__(self):
        self.best = None

    def push(self, h):
        self.best = h.copy() if self.best is None else np.maximum(self.best, h)
        return self.best.copy()


class _OffsetMaxTracker:
    """Keeps the top (removals+1) values per action; offmax is their min."""

    def __init__(self, removals, width):
        self.k = int(removals)
        self.top = np.full((self.k + 1, width), -np.inf)
        self.size = 0

    def push(self, h):
        mins = self.top.min(axis=0)
        am = self.top.argmin(axis=0)
        mask = h > mins
        self.top[am[mask], np.nonzero(mask)[0]] = h[mask]
        self.size += 1
        if self.size <= self.k:
            offs = np.zeros_like(h)  # too few values: offmax is 0 by convention
        else:
            offs = self.top.min(axis=0)
        return np.maximum(offs, h)


def _make_tracker(rule: LossRule, width: int):
    if rule.kind == "linear":
        return _LinearTracker()
    if rule.kind == "running_max":
        return _RunningMaxTracker()
    return _OffsetMaxTracker(rule.removals, width)


def loss_eval(rule: LossRule, epoch_history, lam, p, instance: GameInstance) -> float:
    """Reference (non-incremental) loss-rule evaluation at one action.

    ``epoch_history`` is the epoch's losses up to and including the current
    round. The run loop uses incremental trackers with the same semantics.
    """
    hist = np.atleast_2d(np.asarray(epoch_history, dtype=np.float64))
    if hist.shape[0] == 0:
        raise EmptyHistory("loss rules need at least the current round's loss")
    lam = np.asarray(lam, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    h = instance.payoff.directional_profile(lam, p[None, :], hist)[0]
    if rule.kind == "linear":
        return float(h[-1])
    if rule.kind == "running_max":
        return float(h.max())
    from .geometry import offmax  # noqa: PLC0415

    return float(max(offmax(h, rule.removals), h[-1]))


def _target_details(fn: TargetFunction, epoch_losses, lam, instance: GameInstance):
    """(u_star, chosen loss point, tv or nan)."""
    pts = np.atleast_2d(np.asarray(epoch_losses, dtype=np.float64))
    tv = float("nan")
    if fn.kind == "mean" or (fn.kind == "tv_mean" and fn.removals == 0):
        ell_hat = pts.mean(axis=0)
        tv = 0.0 if fn.kind == "tv_mean" else tv
    elif fn.kind == "tv_mean":
        _, ell_hat, tv = tv_closest_mean(pts, fn.removals)
    elif fn.kind == "maximin":
        ell_hat = maximin_point(lam, pts, instance, removals=0)
    else:
        ell_hat = maximin_point(lam, pts, instance, removals=fn.removals)
    p_star = instance.response.evaluate(ell_hat)
    return instance.payoff.evaluate(p_star, ell_hat), ell_hat, tv


def target_eval(fn: TargetFunction, epoch_losses, lam, instance: GameInstance) -> np.ndarray:
    u_star, _, _ = _target_details(fn, epoch_losses, lam, instance)
    return u_star


# ---------------------------------------------------------------------------
# transcript


@dataclass
class Transcript:
    """Full per-round and per-epoch record of one run."""

    schedule: EpochSchedule
    p: np.ndarray
    ell: np.ndarray
    u: np.ndarray
    lambdas: np.ndarray
    u_star: np.ndarray
    g: np.ndarray
    err_diag: np.ndarray
    inner_regret: np.ndarray
    epoch_tv: np.ndarray
    target_points: np.ndarray
    outer_regret: float
    u_bar: np.ndarray
    audit_checks: int = 0
    audit_violations: int = 0
    net_points: np.ndarray | None = None
    expert_paths: list = field(default_factory=list)   # per epoch: (n_experts,)
    expert_cum: list = field(default_factory=list)     # per epoch: cumulative y
    checkpoints: list = field(default_factory=list)    # (t, prefix mean payoff)
    extras: dict = field(default_factory=dict)         # lowdim per-round fields
    meta: dict = field(default_factory=dict)           # run-level diagnostics

    @property
    def T(self):
        return self.schedule.T

    @property
    def L(self):
        return self.schedule.L

    def epoch_rounds(self, e):
        T_e = self.schedule.T_e
        return slice(e * T_e, (e + 1) * T_e)

    def recompute_g(self, e) -> np.ndarray:
        rounds = self.epoch_rounds(e)
        return self.u[rounds].mean(axis=0) - self.u_star[e]

    def max_inner_regret(self) -> float:
        return float(np.max(self.inner_regret))

    def decomposition_bound(self, slack=0.05) -> float:
        """Right-hand side of the regret-chaining distance guarantee."""
        return (
            self.max_inner_regret() / self.schedule.T_e
            + self.outer_regret / self.L
            + float(np.max(self.err_diag))
            + slack
        )

    def write_jsonl(self, path):
        """One record per round then one per epoch; stable field names:
        round, p, ell, u / epoch, lambda, u_star, g, err_diag (+ extras)."""
        with open(path, "w") as fh:
            for t in range(self.T):
                rec = {"round": t, "p": self.p[t].tolist(), "ell": self.ell[t].tolist(),
                       "u": self.u[t].tolist()}
                for key, arr in self.extras.items():
                    rec[key] = np.asarray(arr)[t].tolist()
                fh.write(json.dumps(rec) + "\n")
            for e in range(self.L):
                fh.write(json.dumps({
                    "epoch": e,
                    "lambda": self.lambdas[e].tolist(),
                    "u_star": self.u_star[e].tolist(),
                    "g": self.g[e].tolist(),
                    "err_diag": float(self.err_diag[e]),
                }) + "\n")


# ---------------------------------------------------------------------------
# the epoch loop


def _infer_inner(rule: LossRule, inner: str) -> str:
    needed = "ogd" if rule.kind == "linear" else "expert"
    if inner == "auto":
        return needed
    if inner != needed:
        raise ValueError(
            f"inner learner {inner!r} incompatible with {rule.kind!r} losses "
            f"(linear -> ogd, max rules -> expert over a covering net)"
        )
    return inner


def _offsetmax_prefix_matrix(H, removals):
    """f values for whole-epoch audit: H is (m, T_e) directional payoffs."""
    tracker = _OffsetMaxTracker(removals, H.shape[0])
    F = np.empty_like(H)
    for t in range(H.shape[1]):
        F[:, t] = tracker.push(H[:, t])
    return F


def run_epoch_learner(
    instance: GameInstance,
    adversary,
    schedule: EpochSchedule,
    rule: LossRule,
    target: TargetFunction,
    inner: str = "auto",
    seed: int = 0,
    audit: bool = True,
    n_audit_actions: int = 8,
    checkpoints=(),
    net_resolution: float | None = None,
    net_cap: int = 1_000_000,
) -> Transcript:
    """Run the epoch-based learner for schedule.T rounds; returns the transcript.

    ``adversary`` may be an AdversarySpec (bound here with ``seed``) or an
    already-bound adversary. The outer learner is OGD over the unit payoff
    ball starting at the center; the inner learner is fresh per epoch.
    """
    inner = _infer_inner(rule, inner)
    T, L, T_e = schedule.T, schedule.L, schedule.T_e
    if isinstance(adversary, AdversarySpec):
        adversary = make_adversary(adversary, instance, T, seed)
    if isinstance(adversary, BoundAdversary) and adversary.T < T:
        raise ScheduleMismatch(f"adversary horizon {adversary.T} < schedule horizon {T}")
    d, d_p, d_l = instance.d, instance.d_p, instance.d_l
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xF0]))

    outer = OGD(ActionSet.ball(d, 1.0), G=2.0, D=2.0)
    lam = outer.play().copy()

    net = None
    oracle = None
    inner_ogd = None
    if inner == "expert":
        res = net_resolution if net_resolution is not None else 1.0 / (d_p * T_e)
        net = build_cover(instance.player_set, res, cap=net_cap)
        oracle = MsMwC(len(net), horizon=T_e)
    else:
        G = max(instance.payoff.gradient_bound(instance.adversary_set), 1e-12)
        inner_ogd = OGD(instance.player_set, G=G)

    p_hist = np.empty((T, d_p))
    ell_hist = np.empty((T, d_l))
    u_hist = np.empty((T, d))
    lambdas = np.empty((L, d))
    u_star = np.empty((L, d))
    g_hist = np.empty((L, d))
    err_diag = np.empty(L)
    inner_regret = np.empty(L)
    epoch_tv = np.full(L, np.nan)
    target_points = np.empty((L, d_l))
    expert_paths = []
    expert_cum = []
    audit_checks = 0
    audit_violations = 0
    cp_set = set(int(c) for c in checkpoints)
    cp_records = []
    ravg = RunningAverage(d)
    g_sum = np.zeros(d)
    lam_g_sum = 0.0

    t_global = 0
    for e in range(L):
        lam_e = lam.copy()
        lambdas[e] = lam_e
        c0, cp, cl, M = instance.payoff.direction_coeffs(lam_e)
        if inner == "expert":
            oracle.reset()
            net_lin = c0 + net.points @ cp          # per-expert affine part
            net_bil = net.points @ M                # (n, d_l)
            tracker = _make_tracker(rule, len(net))
            cum_y = np.zeros(len(net))
            cum_xy = 0.0
            path = np.zeros(len(net))
            y_prev = None
        else:
            inner_ogd.reset()
            f_played = 0.0

        for _ in range(T_e):
            if inner == "expert":
                x_t = oracle.play()
                p_t = x_t @ net.points
            else:
                p_t = inner_ogd.play().copy()
            ell_t = adversary.next(t_global, p_hist[:t_global], ell_hist[:t_global])
            u_t = instance.payoff.evaluate(p_t, ell_t)
            p_hist[t_global] = p_t
            ell_hist[t_global] = ell_t
            u_hist[t_global] = u_t
            ravg.update(u_t)

            if inner == "expert":
                h = net_lin + float(cl @ ell_t) + net_bil @ ell_t
                y = np.clip(tracker.push(h), -1.0, 1.0)
                cum_xy += float(x_t @ y)
                cum_y += y
                if y_prev is not None:
                    path += np.abs(y - y_prev)
                y_prev = y
                oracle.update(y)
            else:
                f_played += float(lam_e @ u_t)
                inner_ogd.update(cp + M @ ell_t)

            t_global += 1
            if t_global in cp_set:
                cp_records.append((t_global, ravg.mean.copy()))

        ells_epoch = ell_hist[e * T_e : (e + 1) * T_e]
        u_star_e, ell_hat, tv = _target_details(target, ells_epoch, lam_e, instance)
        u_star[e] = u_star_e
        target_points[e] = ell_hat
        epoch_tv[e] = tv
        g_e = u_hist[e * T_e : (e + 1) * T_e].mean(axis=0) - u_star_e
        g_hist[e] = g_e

        if inner == "expert":
            best_cum = float(cum_y.min())
            inner_regret[e] = cum_xy - best_cum
            err_diag[e] = best_cum / T_e - float(lam_e @ u_star_e)
            expert_paths.append(path)
            expert_cum.append(cum_y.copy())
        else:
            # linear losses: the epoch minimum over P is exact by structure
            total_coef = T_e * cp + M @ ells_epoch.sum(axis=0)
            const = T_e * c0 + float(cl @ ells_epoch.sum(axis=0))
            min_val, _ = instance.player_set.min_linear(total_coef)
            best = const + min_val
            inner_regret[e] = f_played - best
            err_diag[e] = best / T_e - float(lam_e @ u_star_e)

        if audit:
            audit_ps = instance.player_set.sample(rng, n_audit_actions)
            H = instance.payoff.directional_profile(lam_e, audit_ps, ells_epoch)
            if rule.kind == "linear":
                F = H
            elif rule.kind == "running_max":
                F = np.maximum.accumulate(H, axis=1)
            else:
                F = _offsetmax_prefix_matrix(H, rule.removals)
            audit_checks += F.size
            audit_violations += int(np.sum(F < H - AUDIT_TOL))

        lam_g_sum += float(lam_e @ g_e)
        g_sum += g_e
        # the outer learner ascends <lam, g_e>: it hunts the direction in
        # which the realized payoffs are maximally separated from the targets
        lam = outer.update(-g_e).copy()

    outer_regret = float(np.linalg.norm(g_sum)) - lam_g_sum
    return Transcript(
        schedule=schedule,
        p=p_hist,
        ell=ell_hist,
        u=u_hist,
        lambdas=lambdas,
        u_star=u_star,
        g=g_hist,
        err_diag=err_diag,
        inner_regret=inner_regret,
        epoch_tv=epoch_tv,
        target_points=target_points,
        outer_regret=outer_regret,
        u_bar=ravg.mean.copy(),
        audit_checks=audit_checks,
        audit_violations=audit_violations,
        net_points=None if net is None else net.points,
        expert_paths=expert_paths,
        expert_cum=expert_cum,
        checkpoints=cp_records,
    )


def err_diagnostic(transcript: Transcript, epoch: int, instance: GameInstance,
                   rule: LossRule, audit_actions=None) -> float:
    """Recompute the epoch's err term from the stored transcript.

    (1/T_e) min over the audit set of the summed surrogate losses, minus the
    directional value of the epoch target. The audit set defaults to the
    stored covering net (max rules) or the exact structural minimizer
    (linear losses).
    """
    if epoch < 0 or epoch >= transcript.L:
        raise IncompleteEpoch(f"epoch {epoch} not recorded (L={transcript.L})")
    T_e = transcript.schedule.T_e
    lam_e = transcript.lambdas[epoch]
    ells = transcript.ell[transcript.epoch_rounds(epoch)]
    u_star_dir = float(lam_e @ transcript.u_star[epoch])
    if rule.kind == "linear" and audit_actions is None:
        c0, cp, cl, M = instance.payoff.direction_coeffs(lam_e)
        total_coef = T_e * cp + M @ ells.sum(axis=0)
        const = T_e * c0 + float(cl @ ells.sum(axis=0))
        min_val, _ = instance.player_set.min_linear(total_coef)
        return (const + min_val) / T_e - u_star_dir
    if audit_actions is None:
        if transcript.net_points is None:
            raise ValueError("no covering net stored; pass audit_actions")
        audit_actions = transcript.net_points
    H = instance.payoff.directional_profile(lam_e, np.atleast_2d(audit_actions), ells)
    if rule.kind == "linear":
        F = H
    elif rule.kind == "running_max":
        F = np.maximum.accumulate(H, axis=1)
    else:
        F = _offsetmax_prefix_matrix(H, rule.removals)
    return float(F.sum(axis=1).min()) / T_e - u_star_dir


# ---------------------------------------------------------------------------
# presets


@dataclass(frozen=True)
class Preset:
    name: str
    rule: LossRule
    target: TargetFunction
    inner: str
    L: int
    net_resolution: float | None = None

    def schedule(self, T) -> EpochSchedule:
        return EpochSchedule(T=T, L=self.L)


def nearest_divisor(T: int, L0: float) -> int:
    """Divisor of T closest to L0 in log ratio (the paper assumes L | T)."""
    L0 = min(max(L0, 1.0), float(T))
    divisors = [i for i in range(1, int(np.sqrt(T)) + 1) if T % i == 0]
    divisors += [T // i for i in divisors]
    return min(set(divisors), key=lambda x: (abs(np.log(x / L0)), x))


def preset(name: str, T: int, d_p: int, epsilon: float = 0.0,
           net_cap: int = 1_000_000) -> Preset:
    """Theorem-tuned configurations; L is rounded to the nearest divisor of T."""
    if name not in ("strict_eff", "sto_eff", "strict_fast", "sto_fast"):
        raise UnknownPreset(f"unknown preset {name!r}")
    eps_branch = (epsilon * d_p) ** (-2.0 / 3.0) if epsilon > 0 else np.inf
    if name == "strict_eff":
        L = nearest_divisor(T, np.sqrt(T) / d_p)
        return Preset(name, LossRule("linear"), TargetFunction("mean"), "ogd", L)
    if name == "sto_eff":
        L = nearest_divisor(T, min(np.sqrt(T) / d_p, eps_branch))
        removals = int(np.floor(epsilon * T))
        return Preset(name, LossRule("linear"),
                      TargetFunction("tv_mean", removals=removals), "ogd", L)
    L = nearest_divisor(T, min((T / d_p) ** (2.0 / 3.0),
                               eps_branch if name == "sto_fast" else np.inf))
    T_e = T // L
    res = 1.0 / (d_p * T_e)
    est = (3.0 * d_p / res) ** d_p
    if est > net_cap:
        raise NetTooLarge(
            f"{name} at T={T}, d_p={d_p} needs a net of ~{est:.3g} points (cap {net_cap})"
        )
    if name == "strict_fast":
        return Preset(name, LossRule("running_max"), TargetFunction("maximin"),
                      "expert", L, net_resolution=res)
    return Preset(
        name,
        LossRule("offset_max", removals=int(np.floor(epsilon * d_p * T))),
        TargetFunction("maximin_trimmed", removals=int(np.floor(epsilon * T))),
        "expert",
        L,
        net_resolution=res,
    )
