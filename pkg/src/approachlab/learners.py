"""Online optimization oracles and the covering-net reduction.

Two oracles:

* projected online gradient descent over a convex action set with the
  standard eta_t = D / (G sqrt(t)) schedule (regret <= 1.5 G D sqrt(T));
* a multi-scale multiplicative-weights expert oracle with second-order
  correction terms and optimism m_t = y_{t-1}, giving path-length regret
  against the best expert:

      Reg_T <= C1 * sqrt(P* log(N T)) + C2 * log(N T),
      P* = sum_t |y_{t+1,i*} - y_{t,i*}|.

Implementation constants (asserted empirically in the test suite):
learning-rate scales are a doubling grid over [1/T, ETA_MAX] with
ETA_MAX = 1/32, the correction is 32 * eta_i * (y_i - m_i)^2, the prior is
uniform over (expert, scale) pairs, and the empirical regret constants are
C1 = EXPERT_C1, C2 = EXPERT_C2 below.
"""

import numpy as np
from scipy.special import logsumexp

from .core import ActionSet
from .errors import GradientBoundExceeded, LossOutOfRange, NetTooLarge

ETA_MAX = 1.0 / 32.0
WEIGHT_FLOOR = 1e-300
EXPERT_C1 = 6.0
EXPERT_C2 = 36.0


class OGD:
    """Projected online gradient descent; plays, then receives a gradient."""

    def __init__(self, feasible: ActionSet, G, D=None, x0=None):
        self.feasible = feasible
        self.G = float(G)
        self.D = float(D) if D is not None else feasible.diameter
        self.current = np.zeros(feasible.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
        self.round = 0

    def step_size(self, t) -> float:
        return self.D / (self.G * np.sqrt(t))

    def play(self) -> np.ndarray:
        return self.current

    def update(self, gradient) -> np.ndarray:
        gradient = np.asarray(gradient, dtype=np.float64)
        if float(np.linalg.norm(gradient)) > self.G + 1e-9:
            raise GradientBoundExceeded(
                f"||g|| = {np.linalg.norm(gradient):.6g} exceeds declared G = {self.G}"
            )
        self.round += 1
        step = self.current - self.step_size(self.round) * gradient
        self.current = self.feasible.project(step)
        return self.current

    def reset(self):
        self.current = np.zeros(self.feasible.dim)
        self.round = 0


def ogd_next(state: OGD, gradient):
    """Functional wrapper: feed a gradient, get (next action, state)."""
    nxt = state.update(gradient)
    return nxt, state


class MsMwC:
    """Multi-scale multiplicative weights with correction and optimism.

    Maintains one weight per (expert, learning-rate scale) pair in log
    space; both the optimistic prediction step and the correction update
    are weighted-entropy mirror steps whose normalizer is found by a
    safeguarded Newton solve. Weights never underflow below WEIGHT_FLOOR.
    """

    def __init__(self, n_experts, horizon, eta_max=ETA_MAX):
        self.n = int(n_experts)
        self.horizon = int(horizon)
        etas = []
        e = 1.0 / max(self.horizon, 1)
        while e < eta_max:
            etas.append(e)
            e *= 2.0
        etas.append(eta_max)
        self.etas = np.unique(np.clip(np.array(etas), None, eta_max))
        self.K = self.etas.shape[0]
        self.eta = np.repeat(self.etas, self.n)  # scale-major layout (K, n)
        self.reset()

    def reset(self):
        m = self.K * self.n
        self.log_w = np.full(m, -np.log(m))
        self.m_opt = np.zeros(m)
        self.round = 0

    def _normalize(self, z):
        """Solve logsumexp(z - eta * mu) = 0 for mu; returns z - eta * mu."""
        s0 = logsumexp(z)
        if abs(s0) < 1e-15:
            return z
        if s0 > 0:
            lo, hi = s0 / self.eta.max(), s0 / self.eta.min()
        else:
            lo, hi = s0 / self.eta.min(), s0 / self.eta.max()
        mu = 0.5 * (lo + hi)
        for _ in range(80):
            zz = z - self.eta * mu
            f = logsumexp(zz)
            if abs(f) < 1e-13:
                break
            w = np.exp(zz - f)
            fprime = -float(w @ self.eta)
            nxt = mu - f / fprime
            if f > 0:
                lo = mu
            else:
                hi = mu
            mu = nxt if lo < nxt < hi else 0.5 * (lo + hi)
        return z - self.eta * mu

    def play(self) -> np.ndarray:
        """Mixed action over the base experts (marginal over scales)."""
        z = self._normalize(self.log_w - self.eta * self.m_opt)
        w = np.exp(z)
        return w.reshape(self.K, self.n).sum(axis=0)

    def update(self, losses):
        losses = np.asarray(losses, dtype=np.float64)
        if losses.shape[0] != self.n:
            raise LossOutOfRange(f"loss vector length {losses.shape[0]} != {self.n} experts")
        mx = float(np.max(np.abs(losses)))
        if mx > 1.0 + 1e-9:
            raise LossOutOfRange(f"loss magnitude {mx:.6g} exceeds 1")
        y = np.tile(np.clip(losses, -1.0, 1.0), self.K)
        corr = 32.0 * self.eta * (y - self.m_opt) ** 2
        z = self._normalize(self.log_w - self.eta * (y + corr))
        z = np.maximum(z, np.log(WEIGHT_FLOOR))
        self.log_w = z - logsumexp(z)
        self.m_opt = y
        self.round += 1


def expert_next(state: MsMwC, loss_vector):
    """Play the current mixture, then charge the loss vector; returns (x_t, state)."""
    x = state.play()
    state.update(loss_vector)
    return x, state


class CoveringNet:
    """Finite grid inside the learner's set with a stated covering radius."""

    def __init__(self, points, resolution):
        self.points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        self.resolution = float(resolution)

    def __len__(self):
        return self.points.shape[0]

    def audit(self, set_desc: ActionSet, rng, samples=10_000) -> float:
        """Max nearest-net distance over sampled points of the set."""
        xs = set_desc.sample(rng, samples)
        worst = 0.0
        for i in range(0, xs.shape[0], 512):
            blk = xs[i : i + 512]
            d2 = np.sum((blk[:, None, :] - self.points[None, :, :]) ** 2, axis=2)
            worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
        return worst


def build_cover(set_desc: ActionSet, resolution, cap=1_000_000) -> CoveringNet:
    """Uniform grid of spacing resolution/sqrt(d) intersected with the set.

    The grid is anchored at the origin, so for sets containing the origin
    the rounded-toward-zero node of any point is in the set and within
    ``resolution``. Size above ``cap`` raises NetTooLarge (the fast-rate
    instantiations are only practical in low player dimension).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    d = set_desc.dim
    spacing = resolution / np.sqrt(d)
    if set_desc.kind == "box":
        lo, hi = set_desc.lo, set_desc.hi
    elif set_desc.kind == "ball":
        lo = np.full(d, -set_desc.radius)
        hi = np.full(d, set_desc.radius)
    elif set_desc.kind == "simplex":
        lo, hi = np.zeros(d), np.ones(d)
    else:
        lo, hi = set_desc.vertices.min(axis=0), set_desc.vertices.max(axis=0)
    axes = []
    total = 1
    for j in range(d):
        ax = spacing * np.arange(np.floor(lo[j] / spacing - 1e-12),
                                 np.ceil(hi[j] / spacing + 1e-12) + 1)
        axes.append(ax)
        total *= ax.shape[0]
        if total > 64 * cap:
            raise NetTooLarge(f"grid would have {total} candidate nodes (cap {cap})")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.array([set_desc.contains(x) for x in mesh])
    pts = mesh[keep]
    if pts.shape[0] == 0:
        pts = set_desc.center[None, :]
    if pts.shape[0] > cap:
        raise NetTooLarge(f"net has {pts.shape[0]} points (cap {cap})")
    return CoveringNet(pts, resolution)


def lipschitz_discretization_gap(net: CoveringNet, losses, set_desc: ActionSet,
                                 audit_samples=4096, seed=0) -> float:
    """min over the net of the summed losses minus a dense-audit minimum.

    Test utility: for 1-Lipschitz losses the gap is at most T * resolution.
    """
    rng = np.random.default_rng(seed)
    audit = np.vstack([set_desc.sample(rng, audit_samples), net.points])
    net_tot = np.zeros(len(net))
    audit_tot = np.zeros(audit.shape[0])
    for f in losses:
        net_tot += np.array([f(p) for p in net.points])
        audit_tot += np.array([f(p) for p in audit])
    return float(net_tot.min() - audit_tot.min())
