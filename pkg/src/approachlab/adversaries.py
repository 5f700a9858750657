"""Adversary generators: restricted, contaminated, and stress sequences."""

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .core import GameInstance
from .errors import HorizonExceeded, NoGroundTruth


@dataclass(frozen=True)
class AdversarySpec:
    """Serializable description of a loss sequence generator.

    kinds: strict_polytope (mixing draws over a declared vertex hull),
    contaminated (a strict base plus exactly floor(eps*T) outlier rounds),
    basis_sign (random-sign basis vectors, one coordinate per round),
    threshold_1d (constant loss 1), adaptive (a Python callable of the
    transcript prefix; not serializable, no ground truth).
    """

    kind: str
    vertices: np.ndarray | None = None
    mixing: str = "dirichlet"  # dirichlet | vertex_choice | cycle
    epsilon: float = 0.0
    outlier: dict = field(default_factory=dict)
    placement: str = "random"  # random | first (outlier rounds)
    d: int = 0
    seed: int = 0
    script: object = None

    @staticmethod
    def strict_polytope(vertices, mixing="dirichlet", seed=0):
        return AdversarySpec(kind="strict_polytope",
                             vertices=np.atleast_2d(np.asarray(vertices, dtype=np.float64)),
                             mixing=mixing, seed=seed)

    @staticmethod
    def contaminated(vertices, epsilon, outlier=None, placement="random",
                     mixing="dirichlet", seed=0):
        return AdversarySpec(kind="contaminated",
                             vertices=np.atleast_2d(np.asarray(vertices, dtype=np.float64)),
                             epsilon=float(epsilon), outlier=outlier or {"kind": "uniform"},
                             placement=placement, mixing=mixing, seed=seed)

    @staticmethod
    def basis_sign(d, seed=0):
        return AdversarySpec(kind="basis_sign", d=int(d), seed=seed)

    @staticmethod
    def threshold_1d():
        return AdversarySpec(kind="threshold_1d")

    @staticmethod
    def adaptive(script):
        return AdversarySpec(kind="adaptive", script=script)

    def to_json(self):
        if self.kind == "adaptive":
            raise ValueError("adaptive adversaries are not serializable")
        out = {"kind": self.kind, "seed": self.seed}
        if self.kind in ("strict_polytope", "contaminated"):
            out["vertices"] = self.vertices.tolist()
            out["mixing"] = self.mixing
        if self.kind == "contaminated":
            out["epsilon"] = self.epsilon
            out["outlier"] = self.outlier
            out["placement"] = self.placement
        if self.kind == "basis_sign":
            out["d"] = self.d
        return out

    @staticmethod
    def from_json(obj):
        kind = obj["kind"]
        if kind == "strict_polytope":
            return AdversarySpec.strict_polytope(obj["vertices"],
                                                 mixing=obj.get("mixing", "dirichlet"),
                                                 seed=obj.get("seed", 0))
        if kind == "contaminated":
            return AdversarySpec.contaminated(obj["vertices"], obj["epsilon"],
                                              outlier=obj.get("outlier"),
                                              placement=obj.get("placement", "random"),
                                              mixing=obj.get("mixing", "dirichlet"),
                                              seed=obj.get("seed", 0))
        if kind == "basis_sign":
            return AdversarySpec.basis_sign(obj["d"], seed=obj.get("seed", 0))
        if kind == "threshold_1d":
            return AdversarySpec.threshold_1d()
        raise ValueError(f"unknown adversary kind {kind!r}")


class BoundAdversary:
    """An AdversarySpec bound to (instance, horizon, seed).

    Non-adaptive kinds pregenerate the whole sequence for speed and
    reproducibility; adaptive scripts are queried round by round.
    """

    def __init__(self, spec: AdversarySpec, instance: GameInstance, T: int, seed: int = 0):
        self.spec = spec
        self.instance = instance
        self.T = int(T)
        self.rng = np.random.default_rng(np.random.SeedSequence([spec.seed, int(seed), 0xAD]))
        self.sequence = None if spec.kind == "adaptive" else self._pregenerate()

    def _mix_draws(self, vertices, n):
        v = np.atleast_2d(vertices)
        if v.shape[0] == 1:
            return np.repeat(v, n, axis=0)
        if self.spec.mixing == "dirichlet":
            w = self.rng.dirichlet(np.ones(v.shape[0]), size=n)
            return w @ v
        if self.spec.mixing == "vertex_choice":
            return v[self.rng.integers(0, v.shape[0], size=n)]
        if self.spec.mixing == "cycle":
            return v[np.arange(n) % v.shape[0]]
        raise ValueError(f"unknown mixing {self.spec.mixing!r}")

    def _sample_outliers(self, n):
        out = self.spec.outlier or {"kind": "uniform"}
        if out.get("kind") == "fixed":
            pt = np.asarray(out["point"], dtype=np.float64)
            return np.repeat(pt[None, :], n, axis=0)
        # uniform over L, rejected until strictly outside the base hull
        L = self.instance.adversary_set
        margin = float(out.get("min_dist", 1e-6))
        got = []
        while len(got) < n:
            cand = L.sample(self.rng, max(4 * (n - len(got)), 8))
            for x in cand:
                dist, _ = geometry.dist_to_hull(x, self.spec.vertices)
                if dist > margin:
                    got.append(x)
                    if len(got) == n:
                        break
        return np.array(got)

    def _pregenerate(self):
        spec, T = self.spec, self.T
        if spec.kind == "threshold_1d":
            return np.ones((T, 1))
        if spec.kind == "basis_sign":
            signs = np.where(self.rng.random(T) < 0.5, -1.0, 1.0)
            seq = np.zeros((T, spec.d))
            seq[np.arange(T), np.arange(T) % spec.d] = signs
            return seq
        if spec.kind == "strict_polytope":
            return self._mix_draws(spec.vertices, T)
        if spec.kind == "contaminated":
            seq = self._mix_draws(spec.vertices, T)
            n_out = int(np.floor(spec.epsilon * T))
            if n_out > 0:
                if spec.placement == "first":
                    pos = np.arange(n_out)
                else:
                    pos = self.rng.choice(T, size=n_out, replace=False)
                seq[np.sort(pos)] = self._sample_outliers(n_out)
            return seq
        raise ValueError(f"unknown adversary kind {spec.kind!r}")

    def next(self, t, p_hist=None, ell_hist=None) -> np.ndarray:
        """Loss for round t (0-based prefix length)."""
        if t >= self.T:
            raise HorizonExceeded(f"round {t} beyond horizon {self.T}")
        if self.sequence is not None:
            return self.sequence[t]
        return np.asarray(self.spec.script(t, p_hist, ell_hist), dtype=np.float64)


def make_adversary(spec, instance, T, seed=0) -> BoundAdversary:
    return BoundAdversary(spec, instance, T, seed)


def next_loss(spec: AdversarySpec, instance: GameInstance, prefix_len: int, T: int,
              seed: int = 0) -> np.ndarray:
    """Stateless convenience: the loss the bound adversary plays at prefix_len."""
    return make_adversary(spec, instance, T, seed).next(prefix_len)


@dataclass(frozen=True)
class GroundTruth:
    """Sampled models of the declared restriction set and its target image."""

    q_points: np.ndarray
    s_points: np.ndarray
    mesh: float


def ground_truth_targets(spec: AdversarySpec, instance: GameInstance,
                         epsilon: float = 0.0, mesh: float = 1e-2,
                         seed: int = 0) -> GroundTruth:
    """Q and S(Q) models for adversaries whose restriction set is declared.

    Q is the declared polytope (the base polytope for contaminated play);
    S(Q) is sampled as the response image over the hull vertices plus a
    grid of the stated mesh (dimension <= 2) or Dirichlet hull samples.
    """
    if spec.kind == "threshold_1d":
        q = np.array([[1.0]])
    elif spec.kind in ("strict_polytope", "contaminated"):
        q = np.atleast_2d(spec.vertices)
    else:
        raise NoGroundTruth(f"adversary kind {spec.kind!r} declares no restriction set")
    d_l = q.shape[1]
    if q.shape[0] == 1:
        pts = q
    elif d_l == 1:
        lo, hi = float(q.min()), float(q.max())
        n = max(2, int(np.ceil((hi - lo) / mesh)) + 1)
        pts = np.linspace(lo, hi, n)[:, None]
    elif d_l == 2:
        from . import _kernels  # noqa: PLC0415

        hull = _kernels.convex_hull_2d(q)
        lo, hi = q.min(axis=0), q.max(axis=0)
        ax = [np.arange(lo[j], hi[j] + mesh, mesh) for j in range(2)]
        grid = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 2)
        if hull.shape[0] >= 2:
            inside = _kernels.points_in_hull_2d(grid, hull, 1e-12)
            grid = grid[inside]
        pts = np.vstack([q, grid]) if grid.shape[0] else q
    else:
        rng = np.random.default_rng(seed)
        w = rng.dirichlet(np.ones(q.shape[0]), size=4096)
        pts = np.vstack([q, w @ q])
    s_pts = instance.response_image(pts)
    return GroundTruth(q_points=q, s_points=s_pts, mesh=mesh)
