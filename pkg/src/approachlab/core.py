"""Game instances: action sets, bi-affine payoffs, response functions.

The payoff is stored structurally (affine part plus a stack of bilinear
forms) rather than as an opaque callable, so that directional minimization
and maximin subroutines can exploit the structure. Everything is immutable
after construction except RunningAverage.
"""

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DimensionMismatch, MembershipViolation, UncoveredPoint

MEMBERSHIP_TOL = 1e-9


# ---------------------------------------------------------------------------
# action sets


@dataclass(frozen=True)
class ActionSet:
    """Compact convex action set: ball, box, polytope, or standard simplex.

    The learner's set is expected in isotropic position (contains the unit
    ball, contained in the ball of radius dim); validate_instance checks
    this by sampling support values.
    """

    dim: int
    kind: str
    radius: float = 0.0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    vertices: np.ndarray | None = None

    @staticmethod
    def ball(dim, radius=1.0):
        return ActionSet(dim=dim, kind="ball", radius=float(radius))

    @staticmethod
    def box(lo, hi):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box bounds malformed")
        return ActionSet(dim=lo.shape[0], kind="box", lo=lo, hi=hi)

    @staticmethod
    def polytope(vertices):
        v = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
        if v.shape[0] == 0:
            raise ValueError("polytope needs at least one vertex")
        return ActionSet(dim=v.shape[1], kind="polytope", vertices=v)

    @staticmethod
    def simplex(dim):
        return ActionSet(dim=dim, kind="simplex")

    def contains(self, x, tol=MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {x.shape[0]} != set dim {self.dim}")
        if self.kind == "ball":
            return float(np.linalg.norm(x)) <= self.radius + tol
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)
        d, _ = geometry.dist_to_hull(x, self.vertices)
        return d <= tol

    def support(self, lam) -> float:
        lam = np.asarray(lam, dtype=np.float64)
        if self.kind == "ball":
            return self.radius * float(np.linalg.norm(lam))
        if self.kind == "box":
            return float(np.sum(np.maximum(lam * self.lo, lam * self.hi)))
        if self.kind == "simplex":
            return float(np.max(lam))
        return float(np.max(self.vertices @ lam))

    def min_linear(self, c):
        """(min over the set of <c, x>, an achieving point)."""
        c = np.asarray(c, dtype=np.float64)
        if self.kind == "ball":
            nrm = float(np.linalg.norm(c))
            if nrm <= 1e-300:
                return 0.0, np.zeros(self.dim)
            return -self.radius * nrm, -self.radius * c / nrm
        if self.kind == "box":
            arg = np.where(c > 0, self.lo, np.where(c < 0, self.hi, 0.5 * (self.lo + self.hi)))
            return float(np.sum(np.minimum(c * self.lo, c * self.hi))), arg
        if self.kind == "simplex":
            i = int(np.argmin(c))
            e = np.zeros(self.dim)
            e[i] = 1.0
            return float(c[i]), e
        vals = self.vertices @ c
        i = int(np.argmin(vals))
        return float(vals[i]), self.vertices[i].copy()

    def max_linear(self, c):
        val, arg = self.min_linear(-np.asarray(c, dtype=np.float64))
        return -val, arg

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "ball":
            nrm = float(np.linalg.norm(x))
            return x if nrm <= self.radius else x * (self.radius / nrm)
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        if self.kind == "simplex":
            # sort-based projection onto {w >= 0, sum w = 1}
            u = np.sort(x)[::-1]
            css = np.cumsum(u) - 1.0
            rho = np.nonzero(u - css / np.arange(1, x.shape[0] + 1) > 0)[0][-1]
            theta = css[rho] / (rho + 1.0)
            return np.maximum(x - theta, 0.0)
        return geometry.project_to_hull(x, self.vertices)

    def sample(self, rng, n) -> np.ndarray:
        if self.kind == "ball":
            g = rng.standard_normal((n, self.dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = self.radius * rng.random(n) ** (1.0 / self.dim)
            return g * r[:, None]
        if self.kind == "box":
            return self.lo + rng.random((n, self.dim)) * (self.hi - self.lo)
        if self.kind == "simplex":
            return rng.dirichlet(np.ones(self.dim), size=n)
        w = rng.dirichlet(np.ones(self.vertices.shape[0]), size=n)
        return w @ self.vertices

    def extreme_points(self, cap=65536):
        """Vertex set where one exists; boundary approximators otherwise."""
        if self.kind == "box":
            if 2 ** self.dim > cap:
                raise ValueError("too many box corners; raise the cap or sample")
            corners = np.array(list(itertools.product(*zip(self.lo, self.hi))))
            return corners
        if self.kind == "polytope":
            return self.vertices
        if self.kind == "simplex":
            return np.eye(self.dim)
        return None  # ball: no finite vertex set

    def boundary_sample(self, rng, n) -> np.ndarray:
        if self.kind == "ball":
            g = rng.standard_normal((n, self.dim))
            return self.radius * g / np.linalg.norm(g, axis=1, keepdims=True)
        ext = self.extreme_points()
        if ext.shape[0] >= n:
            return ext[rng.choice(ext.shape[0], size=n, replace=False)]
        return ext

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        if self.kind == "box":
            return float(np.linalg.norm(self.hi - self.lo))
        if self.kind == "simplex":
            return float(np.sqrt(2.0))
        v = self.vertices
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=2)
        return float(np.sqrt(d2.max()))

    @property
    def center(self) -> np.ndarray:
        if self.kind == "ball":
            return np.zeros(self.dim)
        if self.kind == "box":
            return 0.5 * (self.lo + self.hi)
        if self.kind == "simplex":
            return np.full(self.dim, 1.0 / self.dim)
        return self.vertices.mean(axis=0)

    def outer_radius(self) -> float:
        if self.kind == "ball":
            return self.radius
        if self.kind == "box":
            return float(np.sqrt(np.sum(np.maximum(self.lo**2, self.hi**2))))
        if self.kind == "simplex":
            return 1.0
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def to_json(self):
        if self.kind == "ball":
            return {"kind": "ball", "dim": self.dim, "radius": self.radius}
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        if self.kind == "simplex":
            return {"kind": "simplex", "dim": self.dim}
        return {"kind": "polytope", "vertices": self.vertices.tolist()}

    @staticmethod
    def from_json(obj):
        kind = obj["kind"]
        if kind == "ball":
            return ActionSet.ball(obj["dim"], obj["radius"])
        if kind == "box":
            return ActionSet.box(obj["lo"], obj["hi"])
        if kind == "simplex":
            return ActionSet.simplex(obj["dim"])
        if kind == "polytope":
            return ActionSet.polytope(obj["vertices"])
        raise ValueError(f"unknown action set kind {kind!r}")


# ---------------------------------------------------------------------------
# payoff


@dataclass(frozen=True)
class BiAffinePayoff:
    """u(p, ell) = u0 + A p + B ell + (p . C_k . ell)_k, values in R^d."""

    u0: np.ndarray  # (d,)
    A: np.ndarray   # (d, d_p)
    B: np.ndarray   # (d, d_l)
    C: np.ndarray   # (d, d_p, d_l)

    def __post_init__(self):
        for name in ("u0", "A", "B", "C"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        d = self.u0.shape[0]
        if self.A.shape[0] != d or self.B.shape[0] != d or self.C.shape[0] != d:
            raise DimensionMismatch("payoff blocks disagree on the payoff dimension")
        if self.C.shape[1] != self.A.shape[1] or self.C.shape[2] != self.B.shape[1]:
            raise DimensionMismatch("bilinear block disagrees with the affine blocks")

    @property
    def d(self):
        return self.u0.shape[0]

    @property
    def d_p(self):
        return self.A.shape[1]

    @property
    def d_l(self):
        return self.B.shape[1]

    def evaluate(self, p, ell) -> np.ndarray:
        return self.u0 + self.A @ p + self.B @ ell + np.einsum("kij,i,j->k", self.C, p, ell)

    def evaluate_many_p(self, ps, ell) -> np.ndarray:
        """u for a batch of player actions against one loss; shape (n, d)."""
        W = self.A + np.einsum("kij,j->ki", self.C, ell)  # (d, d_p)
        return (self.u0 + self.B @ ell)[None, :] + ps @ W.T

    def direction_coeffs(self, lam):
        """<lam, u(p, ell)> = c0 + <cp, p> + <cl, ell> + p . M . ell."""
        lam = np.asarray(lam, dtype=np.float64)
        return (
            float(lam @ self.u0),
            self.A.T @ lam,
            self.B.T @ lam,
            np.einsum("k,kij->ij", lam, self.C),
        )

    def directional_profile(self, lam, ps, ells) -> np.ndarray:
        """Matrix of <lam, u(p_i, ell_j)>, shape (len(ps), len(ells))."""
        c0, cp, cl, M = self.direction_coeffs(lam)
        return c0 + (ps @ cp)[:, None] + (ells @ cl)[None, :] + ps @ M @ ells.T

    def gradient_bound(self, adversary_set: ActionSet) -> float:
        """Upper bound on ||grad_p <lam, u>|| over unit lam and ell in L."""
        r_l = adversary_set.outer_radius()
        a_norm = float(np.linalg.norm(self.A, 2))
        c_norm = sum(float(np.linalg.norm(self.C[k], 2)) for k in range(self.d))
        return a_norm + c_norm * r_l

    def to_json(self):
        return {"u0": self.u0.tolist(), "A": self.A.tolist(),
                "B": self.B.tolist(), "C": self.C.tolist()}

    @staticmethod
    def from_json(obj):
        return BiAffinePayoff(u0=obj["u0"], A=obj["A"], B=obj["B"], C=obj["C"])


# ---------------------------------------------------------------------------
# response functions


class PiecewiseConstantResponse:
    """First matching cell wins; a cell is a halfspace intersection over L."""

    kind = "piecewise"

    def __init__(self, cells):
        # cells: list of (halfspaces, action); halfspace = (normal a, offset b)
        # meaning <a, ell> <= b
        self.cells = [
            (
                [(np.asarray(a, dtype=np.float64), float(b)) for a, b in halfspaces],
                np.asarray(action, dtype=np.float64),
            )
            for halfspaces, action in cells
        ]

    def evaluate(self, ell, tol=MEMBERSHIP_TOL):
        for halfspaces, action in self.cells:
            if all(float(a @ ell) <= b + tol for a, b in halfspaces):
                return action.copy()
        raise UncoveredPoint(f"no response cell covers ell={np.asarray(ell).tolist()}")

    def to_json(self):
        return {
            "kind": "piecewise",
            "cells": [
                {"halfspaces": [{"a": a.tolist(), "b": b} for a, b in hs],
                 "action": act.tolist()}
                for hs, act in self.cells
            ],
        }


class AffineResponse:
    """p*(ell) = clip_P(W ell + offset); the clip is Euclidean projection."""

    kind = "affine"

    def __init__(self, matrix, offset, player_set: ActionSet):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.offset = np.asarray(offset, dtype=np.float64)
        self.player_set = player_set

    def evaluate(self, ell, tol=MEMBERSHIP_TOL):
        raw = self.matrix @ ell + self.offset
        if self.player_set.contains(raw, tol):
            return raw
        return self.player_set.project(raw)

    def to_json(self):
        return {"kind": "affine", "matrix": self.matrix.tolist(), "offset": self.offset.tolist()}


class TabulatedResponse:
    """Interpolation-free nearest-node lookup on an axis-aligned grid over L."""

    kind = "tabulated"

    def __init__(self, axes, values):
        self.axes = [np.asarray(a, dtype=np.float64) for a in axes]
        self.values = np.asarray(values, dtype=np.float64)

    def evaluate(self, ell, tol=MEMBERSHIP_TOL):
        idx = tuple(int(np.argmin(np.abs(ax - x))) for ax, x in zip(self.axes, ell))
        return self.values[idx].copy()

    def to_json(self):
        return {"kind": "tabulated", "axes": [a.tolist() for a in self.axes],
                "values": self.values.tolist()}


class SignResponse:
    """p*(ell)_i = sign(ell_i) with the fixed tie rule sign(0) = +1."""

    kind = "sign"

    def evaluate(self, ell, tol=MEMBERSHIP_TOL):
        ell = np.asarray(ell, dtype=np.float64)
        return np.where(ell >= 0.0, 1.0, -1.0)

    def to_json(self):
        return {"kind": "sign"}


def response_from_json(obj, player_set: ActionSet):
    kind = obj["kind"]
    if kind == "piecewise":
        cells = [
            ([(h["a"], h["b"]) for h in cell["halfspaces"]], cell["action"])
            for cell in obj["cells"]
        ]
        return PiecewiseConstantResponse(cells)
    if kind == "affine":
        return AffineResponse(obj["matrix"], obj["offset"], player_set)
    if kind == "tabulated":
        return TabulatedResponse(obj["axes"], obj["values"])
    if kind == "sign":
        return SignResponse()
    raise ValueError(f"unknown response kind {kind!r}")


# ---------------------------------------------------------------------------
# instance


@dataclass(frozen=True)
class GameInstance:
    player_set: ActionSet
    adversary_set: ActionSet
    payoff: BiAffinePayoff
    response: object

    def __post_init__(self):
        if self.payoff.d_p != self.player_set.dim:
            raise DimensionMismatch("payoff player dimension != player set dimension")
        if self.payoff.d_l != self.adversary_set.dim:
            raise DimensionMismatch("payoff adversary dimension != adversary set dimension")

    @property
    def d(self):
        return self.payoff.d

    @property
    def d_p(self):
        return self.player_set.dim

    @property
    def d_l(self):
        return self.adversary_set.dim

    def response_image(self, ells) -> np.ndarray:
        """u(p*(ell), ell) for each row of ells; shape (n, d)."""
        ells = np.atleast_2d(np.asarray(ells, dtype=np.float64))
        out = np.empty((ells.shape[0], self.d))
        for i, ell in enumerate(ells):
            out[i] = self.payoff.evaluate(self.response.evaluate(ell), ell)
        return out

    def to_json(self):
        return {
            "d_p": self.d_p,
            "d_l": self.d_l,
            "d": self.d,
            "player_set": self.player_set.to_json(),
            "adversary_set": self.adversary_set.to_json(),
            "payoff": self.payoff.to_json(),
            "response": self.response.to_json(),
        }

    @staticmethod
    def from_json(obj):
        player = ActionSet.from_json(obj["player_set"])
        return GameInstance(
            player_set=player,
            adversary_set=ActionSet.from_json(obj["adversary_set"]),
            payoff=BiAffinePayoff.from_json(obj["payoff"]),
            response=response_from_json(obj["response"], player),
        )


def load_instance(path) -> GameInstance:
    with open(path) as fh:
        return GameInstance.from_json(json.load(fh))


def save_instance(instance: GameInstance, path):
    with open(path, "w") as fh:
        json.dump(instance.to_json(), fh, indent=1)


# ---------------------------------------------------------------------------
# operations


def payoff(instance: GameInstance, p, ell, tol=MEMBERSHIP_TOL) -> np.ndarray:
    """Evaluate u(p, ell) with membership checks (a failure flags a bug upstream)."""
    p = np.asarray(p, dtype=np.float64)
    ell = np.asarray(ell, dtype=np.float64)
    if p.shape[0] != instance.d_p or ell.shape[0] != instance.d_l:
        raise DimensionMismatch(
            f"p has dim {p.shape[0]} (want {instance.d_p}), "
            f"ell has dim {ell.shape[0]} (want {instance.d_l})"
        )
    if not instance.player_set.contains(p, tol):
        raise MembershipViolation(f"player action outside P: {p.tolist()}")
    if not instance.adversary_set.contains(ell, tol):
        raise MembershipViolation(f"adversary action outside L: {ell.tolist()}")
    return instance.payoff.evaluate(p, ell)


def response(instance: GameInstance, ell, tol=MEMBERSHIP_TOL) -> np.ndarray:
    ell = np.asarray(ell, dtype=np.float64)
    if ell.shape[0] != instance.d_l:
        raise DimensionMismatch(f"ell has dim {ell.shape[0]}, want {instance.d_l}")
    if not instance.adversary_set.contains(ell, tol):
        raise MembershipViolation(f"loss outside L: {ell.tolist()}")
    return instance.response.evaluate(ell, tol)


# ---------------------------------------------------------------------------
# validation


@dataclass
class Violation:
    check: str
    message: str
    witness: list


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check, message, witness):
        self.violations.append(Violation(check, message, np.asarray(witness).tolist()))


def validate_instance(instance: GameInstance, samples=10_000, seed=0) -> ValidationReport:
    """Sampling-based audit of the standing assumptions.

    Checks P's isotropic position (unit ball inside, radius-d_p ball
    outside), the payoff bound ||u|| <= 1 over sampled point pairs plus all
    vertex pairs when both sets are vertex-described, and response coverage
    with outputs inside P. Violations are report entries, never exceptions.
    """
    rng = np.random.default_rng(seed)
    report = ValidationReport()
    P, L = instance.player_set, instance.adversary_set

    n_dirs = max(64, samples // 10)
    dirs = rng.standard_normal((n_dirs, P.dim))
    dirs = np.vstack([dirs / np.linalg.norm(dirs, axis=1, keepdims=True), np.eye(P.dim), -np.eye(P.dim)])
    for lam in dirs:
        s = P.support(lam)
        if s < 1.0 - 1e-9:
            report.add("isotropy", f"support {s:.6g} < 1 (unit ball not contained)", lam)
            break
    for lam in dirs:
        s = P.support(lam)
        if s > P.dim + 1e-9:
            report.add("isotropy", f"support {s:.6g} > dim {P.dim}", lam)
            break

    p_ext = P.extreme_points() if P.kind != "ball" else None
    l_ext = L.extreme_points() if L.kind != "ball" else None
    if p_ext is not None and l_ext is not None and p_ext.shape[0] * l_ext.shape[0] <= samples:
        p_pts, l_pts = p_ext, l_ext
        exhaustive = True
    else:
        m = max(16, int(np.sqrt(samples)))
        p_pts = np.vstack([x for x in (p_ext, P.sample(rng, m), P.boundary_sample(rng, m)) if x is not None])
        l_pts = np.vstack([x for x in (l_ext, L.sample(rng, m), L.boundary_sample(rng, m)) if x is not None])
        exhaustive = False
    worst = (0.0, None, None)
    for p in p_pts:
        us = instance.payoff.u0[None, :] + (instance.payoff.A @ p)[None, :] + l_pts @ instance.payoff.B.T \
            + l_pts @ np.einsum("kij,i->kj", instance.payoff.C, p).T
        norms = np.linalg.norm(us, axis=1)
        j = int(np.argmax(norms))
        if norms[j] > worst[0]:
            worst = (float(norms[j]), p, l_pts[j])
    if worst[0] > 1.0 + 1e-9:
        kindtag = "exact on vertex pairs" if exhaustive else "sampled"
        report.add("payoff_bound", f"||u|| = {worst[0]:.6g} > 1 ({kindtag})",
                   np.concatenate([worst[1], worst[2]]))

    n_resp = min(samples, 2000)
    ells = L.sample(rng, n_resp)
    if l_ext is not None:
        ells = np.vstack([ells, l_ext])
    for ell in ells:
        try:
            p_star = instance.response.evaluate(ell)
        except UncoveredPoint:
            report.add("response_coverage", "no cell covers a sampled loss", ell)
            continue
        if not P.contains(p_star, MEMBERSHIP_TOL):
            report.add("response_membership", "response output outside P", ell)
    return report


# ---------------------------------------------------------------------------
# running average


class RunningAverage:
    """Incremental mean of payoff vectors; confined to a single run."""

    def __init__(self, dim):
        self.count = 0
        self.mean = np.zeros(dim)

    def update(self, v):
        self.count += 1
        self.mean = self.mean + (np.asarray(v, dtype=np.float64) - self.mean) / self.count
        return self.mean

    def copy(self):
        out = RunningAverage(self.mean.shape[0])
        out.count = self.count
        out.mean = self.mean.copy()
        return out
