"""Experiment matrix runner: learner x adversary x horizon, with rate fits.

Runs are deterministic given the config: all randomness flows through
per-row seeds (plus the APPROACH_LAB_SEED_OFFSET environment variable), and
rows are sorted before writing. metrics.csv is byte-reproducible across
invocations by construction; measured wall-clock times therefore live in
metrics.json only and the csv wall_ms column is fixed to 0.
"""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adversaries import AdversarySpec, ground_truth_targets, make_adversary
from .core import GameInstance, load_instance
from .errors import NoGroundTruth, TooFewPoints
from .framework import (
    EpochSchedule,
    LossRule,
    TargetFunction,
    preset,
    run_epoch_learner,
)
from .geometry import dist_to_hull, qint_polygon_2d
from .lowdim import run_one_dim, run_two_dim

CSV_HEADER = "config_id,T,seed,dist_truth,dist_empirical,dist_trimmed,err_max,reg_inner,reg_outer,wall_ms"
SCHEMA_VERSION = 1
SEED_ENV = "APPROACH_LAB_SEED_OFFSET"


@dataclass
class ExperimentConfig:
    config_id: str
    instance: GameInstance
    adversary: AdversarySpec
    learner: dict
    horizons: list
    seeds: list
    epsilon: float = 0.0
    checkpoint_min: int = 256
    checkpoint_factor: int = 2
    audit: bool = True
    mesh: float = 1e-2

    def __post_init__(self):
        self.horizons = sorted(int(t) for t in self.horizons)
        if any(t <= 0 for t in self.horizons):
            raise ValueError("horizons must be positive")
        if not self.seeds and self.horizons:
            raise ValueError("seeds must be nonempty")

    @staticmethod
    def from_json(obj, base_dir="."):
        inst = obj["instance"]
        if "path" in inst:
            instance = load_instance(os.path.join(base_dir, inst["path"]))
        else:
            instance = GameInstance.from_json(inst)
        return ExperimentConfig(
            config_id=obj["config_id"],
            instance=instance,
            adversary=AdversarySpec.from_json(obj["adversary"]),
            learner=obj["learner"],
            horizons=obj["horizons"],
            seeds=obj.get("seeds", [0]),
            epsilon=obj.get("epsilon", 0.0),
            checkpoint_min=obj.get("checkpoints", {}).get("min", 256),
            checkpoint_factor=obj.get("checkpoints", {}).get("factor", 2),
            audit=obj.get("audit", True),
            mesh=obj.get("measure", {}).get("mesh", 1e-2),
        )


@dataclass
class MetricsRow:
    config_id: str
    T: int
    seed: int
    dist_truth: float = float("nan")
    dist_empirical: float = float("nan")
    dist_trimmed: float = float("nan")
    err_max: float = float("nan")
    reg_inner: float = float("nan")
    reg_outer: float = float("nan")
    wall_ms: float = 0.0
    error: str = ""
    extra: dict = field(default_factory=dict)
    curve: list = field(default_factory=list)  # (t, dist_truth at prefix)

    def csv_line(self) -> str:
        def fmt(x):
            return "" if np.isnan(x) else repr(float(x))

        return ",".join([
            self.config_id, str(self.T), str(self.seed),
            fmt(self.dist_truth), fmt(self.dist_empirical), fmt(self.dist_trimmed),
            fmt(self.err_max), fmt(self.reg_inner), fmt(self.reg_outer), "0",
        ])


@dataclass
class RateFit:
    slope: float
    intercept: float
    r2: float
    horizon_range: tuple
    flagged: bool = False


def measure_distance(u_bar, target_cloud) -> float:
    """Distance of the average payoff to a sampled target model."""
    d, _ = dist_to_hull(np.asarray(u_bar, dtype=np.float64), target_cloud)
    return float(d)


def fit_rate(rows, column="dist_truth") -> RateFit:
    """Least squares on (log T, log dist) over per-horizon mean distances.

    Refuses (flags) fits with R^2 < 0.5; raises TooFewPoints below 3
    usable checkpoints. Accepts MetricsRow objects or (T, dist) pairs.
    """
    by_T = {}
    for r in rows:
        t, d = (r.T, getattr(r, column)) if isinstance(r, MetricsRow) else (r[0], r[1])
        if np.isnan(d):
            continue
        by_T.setdefault(int(t), []).append(float(d))
    pts = [(t, float(np.mean(ds))) for t, ds in sorted(by_T.items())]
    pts = [(t, d) for t, d in pts if d > 1e-9]
    if len(pts) < 3:
        raise TooFewPoints(f"need >= 3 checkpoints with positive distance, got {len(pts)}")
    x = np.log([t for t, _ in pts])
    y = np.log([d for _, d in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r2=r2,
        horizon_range=(pts[0][0], pts[-1][0]),
        flagged=r2 < 0.5,
    )


# ---------------------------------------------------------------------------
# single-cell execution


def _checkpoint_schedule(T, cp_min, factor):
    out = []
    c = cp_min
    while c < T:
        out.append(c)
        c *= factor
    out.append(T)
    return out


def _trimmed_target_cloud(instance, played_ells, removals, mesh):
    """Exact S(Q_int^eps) model for 2-D losses via the depth-region polygon."""
    poly = qint_polygon_2d(played_ells, removals)
    if poly.shape[0] == 0:
        return None
    if poly.shape[0] <= 2:
        pts = poly
    else:
        lo, hi = poly.min(axis=0), poly.max(axis=0)
        ax = [np.arange(lo[j], hi[j] + mesh, mesh) for j in range(2)]
        grid = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 2)
        inside = _kernels.points_in_hull_2d(grid, poly, 1e-12)
        pts = np.vstack([poly, grid[inside]])
    return instance.response_image(pts)


def _run_learner(config: ExperimentConfig, T, seed, checkpoints):
    learner = config.learner
    instance = config.instance
    adv = make_adversary(config.adversary, instance, T, seed)
    if "preset" in learner:
        ps = preset(learner["preset"], T, instance.d_p, epsilon=config.epsilon)
        tr = run_epoch_learner(
            instance, adv, ps.schedule(T), ps.rule, ps.target,
            inner=ps.inner, seed=seed, audit=config.audit,
            checkpoints=checkpoints, net_resolution=ps.net_resolution,
        )
        return tr, ps
    algo = learner.get("algorithm")
    if algo == "one_dim":
        return run_one_dim(instance, adv, T, seed=seed), None
    if algo == "two_dim":
        return run_two_dim(instance, adv, T, seed=seed), None
    rule = LossRule(**learner["rule"])
    target = TargetFunction(**learner["target"])
    sched = EpochSchedule(T=T, L=int(learner["L"]))
    tr = run_epoch_learner(
        instance, adv, sched, rule, target,
        inner=learner.get("inner", "auto"), seed=seed, audit=config.audit,
        checkpoints=checkpoints,
        net_resolution=learner.get("net_resolution"),
    )
    return tr, None


def run_cell(config: ExperimentConfig, T, seed, truth=None) -> MetricsRow:
    """One (horizon, seed) run; component failures land in the error column."""
    row = MetricsRow(config_id=config.config_id, T=int(T), seed=int(seed))
    t0 = time.perf_counter()
    try:
        checkpoints = _checkpoint_schedule(T, config.checkpoint_min, config.checkpoint_factor)
        tr, _ = _run_learner(config, T, seed, checkpoints)
        row.err_max = float(np.max(tr.err_diag))
        row.reg_inner = tr.max_inner_regret()
        row.reg_outer = float(tr.outer_regret)
        emp_cloud = config.instance.response_image(tr.ell)
        row.dist_empirical = measure_distance(tr.u_bar, emp_cloud)
        if truth is None:
            try:
                truth = ground_truth_targets(config.adversary, config.instance,
                                             epsilon=config.epsilon, mesh=config.mesh)
            except NoGroundTruth:
                truth = None
        if truth is not None:
            row.dist_truth = measure_distance(tr.u_bar, truth.s_points)
            row.extra["decomposition_bound"] = tr.decomposition_bound()
            row.extra["decomposition_ok"] = bool(
                row.dist_truth <= tr.decomposition_bound() + 1e-12
            )
            csum = np.cumsum(tr.u, axis=0)
            for t_cp, _u in tr.checkpoints:
                prefix = csum[t_cp - 1] / t_cp
                row.curve.append((t_cp, measure_distance(prefix, truth.s_points)))
        if config.epsilon > 0 and config.instance.d_l <= 2 and T <= 4096:
            removals = int(np.floor(config.epsilon * T))
            if config.instance.d_l == 1:
                ell = np.sort(tr.ell[:, 0])
                lo, hi = ell[removals], ell[-1 - removals]
                pts = np.linspace(lo, hi, max(2, int((hi - lo) / config.mesh) + 1))[:, None]
                cloud = config.instance.response_image(pts)
            else:
                cloud = _trimmed_target_cloud(config.instance, tr.ell, removals, config.mesh)
            if cloud is not None:
                row.dist_trimmed = measure_distance(tr.u_bar, cloud)
        row.extra["audit_checks"] = tr.audit_checks
        row.extra["audit_violations"] = tr.audit_violations
        if tr.meta:
            row.extra.update({k: v for k, v in tr.meta.items()
                              if isinstance(v, (int, float, str, list))})
    except Exception as exc:  # per-row isolation: the matrix never aborts
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_ms = 1000.0 * (time.perf_counter() - t0)
    return row


def _cell_task(args):
    config, T, seed, truth = args
    return run_cell(config, T, seed, truth)


def run_matrix(config: ExperimentConfig, workers: int = 1, out_dir=None) -> list:
    """All (horizon, seed) cells of a config; optionally writes artifacts.

    Rows are sorted by (T, seed) regardless of completion order. The seed
    offset from APPROACH_LAB_SEED_OFFSET is added to every seed.
    """
    offset = int(os.environ.get(SEED_ENV, "0"))
    try:
        truth = ground_truth_targets(config.adversary, config.instance,
                                     epsilon=config.epsilon, mesh=config.mesh)
    except NoGroundTruth:
        truth = None
    tasks = [(config, T, seed + offset, truth)
             for T in config.horizons for seed in config.seeds]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_task, tasks))
    else:
        rows = [_cell_task(t) for t in tasks]
    rows.sort(key=lambda r: (r.config_id, r.T, r.seed))
    if out_dir is not None:
        write_outputs(rows, out_dir)
    return rows


def run_config_file(path, workers: int = 1, out_dir=None) -> list:
    """Run one config or a list of configs from a JSON file."""
    with open(path) as fh:
        obj = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    configs = obj if isinstance(obj, list) else [obj]
    rows = []
    for cobj in configs:
        cfg = ExperimentConfig.from_json(cobj, base_dir=base)
        rows.extend(run_matrix(cfg, workers=workers))
    rows.sort(key=lambda r: (r.config_id, r.T, r.seed))
    if out_dir is not None:
        write_outputs(rows, out_dir)
    return rows


# ---------------------------------------------------------------------------
# artifacts


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_outputs(rows, out_dir):
    """metrics.csv (byte-reproducible), metrics.json, rates.json, plotdata.csv."""
    os.makedirs(out_dir, exist_ok=True)
    lines = [CSV_HEADER] + [r.csv_line() for r in rows]
    _atomic_write(os.path.join(out_dir, "metrics.csv"), "\n".join(lines) + "\n")

    payload = {"schema_version": SCHEMA_VERSION, "rows": []}
    for r in rows:
        rec = {
            "config_id": r.config_id, "T": r.T, "seed": r.seed,
            "dist_truth": None if np.isnan(r.dist_truth) else r.dist_truth,
            "dist_empirical": None if np.isnan(r.dist_empirical) else r.dist_empirical,
            "dist_trimmed": None if np.isnan(r.dist_trimmed) else r.dist_trimmed,
            "err_max": None if np.isnan(r.err_max) else r.err_max,
            "reg_inner": None if np.isnan(r.reg_inner) else r.reg_inner,
            "reg_outer": None if np.isnan(r.reg_outer) else r.reg_outer,
            "wall_ms": r.wall_ms, "error": r.error,
        }
        rec.update(r.extra)
        payload["rows"].append(rec)
    _atomic_write(os.path.join(out_dir, "metrics.json"), json.dumps(payload, indent=1))

    fits = {"schema_version": SCHEMA_VERSION, "fits": {}}
    for cid in sorted({r.config_id for r in rows}):
        sub = [r for r in rows if r.config_id == cid and not r.error]
        try:
            f = fit_rate(sub)
            fits["fits"][cid] = {
                "slope": f.slope, "intercept": f.intercept, "r2": f.r2,
                "horizon_range": list(f.horizon_range), "flagged": f.flagged,
            }
        except TooFewPoints:
            fits["fits"][cid] = None
    _atomic_write(os.path.join(out_dir, "rates.json"), json.dumps(fits, indent=1))

    plot_lines = ["config_id,T,seed,log2_T,log2_dist"]
    for r in rows:
        for t_cp, d in r.curve:
            if d > 1e-300:
                plot_lines.append(
                    f"{r.config_id},{r.T},{r.seed},{repr(np.log2(t_cp))},{repr(float(np.log2(d)))}"
                )
    _atomic_write(os.path.join(out_dir, "plotdata.csv"), "\n".join(plot_lines) + "\n")
