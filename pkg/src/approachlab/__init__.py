"""Opportunistic Blackwell approachability: algorithms and experiment harness."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (
    ActionSet,
    BiAffinePayoff,
    GameInstance,
    RunningAverage,
    load_instance,
    payoff,
    response,
    save_instance,
    validate_instance,
)
from .adversaries import AdversarySpec, ground_truth_targets, make_adversary
from .framework import (
    EpochSchedule,
    LossRule,
    TargetFunction,
    Transcript,
    preset,
    run_epoch_learner,
)
from .harness import ExperimentConfig, MetricsRow, fit_rate, measure_distance, run_matrix
from .lowdim import run_one_dim, run_two_dim

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "ActionSet",
    "BiAffinePayoff",
    "GameInstance",
    "RunningAverage",
    "payoff",
    "response",
    "validate_instance",
    "load_instance",
    "save_instance",
    "AdversarySpec",
    "make_adversary",
    "ground_truth_targets",
    "EpochSchedule",
    "LossRule",
    "TargetFunction",
    "Transcript",
    "preset",
    "run_epoch_learner",
    "run_one_dim",
    "run_two_dim",
    "ExperimentConfig",
    "MetricsRow",
    "run_matrix",
    "fit_rate",
    "measure_distance",
    "__version__",
]
