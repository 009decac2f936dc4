"""
Training modules for LayerAgg.

Modules:
    optim: Adam and gradient-descent steps
    training: Training loop, reports and evaluation
    gradcheck: Finite-difference suite over interfaces and heads
    bundle: LIM model bundle reader and writer
    experiment: Collision experiment harness with a results table
"""

__version__ = "1.0.0"

from .optim import AdamState, OptimizerKind, adam_step, gd_step
from .bundle import ModelBundle, load_bundle, save_bundle
from .training import EvalResult, TrainConfig, TrainReport, evaluate, evaluate_dataset, train, train_on_datasets
from .gradcheck import GradcheckResult, check_case, gradcheck_suite
from .experiment import ExperimentConfig, run_experiment

__all__ = [
    "AdamState",
    "OptimizerKind",
    "adam_step",
    "gd_step",
    "ModelBundle",
    "load_bundle",
    "save_bundle",
    "EvalResult",
    "TrainConfig",
    "TrainReport",
    "evaluate",
    "evaluate_dataset",
    "train",
    "train_on_datasets",
    "GradcheckResult",
    "check_case",
    "gradcheck_suite",
    "ExperimentConfig",
    "run_experiment",
]
