"""This package plans cross validation experiments. It picks the training
size, the number of folds and the number of random splits that keep the
variance of the estimated generalization error small, and checks the
underlying approximations by simulation and by exact enumeration.
"""

from __future__ import annotations

__version__ = "0.1.0"

from . import errors
from . import config
from . import model
from . import index_combinatorics
from . import cv_variance
from . import loss_models
from . import split_optimizer
from . import regression_planner
from . import logistic_planner
from . import montecarlo
from . import converter
from . import printer
from .cv_variance import j_for_effectiveness, j_for_reduction
from .split_optimizer import optimal_k, optimal_n1
from .logistic_planner import algorithm1_optimal_n1

__all__ = [
    "errors",
    "config",
    "model",
    "index_combinatorics",
    "cv_variance",
    "loss_models",
    "split_optimizer",
    "regression_planner",
    "logistic_planner",
    "montecarlo",
    "converter",
    "printer",
    "j_for_effectiveness",
    "j_for_reduction",
    "optimal_n1",
    "optimal_k",
    "algorithm1_optimal_n1",
]
