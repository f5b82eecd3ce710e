"""Seeded simulation of cross validation experiments.

:mod:`~cvplan.montecarlo.distributions` describes and samples the data
laws, :mod:`~cvplan.montecarlo.engine` estimates ``v``, ``c`` and ``rho``
from repeated random splits. The table runners live in
:mod:`cvplan.montecarlo.tables`, which is imported on its own since it
pulls in every planner.
"""

from . import distributions, engine

__all__ = ["distributions", "engine"]
