"""epsflow: high-order solvers for 2D advection-diffusion with
epsilon-periodic velocity.

Fourth-order embedded-boundary space discretization (ghost points on a
level-set interface) combined with implicit time integrators of orders 1-3
whose accuracy is uniform in the oscillation period of the velocity.
"""

from .geometry import Grid, LevelSetDomain, PointClass, Classification, classify
from .timefactor import ConstantFactor, CosineFactor, StepIntegrals, integrals_for_step

__all__ = [
    "Grid",
    "LevelSetDomain",
    "PointClass",
    "Classification",
    "classify",
    "ConstantFactor",
    "CosineFactor",
    "StepIntegrals",
    "integrals_for_step",
]

__version__ = "0.1.0"
