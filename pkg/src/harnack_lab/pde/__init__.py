"""
Grid-based solvers for the backward parabolic system and the resolvent system
that generate the drift-removing transformations.
"""

from .derivatives import gradient_and_hessian
from .grid import GridFunction, SpaceTimeGrid, lipschitz_bound
from .operators import DifferenceStencils, covariance_field, first_difference, generator_matrix, second_difference
from .solvers import (
    PdeSolutionReport,
    manufactured_error,
    solve_backward_system,
    solve_resolvent_system,
)

__all__ = [
    "gradient_and_hessian",
    "GridFunction",
    "SpaceTimeGrid",
    "lipschitz_bound",
    "DifferenceStencils",
    "covariance_field",
    "first_difference",
    "generator_matrix",
    "second_difference",
    "PdeSolutionReport",
    "manufactured_error",
    "solve_backward_system",
    "solve_resolvent_system",
]
