"""
Path simulation of SDEs driven by Brownian motion or symmetric alpha-stable
noise, with counter-based seeding.
"""

from .coupling import CouplingStatistics, exponential_integral, simulate_coupled_pair
from .euler import PathEnsemble, WeakOrderReport, simulate_paths, terminal_states, weak_order_check
from .problem import Driver, SdeProblem, is_identity
from .rng import BLOCK_SIZE, block_generator, derive_seed
from .stable import sample_stable_increment, stable_density_1d_cauchy

__all__ = [
    "CouplingStatistics",
    "exponential_integral",
    "simulate_coupled_pair",
    "PathEnsemble",
    "WeakOrderReport",
    "simulate_paths",
    "terminal_states",
    "weak_order_check",
    "Driver",
    "SdeProblem",
    "is_identity",
    "BLOCK_SIZE",
    "block_generator",
    "derive_seed",
    "sample_stable_increment",
    "stable_density_1d_cauchy",
]
