import logging
import math

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import STREAM_RESTART
from harnack_lab.semigroup.estimates import McEstimate, estimate_functional, sample_terminal
from harnack_lab.semigroup.test_functions import TestFunction

logger = logging.getLogger(__name__)


@serde
class CompositionReport:
    T: float
    split: float
    direct: McEstimate
    composed: McEstimate
    difference: float
    combined_stderr: float
    consistent: bool


def default_split(T: float) -> float:
    """(T - 1)^+ when T > 1, else T/2."""
    return T - 1.0 if T > 1.0 else T / 2.0


def composed_estimate(problem: SdeProblem, f: TestFunction, T: float, x, count: int, seed: int,
                      split: float | None = None, dt: float | None = None) -> McEstimate:
    """E f(X_T) assembled by restarting from the states saved at `split` with fresh noise."""
    split = default_split(T) if split is None else split
    if not 0.0 <= split <= T:
        raise ArgumentError(f"split time must lie in [0, {T}], got {split}")
    first, _ = sample_terminal(problem, 0.0, split, x, count, seed, dt)
    second, _ = sample_terminal(problem, split, T, first, first.shape[0], seed, dt, stream=STREAM_RESTART)
    x_list = np.atleast_1d(np.asarray(x, dtype=float)).tolist()
    return McEstimate.from_samples(f(second), kind="composed", f=f.name, t=T, x=x_list, seed=seed)


def composition_check(problem: SdeProblem, f: TestFunction, T: float, x, count: int, seed: int,
                      split: float | None = None, dt: float | None = None) -> CompositionReport:
    """Direct E f(X_T) against the two-stage estimate through the saved states at `split`."""
    split = default_split(T) if split is None else split
    direct = estimate_functional(problem, "plain", f, 0.0, T, x, count, seed, dt=dt)
    composed = composed_estimate(problem, f, T, x, count, seed, split, dt)
    difference = composed.mean - direct.mean
    combined = math.hypot(direct.stderr, composed.stderr)
    consistent = abs(difference) <= 3.0 * combined if combined > 0 else difference == 0.0
    logger.debug("composition at split %g: direct %.5g, composed %.5g", split, direct.mean, composed.mean)
    return CompositionReport(T, split, direct, composed, difference, combined, bool(consistent))
