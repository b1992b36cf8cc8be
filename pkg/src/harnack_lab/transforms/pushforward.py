import logging
import math

import numpy as np
from scipy.stats import ks_2samp
from serde import serde

from harnack_lab.sde_sim.euler import terminal_states
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import STREAM_PATHS, STREAM_TRANSFORMED
from harnack_lab.transforms.transform_map import TransformMap

logger = logging.getLogger(__name__)

KS_COEFFICIENT_1PCT = 1.628


@serde
class PushforwardReport:
    t: float
    count: int
    distances: list[float]
    p_values: list[float]
    distance: float
    critical_value: float
    consistent: bool


def ks_critical_value(n: int, m: int, coefficient: float = KS_COEFFICIENT_1PCT) -> float:
    return coefficient * math.sqrt((n + m) / (n * m))


def pushforward_consistency(problem: SdeProblem, transform: TransformMap, transformed: SdeProblem,
                            x0, t: float, count: int, dt: float, seed: int) -> PushforwardReport:
    """
    Compare the law of Psi_t(X_t), X from the original equation, with the law of
    the conjugate solution started at Psi_0(x0), coordinate by coordinate.
    """
    x0 = np.asarray(x0, dtype=float).reshape(problem.dimension)
    direct = transform.forward(t, terminal_states(problem, x0, count, dt, t, seed, stream=STREAM_PATHS))
    start = transform.forward(0.0, x0[None, :])[0]
    conjugate = terminal_states(transformed, start, count, dt, t, seed, stream=STREAM_TRANSFORMED)
    distances, p_values = [], []
    for k in range(problem.dimension):
        result = ks_2samp(direct[:, k], conjugate[:, k])
        distances.append(float(result.statistic))
        p_values.append(float(result.pvalue))
    critical = ks_critical_value(direct.shape[0], conjugate.shape[0])
    distance = max(distances)
    logger.info("push-forward at t=%g: KS distance %.4g (1%% critical value %.4g)", t, distance, critical)
    return PushforwardReport(t, count, distances, p_values, distance, critical, bool(distance < critical))
