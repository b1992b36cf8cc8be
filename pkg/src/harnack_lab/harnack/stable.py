"""
Harnack inequality with a power-law factor for equations driven by rotationally
symmetric alpha-stable noise, and two-sided kernel bounds that support it.
"""
import logging

import numpy as np
from scipy.stats import iqr, norm
from serde import serde

from harnack_lab.errors import ArgumentError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import derive_seed
from harnack_lab.semigroup.composition import composed_estimate
from harnack_lab.semigroup.estimates import McEstimate, estimate_functional, sample_terminal
from harnack_lab.semigroup.test_functions import TestFunction

from .report import HarnackReport, InequalityConstants, Statement, as_list, classify, pairs_distance

logger = logging.getLogger(__name__)

TAIL_RADIUS = 8.0
MIN_KERNEL_COUNT = 10.0
POINT_CHUNK = 16


def stable_factor(alpha: float, dimension: int, distance: float, T: float) -> float:
    """(1 + |x - y| / (T ^ 1)^(1/alpha))^(d + alpha)"""
    return (1.0 + distance / min(T, 1.0) ** (1.0 / alpha)) ** (dimension + alpha)


def _check_stable(problem: SdeProblem):
    if not problem.driver.is_stable:
        raise ArgumentError("this check needs a stable driver")
    if not 1.0 <= problem.driver.alpha < 2.0:
        raise ArgumentError(f"stability index must lie in [1, 2), got {problem.driver.alpha}")


def stable_base_estimates(problem: SdeProblem, f: TestFunction, T: float, x, y, count: int, seed: int,
                          dt: float | None = None) -> tuple[McEstimate, McEstimate]:
    """P_T f at x and y; for T > 1 through P_{T ^ 1} P_{(T - 1)^+} with restarted paths."""
    if T > 1.0:
        at_x = composed_estimate(problem, f, T, x, count, seed, split=T - 1.0, dt=dt)
        at_y = composed_estimate(problem, f, T, y, count, seed, split=T - 1.0, dt=dt)
    else:
        at_x = estimate_functional(problem, "plain", f, 0.0, T, x, count, seed, dt=dt)
        at_y = estimate_functional(problem, "plain", f, 0.0, T, y, count, seed, dt=dt)
    return at_x, at_y


def verify_stable_harnack(problem: SdeProblem, f: TestFunction, T: float, x, y, count: int, seed: int,
                          C: float, dt: float | None = None) -> HarnackReport:
    _check_stable(problem)
    if not f.nonnegative:
        raise ArgumentError(f"the stable Harnack inequality needs f >= 0, {f.name} is not flagged")
    if not T > 0:
        raise ArgumentError(f"T must be positive, got {T}")
    alpha = problem.driver.alpha
    distance = pairs_distance(x, y)
    factor = stable_factor(alpha, problem.dimension, distance, T)
    at_x, at_y = stable_base_estimates(problem, f, T, x, y, count, seed, dt)
    rhs = McEstimate.make(C * factor * at_y.mean, C * factor * at_y.stderr, at_y.count, at_y.confidence,
                          kind="stable-rhs", f=f.name, t=T, x=at_y.x, seed=seed)
    paired = distance == 0.0
    verdict = classify(at_x, rhs, paired)
    constants = InequalityConstants(C=C, source=f"stable driver alpha={alpha:g}")
    return HarnackReport(Statement.STABLE_HARNACK, as_list(x), as_list(y), 0.0, T, f.name, at_x, rhs, factor,
                         constants, verdict, paired=paired)


def robust_bandwidth(samples: np.ndarray) -> np.ndarray:
    """0.9 min(sd, IQR / 1.34) N^(-1/5) per axis."""
    n = samples.shape[0]
    spread = np.minimum(samples.std(axis=0, ddof=1), iqr(samples, axis=0) / 1.34)
    return 0.9 * spread * n ** -0.2


def kernel_density(samples: np.ndarray, points: np.ndarray,
                   bandwidth: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian product-kernel density of `samples` (N, d) at `points` (m, d)."""
    h = robust_bandwidth(samples) if bandwidth is None else np.asarray(bandwidth, dtype=float)
    if np.any(h <= 0):
        raise ArgumentError(f"degenerate sample: bandwidth {h.tolist()}")
    values = np.empty(points.shape[0])
    for start in range(0, points.shape[0], POINT_CHUNK):
        chunk = points[start:start + POINT_CHUNK]
        u = (chunk[:, None, :] - samples[None, :, :]) / h
        values[start:start + POINT_CHUNK] = norm.pdf(u).prod(axis=2).mean(axis=1)
    return values / np.prod(h), h


def kernel_scale(t: float, distance, alpha: float, dimension: int) -> np.ndarray:
    """t^(-d/alpha) ^ t / |x - y|^(d + alpha)"""
    distance = np.asarray(distance, dtype=float)
    with np.errstate(divide="ignore"):
        tail = np.where(distance > 0, t / distance ** (dimension + alpha), np.inf)
    return np.minimum(t ** (-dimension / alpha), tail)


@serde
class KernelBoundsReport:
    t: float
    alpha: float
    dimension: int
    count: int
    c: float
    bandwidths: list[list[float]]
    probes_used: int
    probes_dropped: int
    den2_probes: int
    den2_worst_fraction: float
    den2_holds: bool


def verify_kernel_bounds(problem: SdeProblem, t: float, starts, targets, count: int, seed: int,
                         dt: float | None = None) -> KernelBoundsReport:
    """
    Fit the smallest c >= 1 with c^-1 k(t, x, z) <= p(t, x, z) <= c k(t, x, z) on
    the (start, target) grid, k = t^(-d/alpha) ^ t / |x - z|^(d+alpha), then check
    p(t, x, z) / p(t, y, z) <= 2^(alpha+d) c^2 (1 + |x - y| / t^(1/alpha))^(d+alpha)
    for every ordered pair of starts.
    """
    _check_stable(problem)
    if not 0.0 < t <= 1.0:
        raise ArgumentError(f"kernel bounds are stated for t in (0, 1], got {t}")
    alpha = problem.driver.alpha
    d = problem.dimension
    starts = np.asarray(starts, dtype=float).reshape(-1, d)
    targets = np.asarray(targets, dtype=float).reshape(-1, d)
    radius = TAIL_RADIUS * t ** (1.0 / alpha)

    densities = np.full((starts.shape[0], targets.shape[0]), np.nan)
    bandwidths = []
    dropped = 0
    c = 1.0
    for i, x in enumerate(starts):
        samples, _ = sample_terminal(problem, 0.0, t, x, count, derive_seed(seed, i), dt)
        gaps = np.linalg.norm(targets - x, axis=1)
        near = gaps <= radius
        if not np.any(near):
            bandwidths.append([])
            continue
        values, h = kernel_density(samples, targets[near])
        bandwidths.append(h.tolist())
        expected = values * samples.shape[0] * np.prod(2.0 * h)
        noisy = expected < MIN_KERNEL_COUNT
        if np.any(noisy):
            dropped += int(noisy.sum())
            logger.warning("dropped %d tail probes from x=%s below the density noise floor",
                           int(noisy.sum()), x.tolist())
        values = np.where(noisy, np.nan, values)
        densities[i, near] = values
        scale = kernel_scale(t, gaps[near], alpha, d)
        kept = ~np.isnan(values)
        if np.any(kept):
            c = max(c, float(np.max(np.maximum(values[kept] / scale[kept], scale[kept] / values[kept]))))

    worst = 0.0
    den2_probes = 0
    for i, j in ((i, j) for i in range(starts.shape[0]) for j in range(starts.shape[0])):
        both = ~np.isnan(densities[i]) & ~np.isnan(densities[j])
        if not np.any(both):
            continue
        bound = 2.0 ** (alpha + d) * c ** 2 * (1.0 + pairs_distance(starts[i], starts[j])
                                               / t ** (1.0 / alpha)) ** (d + alpha)
        ratios = densities[i, both] / densities[j, both]
        worst = max(worst, float(ratios.max() / bound))
        den2_probes += int(both.sum())
    used = int((~np.isnan(densities)).sum())
    logger.info("kernel bounds at t=%g: c=%.4g from %d probes (%d dropped)", t, c, used, dropped)
    return KernelBoundsReport(t, alpha, d, count, c, bandwidths, used, dropped, den2_probes, worst,
                              bool(worst <= 1.0))
