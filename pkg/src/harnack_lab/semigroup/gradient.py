"""
Gradient estimate |grad P_t f|^2 <= C P_t |grad f|^2 by common random numbers,
and pathwise convergence of mollified-coefficient solutions.
"""
import logging
import math

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, DegenerateError
from harnack_lab.fields.coefficient_field import CoefficientField, zero_drift
from harnack_lab.fields.mollifier import mollify
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.semigroup.estimates import McEstimate, estimate_functional, sample_terminal
from harnack_lab.semigroup.test_functions import TestFunction

logger = logging.getLogger(__name__)

MIN_STEP = 1e-3
DEGENERATE_FLOOR = 1e-12


@serde
class GradientRatio:
    t: float
    x: list[float]
    step: float
    grad_squared: McEstimate
    rhs: McEstimate
    ratio: float
    ratio_stderr: float
    label: str = ""


@serde
class GradientRatioFamily:
    ns: list[int]
    ratios: list[GradientRatio]
    max_ratio: float
    bounded: bool


@serde
class MollificationReport:
    ns: list[int]
    distances: list[float]
    stderr: list[float]
    reference: int
    nonincreasing: bool


def _aligned(a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Restrict two ensembles to the path ids both kept."""
    (xa, ia), (xb, ib) = a, b
    if ia.shape == ib.shape and np.array_equal(ia, ib):
        return xa, xb
    _, ka, kb = np.intersect1d(ia, ib, return_indices=True)
    return xa[ka], xb[kb]


def estimate_gradient_ratio(problem: SdeProblem, f: TestFunction, t: float, x, count: int, seed: int,
                            dt: float | None = None, step: float | None = None, label: str = "") -> GradientRatio:
    """
    |grad P_t f(x)|^2 from central differences of P_t f at x +- h e_j sharing one
    seed, h = max(1e-3, sqrt(stderr of P_t f(x))); RHS is P_t |grad f|^2 (x).
    """
    if f.gradient is None:
        raise ArgumentError(f"{f.name} needs an analytic gradient")
    d = problem.dimension
    x = np.asarray(x, dtype=float).reshape(d)
    rhs = estimate_functional(problem, "plain", f.squared_gradient_norm(), 0.0, t, x, count, seed, dt=dt)
    if rhs.upper <= DEGENERATE_FLOOR:
        raise DegenerateError(f"P_t|grad f|^2 is indistinguishable from 0 for {f.name} at x={x.tolist()}")
    if step is None:
        pilot = estimate_functional(problem, "plain", f, 0.0, t, x, count, seed, dt=dt)
        step = max(MIN_STEP, math.sqrt(pilot.stderr))

    partials, partial_se = [], []
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        plus = sample_terminal(problem, 0.0, t, x + e, count, seed, dt)
        minus = sample_terminal(problem, 0.0, t, x - e, count, seed, dt)
        xp, xm = _aligned(plus, minus)
        diff = (f(xp) - f(xm)) / (2.0 * step)
        partials.append(float(diff.mean()))
        partial_se.append(float(diff.std(ddof=1) / math.sqrt(diff.shape[0])))
    g = np.array(partials)
    se = np.array(partial_se)
    grad_squared = McEstimate.make(float((g ** 2).sum()), float(np.sqrt(((2.0 * g * se) ** 2).sum())), count,
                                   kind="|grad P_t f|^2", f=f.name, t=t, x=x.tolist(), seed=seed)
    ratio = grad_squared.mean / rhs.mean
    ratio_se = ratio * math.hypot(grad_squared.stderr / grad_squared.mean if grad_squared.mean > 0 else 0.0,
                                  rhs.stderr / rhs.mean)
    return GradientRatio(t, x.tolist(), step, grad_squared, rhs, ratio, ratio_se, label)


def gradient_ratio_family(sigma: CoefficientField, drift: CoefficientField, f: TestFunction, t: float, x,
                          count: int, seed: int, ns=(1, 2, 4, 8), dt: float | None = None,
                          horizon: float | None = None) -> GradientRatioFamily:
    """Gradient ratio for the mollified coefficients sigma * rho_n over n; bounded means every ratio is finite."""
    ratios = []
    for n in ns:
        problem = SdeProblem(sigma.dimension, drift, mollify(sigma, n), horizon=horizon or t)
        ratios.append(estimate_gradient_ratio(problem, f, t, x, count, seed, dt, label=f"n={n}"))
    worst = max(r.ratio for r in ratios)
    return GradientRatioFamily(list(ns), ratios, worst, bool(math.isfinite(worst)))


def mollification_convergence(sigma: CoefficientField, x, t: float, schedule, count: int, seed: int,
                              drift: CoefficientField | None = None, dt: float | None = None) -> MollificationReport:
    """
    Mean pathwise distance E|Y^n_t - Y_t| under shared noise, with the largest n
    of the schedule as the reference solution.
    """
    ns = [int(n) for n in schedule]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ArgumentError(f"mollification schedule must be nonempty and increasing, got {ns}")
    d = sigma.dimension
    b = drift if drift is not None else zero_drift(d)
    problems = {n: SdeProblem(d, b, mollify(sigma, n), horizon=t) for n in ns}
    reference = sample_terminal(problems[ns[-1]], 0.0, t, x, count, seed, dt)
    distances, errors = [], []
    for n in ns:
        current = reference if n == ns[-1] else sample_terminal(problems[n], 0.0, t, x, count, seed, dt)
        yn, yref = _aligned(current, reference)
        gaps = np.linalg.norm(yn - yref, axis=1)
        distances.append(float(gaps.mean()))
        errors.append(float(gaps.std(ddof=1) / math.sqrt(gaps.shape[0])) if gaps.shape[0] > 1 else 0.0)
    nonincreasing = all(
        distances[k + 1] <= distances[k] + 3.0 * math.hypot(errors[k], errors[k + 1])
        for k in range(len(ns) - 1)
    )
    logger.debug("mollification distances %s", distances)
    return MollificationReport(ns, distances, errors, ns[-1], bool(nonincreasing))
