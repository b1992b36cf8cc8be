"""
Diagnostic for the interpolation identity behind the driftless log-Harnack
inequality:

    T_{s,u} log T_{u,t} f (x) - log T_{s,t} f (x)
        = - int_s^u T_{s,r} ( Gamma(r)(T_{r,t} f) / (T_{r,t} f)^2 ) (x) dr

Both sides come from nested estimates; the integral is a trapezoid rule over r.
"""
import logging
import math

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import STREAM_RESTART, derive_seed
from harnack_lab.semigroup.estimates import McEstimate, estimate_functional, sample_terminal
from harnack_lab.semigroup.test_functions import TestFunction

from .inequalities import DEFAULT_INNER, nested_log_estimate
from .report import Verdict, as_list

logger = logging.getLogger(__name__)

DEFAULT_NODES = 5
FD_STEP = 1e-2
# nested estimates with a standard error beyond this are not trusted
EXPLOSION = 1.0


@serde
class InterpolationReport:
    s: float
    u: float
    t: float
    x: list[float]
    f: str
    nodes: list[float]
    node_values: list[float]
    node_stderr: list[float]
    lhs: McEstimate
    rhs: McEstimate
    residual: float
    stderr: float
    verdict: Verdict


def _inner_means(problem: SdeProblem, f: TestFunction, r: float, t: float, starts: np.ndarray, inner: int,
                 seed: int, dt: float | None) -> np.ndarray:
    """T_{r,t} f at every start, each from `inner` restarted paths sharing one seed."""
    repeated = np.repeat(starts, inner, axis=0)
    final, ids = sample_terminal(problem, r, t, repeated, repeated.shape[0], seed, dt, stream=STREAM_RESTART)
    owners = ids // inner
    sums = np.bincount(owners, weights=f(final), minlength=starts.shape[0])
    counts = np.bincount(owners, minlength=starts.shape[0])
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts


def gamma_ratio_at(problem: SdeProblem, f: TestFunction, s: float, r: float, t: float, x, count: int, seed: int,
                   inner: int = DEFAULT_INNER, step: float = FD_STEP, dt: float | None = None) -> McEstimate:
    """T_{s,r}( Gamma(r)(g) / g^2 )(x) with g = T_{r,t} f and Gamma(g) = |sigma^T grad g|^2 / 2."""
    outer = max(2, count // inner)
    Z, _ = sample_terminal(problem, s, r, x, outer, seed, dt)
    shift = np.zeros_like(Z)
    shift[:, 0] = step
    inner_seed = derive_seed(seed, 1)
    g0 = _inner_means(problem, f, r, t, Z, inner, inner_seed, dt)
    gp = _inner_means(problem, f, r, t, Z + shift, inner, inner_seed, dt)
    gm = _inner_means(problem, f, r, t, Z - shift, inner, inner_seed, dt)
    grad = (gp - gm) / (2.0 * step)
    S = problem.diffusion_or_identity().checked_batch(min(r, problem.horizon), Z)
    values = 0.5 * (S[:, 0, 0] * grad) ** 2 / g0 ** 2
    values = values[np.isfinite(values)]
    return McEstimate.from_samples(values, kind="gamma-ratio", f=f.name, s=s, t=r, x=as_list(x), seed=seed)


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.zeros_like(nodes)
    gaps = np.diff(nodes)
    w[:-1] += gaps / 2.0
    w[1:] += gaps / 2.0
    return w


def _check_problem(problem: SdeProblem) -> None:
    if problem.dimension != 1:
        raise ArgumentError("the interpolation diagnostic runs in d = 1")
    if problem.driver.is_stable:
        raise ArgumentError("the interpolation diagnostic needs a Brownian driver")
    drift = problem.drift
    if not (drift.constant and np.all(drift(0.0, np.zeros(1)) == 0.0)):
        raise ArgumentError(f"the interpolation diagnostic needs a driftless problem, drift is {drift.name}")
    sigma = problem.diffusion_or_identity()
    if sigma.regularity.kind != "smooth":
        logger.warning("diffusion %s is tagged %s; finite differences of T f may be noisy",
                       sigma.name, sigma.regularity.kind)


def verify_interpolation_identity(problem: SdeProblem, f: TestFunction, s: float, u: float, t: float, x,
                                  count: int, seed: int, nodes: int = DEFAULT_NODES, inner: int = DEFAULT_INNER,
                                  dt: float | None = None) -> InterpolationReport:
    _check_problem(problem)
    if not f.at_least_one:
        raise ArgumentError(f"the interpolation identity needs f >= 1, {f.name} is not flagged")
    if not s <= u <= t:
        raise ArgumentError(f"need s <= u <= t, got s={s}, u={u}, t={t}")
    if nodes < 2:
        raise ArgumentError(f"need at least 2 quadrature nodes, got {nodes}")
    x_list = as_list(x)
    grid = np.linspace(s, u, nodes)

    if u == s or f.constant:
        zero = McEstimate.exact(0.0, kind="interpolation", f=f.name, s=s, t=t, x=x_list, seed=seed)
        return InterpolationReport(s, u, t, x_list, f.name, grid.tolist(), [0.0] * nodes, [0.0] * nodes,
                                   zero, zero, 0.0, 0.0, Verdict.HOLDS)

    nested = nested_log_estimate(problem, f, s, u, t, x, count, derive_seed(seed, 0), inner, dt)
    direct = estimate_functional(problem, "plain", f, s, t, x, count, derive_seed(seed, 1), dt=dt).log()
    lhs = McEstimate.make(nested.mean - direct.mean, math.hypot(nested.stderr, direct.stderr),
                          nested.count, kind="interpolation-lhs", f=f.name, s=s, t=t, x=x_list, seed=seed)

    estimates = [gamma_ratio_at(problem, f, s, float(r), t, x, count, derive_seed(seed, 2 + k), inner, dt=dt)
                 for k, r in enumerate(grid)]
    w = trapezoid_weights(grid)
    means = np.array([e.mean for e in estimates])
    errors = np.array([e.stderr for e in estimates])
    rhs = McEstimate.make(-float(w @ means), float(np.sqrt((w ** 2 * errors ** 2).sum())), nested.count,
                         kind="interpolation-rhs", f=f.name, s=s, t=t, x=x_list, seed=seed)

    residual = lhs.mean - rhs.mean
    stderr = math.hypot(lhs.stderr, rhs.stderr)
    if not (math.isfinite(residual) and math.isfinite(stderr)) or stderr > EXPLOSION:
        logger.warning("nested estimates exploded (stderr %.3g); interpolation diagnostic aborted", stderr)
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.HOLDS if abs(residual) <= 3.0 * stderr else Verdict.VIOLATED
    logger.info("interpolation identity on [%g, %g]: residual %.3g (stderr %.3g) -> %s", s, u, residual, stderr,
                verdict)
    return InterpolationReport(s, u, t, x_list, f.name, grid.tolist(), means.tolist(), errors.tolist(), lhs, rhs,
                               float(residual), float(stderr), verdict)
