"""
Log-Harnack and power-Harnack checks. Both sides are Monte Carlo estimates
on a shared seed; the RHS carries the statement's additive term or exponent.
"""
import logging
import math

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import STREAM_RESTART
from harnack_lab.semigroup.estimates import McEstimate, estimate_functional, sample_terminal
from harnack_lab.semigroup.test_functions import TestFunction

from .report import (
    LOG_STATEMENTS,
    POWER_STATEMENTS,
    HarnackReport,
    InequalityConstants,
    Statement,
    Verdict,
    as_list,
    classify,
    kt_factor,
    pairs_distance,
)

logger = logging.getLogger(__name__)

DEFAULT_INNER = 64


def log_term(statement: Statement, constants: InequalityConstants, distance: float, s: float, t: float) -> float:
    """Additive term of the log-Harnack statement at squared distance |x - y|^2."""
    d2 = distance ** 2
    elapsed = t - s
    match statement:
        case Statement.DRIFT_LOG:
            constants.require(statement, "C", "delta")
            return constants.C * d2 / (constants.delta * elapsed)
        case Statement.DRIFTLESS_LOG:
            constants.require(statement, "C", "delta")
            return constants.C * d2 / (2.0 * constants.delta * elapsed)
        case Statement.TRANSFORMED_LOG:
            constants.require(statement, "K", "kappa")
            return 2.0 * d2 * kt_factor(constants.K, elapsed) / constants.kappa ** 2
        case Statement.WANG_LOG:
            constants.require(statement, "K", "kappa")
            return d2 * kt_factor(constants.K, elapsed) / (2.0 * constants.kappa ** 2)
    raise ArgumentError(f"{statement} is not a log-Harnack statement")


def power_threshold(kappa: float, delta: float) -> float:
    return (1.0 + delta / kappa) ** 2


def power_exponents(statement: Statement, constants: InequalityConstants, p: float, distance: float,
                    t: float) -> tuple[float, float]:
    """
    (exponent, alternative exponent) of the power-Harnack statement. With
    delta_p = max(delta, kappa (sqrt p - 1) / 2) the common factor is

        K sqrt p (sqrt p - 1) |x - y|^2 / (delta_p [(sqrt p - 1) kappa - delta_p] (1 - e^{-Kt}))

    divided by 4 in the conjugate-equation form. TRANSFORMED_POWER reports the
    undivided form first, WANG_POWER the divided one.
    """
    if statement not in POWER_STATEMENTS:
        raise ArgumentError(f"{statement} is not a power-Harnack statement")
    constants.require(statement, "K", "kappa", "delta")
    kappa, delta = constants.kappa, constants.delta
    threshold = power_threshold(kappa, delta)
    if not p > threshold:
        raise ArgumentError(f"power-Harnack needs p > (1 + delta/kappa)^2 = {threshold:.6g}, got p={p}")
    root = math.sqrt(p) - 1.0
    delta_p = max(delta, kappa * root / 2.0)
    full = math.sqrt(p) * root * distance ** 2 * kt_factor(constants.K, t) / (delta_p * (root * kappa - delta_p))
    if statement == Statement.TRANSFORMED_POWER:
        return full, full / 4.0
    return full / 4.0, full


def _same_point(x, y) -> bool:
    return bool(np.array_equal(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


def verify_log_harnack(statement: Statement | str, problem: SdeProblem, constants: InequalityConstants, x, y,
                       t: float, f: TestFunction, count: int, seed: int, s: float = 0.0,
                       dt: float | None = None) -> HarnackReport:
    """E log f(X_t(y)) <= log E f(X_t(x)) + term(|x - y|, t - s)"""
    statement = Statement(statement)
    if statement not in LOG_STATEMENTS:
        raise ArgumentError(f"{statement} is not a log-Harnack statement")
    if not t > s:
        raise ArgumentError(f"need t > s, got s={s}, t={t}")
    distance = pairs_distance(x, y)
    term = log_term(statement, constants, distance, s, t)
    lhs = estimate_functional(problem, "log", f, s, t, y, count, seed, dt=dt)
    plain = estimate_functional(problem, "plain", f, s, t, x, count, seed, dt=dt)
    base = plain.log()
    rhs = McEstimate.make(base.mean + term, base.stderr, base.count, base.confidence, kind="log-rhs",
                          f=f.name, s=s, t=t, x=base.x, seed=seed)
    paired = _same_point(x, y)
    verdict = classify(lhs, rhs, paired)
    logger.debug("%s at |x-y|=%.4g, t=%g: lhs %.5g, rhs %.5g -> %s", statement, distance, t, lhs.mean, rhs.mean,
                 verdict)
    return HarnackReport(statement, as_list(x), as_list(y), s, t, f.name, lhs, rhs, term, constants, verdict,
                         paired=paired)


def verify_power_harnack(statement: Statement | str, problem: SdeProblem, constants: InequalityConstants,
                         p: float, x, y, t: float, f: TestFunction, count: int, seed: int,
                         dt: float | None = None) -> HarnackReport:
    """(E f(X_t(y)))^p <= E f^p(X_t(x)) exp(exponent), reported for both exponent forms."""
    statement = Statement(statement)
    if not f.nonnegative:
        raise ArgumentError(f"power-Harnack needs f >= 0, {f.name} is not flagged")
    distance = pairs_distance(x, y)
    exponent, alternative = power_exponents(statement, constants, p, distance, t)
    lhs = estimate_functional(problem, "plain", f, 0.0, t, y, count, seed, dt=dt).power(p)
    base = estimate_functional(problem, "power", f, 0.0, t, x, count, seed, p=p, dt=dt)
    paired = _same_point(x, y)

    def side(power: float) -> McEstimate:
        scale = math.exp(power)
        return McEstimate.make(base.mean * scale, base.stderr * scale, base.count, base.confidence,
                               kind="power-rhs", f=f.name, t=t, x=base.x, seed=seed)

    rhs = side(exponent)
    verdict = classify(lhs, rhs, paired)
    alternative_verdict = classify(lhs, side(alternative), paired)
    logger.debug("%s p=%g at |x-y|=%.4g, t=%g: lhs %.5g, rhs %.5g -> %s", statement, p, distance, t, lhs.mean,
                 rhs.mean, verdict)
    return HarnackReport(statement, as_list(x), as_list(y), 0.0, t, f.name, lhs, rhs, exponent, constants,
                         verdict, p=p, alternative_term=alternative, alternative_verdict=alternative_verdict,
                         paired=paired)


@serde
class SplitReport:
    direct: HarnackReport
    jensen: McEstimate
    split: float
    assembled: Verdict
    jensen_consistent: bool
    agree: bool


def nested_log_estimate(problem: SdeProblem, f: TestFunction, s: float, u: float, t: float, x, count: int,
                        seed: int, inner: int = DEFAULT_INNER, dt: float | None = None) -> McEstimate:
    """
    T_{s,u} log T_{u,t} f (x): outer paths to u, each restarted with `inner`
    paths to t whose mean stands for T_{u,t} f.
    """
    outer = max(2, count // inner)
    middle, _ = sample_terminal(problem, s, u, x, outer, seed, dt)
    starts = np.repeat(middle, inner, axis=0)
    final, ids = sample_terminal(problem, u, t, starts, starts.shape[0], seed, dt, stream=STREAM_RESTART)
    values = f(final)
    owners = ids // inner
    sums = np.bincount(owners, weights=values, minlength=middle.shape[0])
    counts = np.bincount(owners, minlength=middle.shape[0])
    kept = counts > 0
    means = sums[kept] / counts[kept]
    if np.any(means <= 0):
        raise ArgumentError(f"T_(u,t) f is not positive along some paths for {f.name}")
    return McEstimate.from_samples(np.log(means), kind="nested-log", f=f.name, s=s, t=t, x=as_list(x), seed=seed)


def verify_log_harnack_split(problem: SdeProblem, constants: InequalityConstants, x, y, s: float, t: float,
                             T0: float, f: TestFunction, count: int, seed: int, inner: int = DEFAULT_INNER,
                             dt: float | None = None) -> SplitReport:
    """
    Direct DRIFT_LOG verification on [s, t] against the two-step assembly over
    [s, s + T0] and [s + T0, t]: Jensen bounds the LHS by T_{s,u} log T_{u,t} f (y),
    which is then compared with the same RHS.
    """
    if problem.dimension != 1:
        raise ArgumentError("the splitting diagnostic runs in d = 1")
    if not T0 < t - s <= 2.0 * T0:
        raise ArgumentError(f"need t - s in (T0, 2 T0], got t - s = {t - s}, T0 = {T0}")
    direct = verify_log_harnack(Statement.DRIFT_LOG, problem, constants, x, y, t, f, count, seed, s=s, dt=dt)
    u = s + T0
    jensen = nested_log_estimate(problem, f, s, u, t, y, count, seed, inner, dt)
    assembled = classify(jensen, direct.rhs)
    jensen_consistent = direct.lhs.lower <= jensen.upper
    agree = Verdict.INCONCLUSIVE in (assembled, direct.verdict) or assembled == direct.verdict
    return SplitReport(direct, jensen, u, assembled, bool(jensen_consistent), bool(agree))
