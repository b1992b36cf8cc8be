"""
Fitted constants for the statements whose constant has no closed form: the
drift log-Harnack C and the stable-driver Harnack C. A fit is the smallest
constant under which every swept instance gets a HOLDS verdict.
"""
import logging
import math
from dataclasses import field
from pathlib import Path

import numpy as np
from serde import SerdeError, serde
from serde.json import from_json, to_json

from harnack_lab.errors import ArgumentError, ConfigurationError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import derive_seed
from harnack_lab.semigroup.estimates import estimate_functional
from harnack_lab.semigroup.test_functions import TestFunctionSpec, build_test_function

from .report import InequalityConstants, Statement, pairs_distance
from .stable import stable_base_estimates, stable_factor

logger = logging.getLogger(__name__)

MIN_INSTANCES = 20
STABILITY_TOLERANCE = 0.1
# relative inflation applied to every fitted constant
ROUNDING_HEADROOM = 1e-9


@serde
class SweepInstance:
    x: list[float]
    y: list[float]
    t: float
    f: TestFunctionSpec
    s: float = 0.0


@serde
class EmpiricalConstant:
    statement: Statement
    value: float
    value_doubled: float
    stable: bool
    count: int
    seed: int
    instances: list[SweepInstance] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    note: str = "fitted on the sweep below; not a closed-form constant"

    def constants(self, delta: float | None = None) -> InequalityConstants:
        return InequalityConstants(delta=delta, C=self.value,
                                   source=f"fitted {self.statement} over {len(self.instances)} instances")


def _log_ratios(statement: Statement, problem: SdeProblem, sweep: list[SweepInstance], delta: float,
                count: int, seed: int, dt: float | None) -> list[float]:
    scale = {Statement.DRIFT_LOG: 1.0, Statement.DRIFTLESS_LOG: 2.0}[statement]
    ratios = []
    for k, inst in enumerate(sweep):
        f = build_test_function(inst.f, problem.dimension)
        child = derive_seed(seed, k)
        lhs = estimate_functional(problem, "log", f, inst.s, inst.t, inst.y, count, child, dt=dt)
        base = estimate_functional(problem, "plain", f, inst.s, inst.t, inst.x, count, child, dt=dt).log()
        weight = pairs_distance(inst.x, inst.y) ** 2 / (scale * delta * (inst.t - inst.s))
        ratios.append((lhs.upper - base.lower) / weight)
    return ratios


def _check_sweep(sweep: list[SweepInstance]) -> None:
    if len(sweep) < MIN_INSTANCES:
        raise ArgumentError(f"a fit needs at least {MIN_INSTANCES} instances, got {len(sweep)}")
    for inst in sweep:
        if pairs_distance(inst.x, inst.y) == 0:
            raise ArgumentError(f"fit instances need x != y, got x = y = {inst.x}")
        if not inst.t > inst.s:
            raise ArgumentError(f"fit instances need t > s, got s={inst.s}, t={inst.t}")


def _settle(value: float) -> float:
    return value * (1.0 + ROUNDING_HEADROOM)


def _stability(value: float, doubled: float) -> bool:
    if value == doubled:
        return True
    return abs(doubled - value) < STABILITY_TOLERANCE * max(abs(value), abs(doubled))


def fit_empirical_constant(statement: Statement | str, problem: SdeProblem, sweep: list[SweepInstance],
                           delta: float, count: int, seed: int, dt: float | None = None) -> EmpiricalConstant:
    """
    C_emp = max over instances of (upper LHS - lower log P f(x)) delta (t - s) / |y - x|^2
    (times 2 for the driftless form), clipped at 0, refitted at 2N for the
    stability flag.
    """
    statement = Statement(statement)
    if statement not in (Statement.DRIFT_LOG, Statement.DRIFTLESS_LOG):
        raise ArgumentError(f"{statement} has an explicit constant; nothing to fit")
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    _check_sweep(sweep)
    ratios = _log_ratios(statement, problem, sweep, delta, count, seed, dt)
    doubled = _log_ratios(statement, problem, sweep, delta, 2 * count, seed, dt)
    value = _settle(max(0.0, max(ratios)))
    value_doubled = _settle(max(0.0, max(doubled)))
    stable = _stability(value, value_doubled)
    if not stable:
        logger.warning("fitted %s constant moved from %.4g to %.4g when doubling N", statement, value, value_doubled)
    return EmpiricalConstant(statement, value, value_doubled, stable, count, seed, list(sweep), ratios)


def _stable_ratios(problem: SdeProblem, sweep: list[SweepInstance], count: int, seed: int,
                   dt: float | None) -> list[float]:
    alpha = problem.driver.alpha
    ratios = []
    for k, inst in enumerate(sweep):
        f = build_test_function(inst.f, problem.dimension)
        at_x, at_y = stable_base_estimates(problem, f, inst.t, inst.x, inst.y, count, derive_seed(seed, k), dt)
        factor = stable_factor(alpha, problem.dimension, pairs_distance(inst.x, inst.y), inst.t)
        floor = at_y.lower * factor
        ratios.append(at_x.upper / floor if floor > 0 else math.inf)
    return ratios


def fit_stable_constant(problem: SdeProblem, sweep: list[SweepInstance], count: int, seed: int,
                        dt: float | None = None) -> EmpiricalConstant:
    """Smallest C with P_T f(x) <= C (1 + |x-y| / (T ^ 1)^(1/alpha))^(d+alpha) P_T f(y) on every instance."""
    if not problem.driver.is_stable:
        raise ArgumentError("fit_stable_constant needs a stable driver")
    if len(sweep) < MIN_INSTANCES:
        raise ArgumentError(f"a fit needs at least {MIN_INSTANCES} instances, got {len(sweep)}")
    ratios = _stable_ratios(problem, sweep, count, seed, dt)
    doubled = _stable_ratios(problem, sweep, 2 * count, seed, dt)
    value, value_doubled = _settle(max(ratios)), _settle(max(doubled))
    if not np.isfinite(value):
        raise ArgumentError("P_T f(y) is indistinguishable from 0 on some instance; choose a positive f")
    stable = _stability(value, value_doubled)
    return EmpiricalConstant(Statement.STABLE_HARNACK, value, value_doubled, stable, count, seed, list(sweep),
                             ratios)


def write_constant(constant: EmpiricalConstant, path: Path | str) -> None:
    Path(path).write_text(to_json(constant))


def read_constant(path: Path | str) -> EmpiricalConstant:
    try:
        return from_json(EmpiricalConstant, Path(path).read_text())
    except (OSError, ValueError, SerdeError) as e:
        raise ConfigurationError(f"cannot load fitted constant from {path}: {e}") from e
