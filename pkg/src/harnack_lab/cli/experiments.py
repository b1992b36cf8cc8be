"""
One handler per experiment kind. A handler turns a validated scenario into an
ExperimentResult: the JSON-serializable report, CSV tables and whether any
verdict came out VIOLATED.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd
from serde import serde

from harnack_lab.errors import ConfigurationError, SingularityError
from harnack_lab.fields.conditions import (
    EllipticityWitness,
    ProbeSet,
    check_hoelder_seminorm,
    check_inverse_diffusion_bound,
    check_nondegeneracy,
)
from harnack_lab.harnack import (
    HarnackReport,
    InequalityConstants,
    SplitReport,
    Statement,
    SweepInstance,
    Verdict,
    power_threshold,
    read_constant,
    reports_to_frame,
    verify_interpolation_identity,
    verify_kernel_bounds,
    verify_log_harnack,
    verify_log_harnack_split,
    verify_power_harnack,
    verify_stable_harnack,
)
from harnack_lab.harnack.report import LOG_STATEMENTS, POWER_STATEMENTS
from harnack_lab.pde.grid import SpaceTimeGrid
from harnack_lab.pde.solvers import PdeSolutionReport
from harnack_lab.sde_sim.coupling import simulate_coupled_pair
from harnack_lab.sde_sim.euler import weak_order_check
from harnack_lab.sde_sim.rng import derive_seed
from harnack_lab.semigroup.estimates import resolve_dt
from harnack_lab.semigroup.gradient import (
    GradientRatio,
    GradientRatioFamily,
    estimate_gradient_ratio,
    gradient_ratio_family,
    mollification_convergence,
)
from harnack_lab.transforms import (
    DEFAULT_SCHEDULE,
    AssumptionCertificate,
    BiLipschitzCertificate,
    HarnackConstants,
    JacobianBounds,
    SigmaEllipticityReport,
    build_ito_tanaka,
    build_zvonkin,
    check_sigma_ellipticity,
    default_pair_probes,
    pushforward_consistency,
    verify_A1_A2_A3,
)

from .config import ExperimentKind, Scenario

logger = logging.getLogger(__name__)

ANGULAR_POINTS = 16


@dataclass
class ExperimentResult:
    report: Any
    frames: dict[str, pd.DataFrame] = field(default_factory=dict)
    violated: bool = False
    summary: str = ""


@serde
class ConditionCheckReport:
    sigma: str
    witness: EllipticityWitness
    inverse_diffusion_sup: float | None
    drift_hoelder_seminorm: float | None
    singular_at: str | None = None


@serde
class TransformBuildReport:
    transform: str
    pde: PdeSolutionReport
    grad_bound: float
    certificate: BiLipschitzCertificate
    jacobian: JacobianBounds
    T0: float | None = None
    halvings: int | None = None
    lam: float | None = None
    schedule_trace: list[list[float]] = field(default_factory=list)
    constants: HarnackConstants | None = None
    assumptions: AssumptionCertificate | None = None
    sigma_ellipticity: SigmaEllipticityReport | None = None


@serde
class GradientRunReport:
    ratios: list[GradientRatio]
    family: GradientRatioFamily | None = None


@serde
class HarnackRunReport:
    statement: Statement
    constants: InequalityConstants
    reports: list[HarnackReport]
    counts: dict[str, int]
    splits: list[SplitReport] = field(default_factory=list)


def _grid(scenario: Scenario) -> SpaceTimeGrid:
    if scenario.knobs.grid is not None:
        return scenario.knobs.grid
    d = scenario.problem.dimension
    return SpaceTimeGrid(half_width=4.0, nodes=81 if d == 1 else 41, dimension=d,
                         t_end=scenario.problem.horizon)


def _probes(scenario: Scenario, grid: SpaceTimeGrid, t: float) -> ProbeSet:
    if scenario.knobs.probe_file is not None:
        return ProbeSet.read_csv(scenario.knobs.probe_file)
    return default_pair_probes(grid, t, scenario.knobs.probes, seed=scenario.knobs.seed)


def _schedule(scenario: Scenario):
    return scenario.knobs.schedule or DEFAULT_SCHEDULE


def _seed_pairs(scenario: Scenario) -> list[tuple[list[float], list[float]]]:
    knobs = scenario.knobs
    if len(knobs.xs) != len(knobs.ys):
        raise ConfigurationError(f"scenario {scenario.name!r}: xs and ys must pair up")
    return list(zip(knobs.xs, knobs.ys))


def _powers(scenario: Scenario, constants: InequalityConstants) -> list[float]:
    """Configured exponents, or the first integer above the threshold and its double."""
    if scenario.knobs.p:
        return scenario.knobs.p
    constants.require(Statement(scenario.knobs.statement), "kappa", "delta")
    first = math.ceil(power_threshold(constants.kappa, constants.delta)) + 1.0
    return [first, 2.0 * first]


def condition_check(scenario: Scenario) -> ExperimentResult:
    problem = scenario.problem.build()
    sigma = problem.diffusion_or_identity()
    d = problem.dimension
    grid = _grid(scenario)
    points = np.random.default_rng(scenario.knobs.seed).uniform(-grid.half_width, grid.half_width,
                                                                (ANGULAR_POINTS, d))
    if d == 2:
        directions = ProbeSet.angular(points)
    else:
        directions = ProbeSet.unit_directions(points, count=64, seed=scenario.knobs.seed)
    witness = check_nondegeneracy(sigma, directions)
    inverse_sup, singular = None, None
    try:
        inverse_sup = check_inverse_diffusion_bound(sigma, directions)
    except SingularityError as e:
        singular = str(e)
    seminorm = None
    theta = problem.drift.regularity.theta
    if problem.drift.regularity.kind == "hoelder" and theta is not None:
        seminorm = check_hoelder_seminorm(problem.drift, theta, _probes(scenario, grid, 0.0))
    report = ConditionCheckReport(sigma.name, witness, inverse_sup, seminorm, singular)
    frame = directions.to_frame()
    summary = (f"delta={witness.delta:.4g} (violated={witness.violated}), "
               f"surrogate={witness.surrogate_delta:.4g} (violated={witness.surrogate_violated})")
    return ExperimentResult(report, {"probes": frame}, False, summary)


def transform_build(scenario: Scenario) -> ExperimentResult:
    problem = scenario.problem.build()
    sigma = problem.diffusion_or_identity()
    grid = _grid(scenario)
    knobs = scenario.knobs
    if knobs.transform == "zvonkin":
        z = build_zvonkin(sigma, problem.drift, grid, T0=knobs.T0)
        probes = _probes(scenario, grid, z.map.base.grid.t_start)
        directions = ProbeSet.unit_directions(probes.x[:64], count=16, t=float(probes.t[0]))
        witness = check_nondegeneracy(sigma, directions)
        ellipticity = check_sigma_ellipticity(z, witness.delta, witness.kappa_upper, directions)
        report = TransformBuildReport("zvonkin", z.report, z.map.grad_bound, z.certificate,
                                      z.map.jacobian_bounds(float(probes.t[0]), probes.x), T0=z.T0,
                                      halvings=z.halvings, sigma_ellipticity=ellipticity)
        base = z.map.base
    else:
        it = build_ito_tanaka(sigma, problem.drift, grid, _schedule(scenario))
        probes = _probes(scenario, grid, 0.0)
        certificate = it.map.certify(probes)
        assumptions = verify_A1_A2_A3(it.sigma_hat, it.b_hat, probes, it.constants, it.constants.sigma_sup)
        report = TransformBuildReport("ito-tanaka", it.report, it.map.grad_bound, certificate,
                                      it.map.jacobian_bounds(0.0, probes.x), lam=it.lam,
                                      schedule_trace=[[lam, g] for lam, g in it.schedule_trace],
                                      constants=it.constants, assumptions=assumptions)
        base = it.map.base
    summary = f"{report.transform}: sup|grad| = {report.grad_bound:.4g}, certificate holds = {report.certificate.holds}"
    return ExperimentResult(report, {"map": base.to_frame(), "probes": probes.to_frame()},
                            not report.certificate.holds, summary)


def resolve_constants(scenario: Scenario, statement: Statement, problem) -> tuple[InequalityConstants, Any]:
    """Resolve the constants of a statement; returns them with the problem to verify on."""
    knobs = scenario.knobs
    given = InequalityConstants(knobs.K, knobs.kappa, knobs.delta, knobs.C, "scenario file")
    if knobs.constant_file is not None and given.C is None:
        fitted = read_constant(knobs.constant_file)
        given = InequalityConstants(knobs.K, knobs.kappa, knobs.delta, fitted.value,
                                    f"fitted constant from {knobs.constant_file}")
    match statement:
        case Statement.DRIFT_LOG | Statement.DRIFTLESS_LOG:
            if given.delta is None:
                sigma = problem.diffusion_or_identity()
                points = np.zeros((1, problem.dimension))
                witness = check_nondegeneracy(sigma, ProbeSet.unit_directions(points, count=256, seed=knobs.seed))
                given = InequalityConstants(given.K, given.kappa, witness.delta, given.C, given.source)
            return given, problem
        case Statement.TRANSFORMED_LOG | Statement.TRANSFORMED_POWER:
            if given.K is not None and given.kappa is not None:
                return given, problem
            it = build_ito_tanaka(problem.diffusion_or_identity(), problem.drift, _grid(scenario),
                                  _schedule(scenario))
            return InequalityConstants.from_harnack_constants(it.constants), problem
        case Statement.WANG_LOG | Statement.WANG_POWER:
            target = problem
            if knobs.transform == "ito-tanaka" and not problem.drift.constant:
                it = build_ito_tanaka(problem.diffusion_or_identity(), problem.drift, _grid(scenario),
                                      _schedule(scenario))
                target = it.transformed_problem(problem.horizon)
            if given.K is not None and given.kappa is not None:
                return given, target
            grid = _grid(scenario)
            certificate = verify_A1_A2_A3(target.diffusion_or_identity(), target.drift, _probes(scenario, grid, 0.0))
            return InequalityConstants.from_certificate(certificate), target
        case _:
            return given, problem


def harnack_verify(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    statement = Statement(knobs.statement)
    problem = scenario.problem.build()
    f = scenario.test_function()
    constants, target = resolve_constants(scenario, statement, problem)
    reports = []
    splits = []
    k = 0
    for x, y in _seed_pairs(scenario):
        for t in knobs.times:
            seed = derive_seed(knobs.seed, k)
            k += 1
            if statement in LOG_STATEMENTS:
                reports.append(verify_log_harnack(statement, target, constants, x, y, t, f, knobs.count, seed,
                                                  s=knobs.s, dt=knobs.dt))
                if knobs.split and statement == Statement.DRIFT_LOG and knobs.T0 is not None \
                        and knobs.T0 < t - knobs.s <= 2 * knobs.T0:
                    splits.append(verify_log_harnack_split(target, constants, x, y, knobs.s, t, knobs.T0, f,
                                                           knobs.count, seed, knobs.inner, knobs.dt))
            elif statement in POWER_STATEMENTS:
                for p in _powers(scenario, constants):
                    reports.append(verify_power_harnack(statement, target, constants, p, x, y, t, f, knobs.count,
                                                        seed, dt=knobs.dt))
            else:
                constants.require(statement, "C")
                reports.append(verify_stable_harnack(target, f, t, x, y, knobs.count, seed, constants.C,
                                                     dt=knobs.dt))
    counts = {str(v): sum(r.verdict == v for r in reports) for v in Verdict}
    run = HarnackRunReport(statement, constants, reports, counts, splits)
    violated = counts[str(Verdict.VIOLATED)] > 0 or not all(s.agree for s in splits)
    summary = ", ".join(f"{v}={n}" for v, n in counts.items())
    if splits:
        summary += f", splits agreeing {sum(s.agree for s in splits)}/{len(splits)}"
    return ExperimentResult(run, {"instances": reports_to_frame(reports)}, violated, summary)


def sweep_instances(scenario: Scenario) -> list[SweepInstance]:
    """Instances of a fitting sweep in the order harnack_verify seeds them."""
    if scenario.knobs.f is None:
        raise ConfigurationError(f"scenario {scenario.name!r} needs a test function (knobs.f)")
    return [SweepInstance(list(x), list(y), t, scenario.knobs.f, scenario.knobs.s)
            for x, y in _seed_pairs(scenario) for t in scenario.knobs.times]


def kernel_bounds(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    t = knobs.times[0] if knobs.times else 1.0
    report = verify_kernel_bounds(problem, t, knobs.xs, knobs.ys, knobs.count, knobs.seed, knobs.dt)
    summary = f"c = {report.c:.4g}, den2 holds = {report.den2_holds}"
    return ExperimentResult(report, {}, not report.den2_holds, summary)


def coupling(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    T = knobs.times[0] if knobs.times else problem.horizon
    dt = resolve_dt(0.0, T, knobs.dt, problem.horizon)
    stats = simulate_coupled_pair(problem, knobs.xs[0], knobs.ys[0], knobs.K or 0.0, T, knobs.count, dt, knobs.seed)
    frame = pd.DataFrame({"tau": stats.tau, "log_density": stats.log_density})
    summary = f"coupled fraction {stats.success_fraction:.4f}, E exp(L) = {stats.exp_log_density_mean:.4f}"
    return ExperimentResult(stats, {"pairs": frame}, False, summary)


def gradient_estimate(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    f = scenario.test_function()
    ratios = []
    k = 0
    for t in knobs.times:
        for x in knobs.xs:
            ratios.append(estimate_gradient_ratio(problem, f, t, x, knobs.count, derive_seed(knobs.seed, k), knobs.dt,
                                                  label=f"t={t:g}"))
            k += 1
    family = None
    if knobs.ns:
        family = gradient_ratio_family(problem.diffusion_or_identity(), problem.drift, f, knobs.times[-1],
                                       knobs.xs[0], knobs.count, knobs.seed, knobs.ns, knobs.dt, problem.horizon)
    frame = pd.DataFrame([{"t": r.t, "x": r.x[0], "ratio": r.ratio, "stderr": r.ratio_stderr, "step": r.step}
                          for r in ratios])
    worst = max(r.ratio for r in ratios)
    return ExperimentResult(GradientRunReport(ratios, family), {"ratios": frame}, False,
                            f"max ratio {worst:.4f}")


def interpolation_identity(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    f = scenario.test_function()
    t = knobs.times[0] if knobs.times else problem.horizon
    u = knobs.u if knobs.u is not None else (knobs.s + t) / 2.0
    report = verify_interpolation_identity(problem, f, knobs.s, u, t, knobs.xs[0], knobs.count, knobs.seed,
                                           knobs.nodes, knobs.inner, knobs.dt)
    frame = pd.DataFrame({"r": report.nodes, "value": report.node_values, "stderr": report.node_stderr})
    return ExperimentResult(report, {"nodes": frame}, report.verdict == Verdict.VIOLATED,
                            f"residual {report.residual:.3g} (stderr {report.stderr:.3g}) {report.verdict}")


def mollification(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    t = knobs.times[0] if knobs.times else problem.horizon
    report = mollification_convergence(problem.diffusion_or_identity(), knobs.xs[0], t, knobs.ns or (1, 2, 4, 8),
                                       knobs.count, knobs.seed, problem.drift, knobs.dt)
    frame = pd.DataFrame({"n": report.ns, "distance": report.distances, "stderr": report.stderr})
    return ExperimentResult(report, {"distances": frame}, not report.nonincreasing,
                            f"nonincreasing = {report.nonincreasing}")


def pushforward(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    it = build_ito_tanaka(problem.diffusion_or_identity(), problem.drift, _grid(scenario), _schedule(scenario))
    t = knobs.times[0] if knobs.times else problem.horizon / 2.0
    dt = resolve_dt(0.0, t, knobs.dt, problem.horizon)
    report = pushforward_consistency(problem, it.map, it.transformed_problem(problem.horizon), knobs.xs[0], t,
                                     knobs.count, dt, knobs.seed)
    return ExperimentResult(report, {}, not report.consistent,
                            f"KS {report.distance:.4g} vs critical {report.critical_value:.4g}")


def weak_order(scenario: Scenario) -> ExperimentResult:
    knobs = scenario.knobs
    problem = scenario.problem.build()
    f = scenario.test_function()
    T = knobs.times[0] if knobs.times else problem.horizon
    dt = knobs.dt if knobs.dt is not None else T / 8.0
    report = weak_order_check(problem, f, knobs.xs[0], T, dt, knobs.count, knobs.seed, knobs.refinements)
    frame = pd.DataFrame({"dt": report.dts, "estimate": report.estimates})
    return ExperimentResult(report, {"levels": frame}, not report.shrinking, f"shrinking = {report.shrinking}")


HANDLERS: dict[ExperimentKind, Callable[[Scenario], ExperimentResult]] = {
    ExperimentKind.CONDITION_CHECK: condition_check,
    ExperimentKind.TRANSFORM_BUILD: transform_build,
    ExperimentKind.HARNACK_VERIFY: harnack_verify,
    ExperimentKind.KERNEL_BOUNDS: kernel_bounds,
    ExperimentKind.COUPLING: coupling,
    ExperimentKind.GRADIENT_ESTIMATE: gradient_estimate,
    ExperimentKind.INTERPOLATION_IDENTITY: interpolation_identity,
    ExperimentKind.MOLLIFICATION: mollification,
    ExperimentKind.PUSHFORWARD: pushforward,
    ExperimentKind.WEAK_ORDER: weak_order,
}


def run_experiment(scenario: Scenario) -> ExperimentResult:
    logger.info("running %s (%s)", scenario.name, scenario.kind)
    return HANDLERS[scenario.kind](scenario)


def output_directory(scenario: Scenario, out_dir: Path | str | None) -> Path:
    return Path(out_dir) if out_dir is not None else Path(scenario.output.directory)
