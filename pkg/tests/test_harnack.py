import math

import numpy as np
import pytest

from harnack_lab.errors import ArgumentError, ConfigurationError
from harnack_lab.fields import zero_drift
from harnack_lab.fields.presets import FieldSpec, build_field
from harnack_lab.harnack import (
    InequalityConstants,
    Statement,
    SweepInstance,
    Verdict,
    classify,
    fit_empirical_constant,
    kt_factor,
    log_term,
    power_exponents,
    power_threshold,
    read_constant,
    reports_to_frame,
    stable_factor,
    verify_interpolation_identity,
    verify_kernel_bounds,
    verify_log_harnack,
    verify_log_harnack_split,
    verify_power_harnack,
    verify_stable_harnack,
    write_constant,
)
from harnack_lab.sde_sim import Driver, SdeProblem, derive_seed
from harnack_lab.semigroup import McEstimate, TestFunctionSpec, bump, constant, sine, truncated_exponential

HEAT_CONSTANTS = InequalityConstants(K=0.0, kappa=1.0, delta=0.0)


def heat(horizon: float = 1.0) -> SdeProblem:
    return SdeProblem(1, zero_drift(1), horizon=horizon)


def stable(alpha: float, horizon: float = 1.0) -> SdeProblem:
    return SdeProblem(1, zero_drift(1), driver=Driver.stable(alpha), horizon=horizon)


def test_classify():
    low = McEstimate.make(1.0, 0.1, 100)
    high = McEstimate.make(2.0, 0.1, 100)
    assert classify(low, high) == Verdict.HOLDS
    assert classify(high, low) == Verdict.VIOLATED
    assert classify(low, McEstimate.make(1.2, 0.1, 100)) == Verdict.INCONCLUSIVE
    assert classify(low, McEstimate.make(1.0, 0.0, 100), paired=True) == Verdict.HOLDS
    assert classify(high, low, paired=True) == Verdict.VIOLATED


def test_kt_factor_and_log_terms():
    assert kt_factor(0.0, 2.0) == 0.5
    assert kt_factor(1.0, 1.0) == pytest.approx(1.0 / (1.0 - math.exp(-1.0)))
    explicit = InequalityConstants(K=0.0, kappa=1.0, delta=1.0, C=2.0)
    assert log_term(Statement.DRIFT_LOG, explicit, 1.0, 0.0, 1.0) == pytest.approx(2.0)
    assert log_term(Statement.DRIFTLESS_LOG, explicit, 1.0, 0.0, 1.0) == pytest.approx(1.0)
    assert log_term(Statement.TRANSFORMED_LOG, explicit, 1.0, 0.0, 1.0) == pytest.approx(2.0)
    assert log_term(Statement.WANG_LOG, explicit, 1.0, 0.0, 1.0) == pytest.approx(0.5)
    # elapsed time, not t, enters the term
    assert log_term(Statement.DRIFT_LOG, explicit, 1.0, 0.5, 1.0) == pytest.approx(4.0)
    with pytest.raises(ConfigurationError):
        log_term(Statement.DRIFT_LOG, InequalityConstants(delta=1.0), 1.0, 0.0, 1.0)
    with pytest.raises(ArgumentError):
        log_term(Statement.WANG_POWER, explicit, 1.0, 0.0, 1.0)


def test_power_exponents():
    constants = InequalityConstants(K=1.0, kappa=1.0, delta=0.0)
    kt = 1.0 / (1.0 - math.exp(-1.0))
    wang, wang_alt = power_exponents(Statement.WANG_POWER, constants, 4.0, 1.0, 1.0)
    assert wang == pytest.approx(2.0 * kt)
    assert wang_alt == pytest.approx(8.0 * kt)
    transformed, transformed_alt = power_exponents(Statement.TRANSFORMED_POWER, constants, 4.0, 1.0, 1.0)
    assert transformed == pytest.approx(wang_alt)
    assert transformed_alt == pytest.approx(wang)


def test_power_threshold_is_enforced():
    constants = InequalityConstants(K=0.0, kappa=1.0, delta=1.0)
    assert power_threshold(1.0, 1.0) == 4.0
    with pytest.raises(ArgumentError):
        power_exponents(Statement.WANG_POWER, constants, 4.0, 1.0, 1.0)
    with pytest.raises(ArgumentError):
        power_exponents(Statement.WANG_LOG, constants, 9.0, 1.0, 1.0)
    assert power_exponents(Statement.WANG_POWER, constants, 9.0, 0.0, 1.0) == (0.0, 0.0)


def test_heat_log_harnack_holds():
    # E log(1 + e^{1+W}) is about 1.40, log(1 + e^{1/2}) + 1/2 about 1.474
    f = truncated_exponential(1, 1.0)
    report = verify_log_harnack(Statement.WANG_LOG, heat(), HEAT_CONSTANTS, [0.0], [1.0], 1.0, f, 100000,
                                seed=11, dt=1.0)
    assert report.term == pytest.approx(0.5)
    assert report.rhs.mean == pytest.approx(math.log(1.0 + math.exp(0.5)) + 0.5, abs=0.02)
    assert report.verdict == Verdict.HOLDS
    assert not report.paired
    assert report.margin > 0


def test_same_point_is_exact_jensen():
    f = truncated_exponential(1, 1.0)
    report = verify_log_harnack(Statement.WANG_LOG, heat(), HEAT_CONSTANTS, [0.5], [0.5], 1.0, f, 2000,
                                seed=12, dt=0.5)
    assert report.paired
    assert report.term == 0.0
    assert report.verdict == Verdict.HOLDS


def test_constant_function_holds_trivially():
    report = verify_log_harnack(Statement.WANG_LOG, heat(), HEAT_CONSTANTS, [0.0], [1.0], 1.0, constant(1, 1.0),
                                100, seed=13)
    assert report.lhs.mean == 0.0 and report.lhs.stderr == 0.0
    assert report.verdict == Verdict.HOLDS


def test_log_harnack_rejects_bad_input():
    with pytest.raises(ArgumentError):
        verify_log_harnack(Statement.WANG_LOG, heat(), HEAT_CONSTANTS, [0.0], [1.0], 1.0, sine(1), 100, seed=1)
    with pytest.raises(ArgumentError):
        verify_log_harnack(Statement.WANG_LOG, heat(), HEAT_CONSTANTS, [0.0], [1.0], 0.5, constant(1, 2.0), 100,
                           seed=1, s=0.5)
    with pytest.raises(ArgumentError):
        verify_log_harnack(Statement.WANG_POWER, heat(), HEAT_CONSTANTS, [0.0], [1.0], 1.0, constant(1, 2.0), 100,
                           seed=1)


def test_heat_power_harnack():
    f = truncated_exponential(1, 1.0)
    report = verify_power_harnack(Statement.WANG_POWER, heat(), HEAT_CONSTANTS, 2.0, [0.0], [1.0], 1.0, f, 20000,
                                  seed=14, dt=0.5)
    assert report.p == 2.0
    assert report.alternative_term == pytest.approx(4.0 * report.term)
    # (1 + e^{3/2})^2 is about 30 against E(1 + e^W)^2 exp(3.4), about 350
    assert report.verdict == Verdict.HOLDS
    assert report.alternative_verdict == Verdict.HOLDS
    frame = reports_to_frame([report])
    assert frame.loc[0, "verdict"] == "HOLDS"
    assert frame.loc[0, "distance"] == 1.0
    assert {"x1", "y1", "lhs_lower", "rhs_upper", "alternative_term"} <= set(frame.columns)


def test_split_diagnostic_checks_the_interval():
    constants = InequalityConstants(delta=1.0, C=2.0)
    f = truncated_exponential(1, 1.0)
    with pytest.raises(ArgumentError):
        verify_log_harnack_split(heat(), constants, [0.0], [1.0], 0.0, 1.0, 0.25, f, 100, seed=1)
    report = verify_log_harnack_split(heat(), constants, [0.0], [0.5], 0.0, 1.0, 0.5, f, 4096, seed=2, dt=0.25)
    assert report.split == 0.5
    assert report.jensen.kind == "nested-log"
    assert report.agree


def test_stable_factor():
    assert stable_factor(1.0, 1, 1.0, 0.5) == pytest.approx(9.0)
    # T above 1 is capped
    assert stable_factor(1.5, 1, 1.0, 4.0) == pytest.approx(2.0 ** 2.5)


def test_cauchy_kernel_bounds():
    problem = stable(1.0)
    starts = [[0.0], [1.0]]
    targets = [[-1.0], [0.0], [0.5], [1.0], [2.0]]
    report = verify_kernel_bounds(problem, 1.0, starts, targets, 50000, seed=15, dt=1.0)
    # at r = 1 the Cauchy density is 1 / (2 pi) while min(1, r^-2) = 1
    assert report.c >= math.pi - 0.05
    assert report.c < 10.0
    assert report.den2_holds
    assert report.probes_used == 10
    with pytest.raises(ArgumentError):
        verify_kernel_bounds(problem, 1.5, starts, targets, 100, seed=15)
    with pytest.raises(ArgumentError):
        verify_kernel_bounds(heat(), 1.0, starts, targets, 100, seed=15)


def test_stable_harnack_through_composition():
    problem = stable(1.5, horizon=2.0)
    f = bump(1, 1.0, 1.0, [0.0])
    # 1 <= P_T f <= 2 and the factor is 2^2.5
    holds = verify_stable_harnack(problem, f, 2.0, [0.0], [1.0], 2000, seed=16, C=10.0, dt=0.5)
    assert holds.verdict == Verdict.HOLDS
    assert holds.term == pytest.approx(2.0 ** 2.5)
    violated = verify_stable_harnack(problem, f, 2.0, [0.0], [1.0], 2000, seed=16, C=0.01, dt=0.5)
    assert violated.verdict == Verdict.VIOLATED
    with pytest.raises(ArgumentError):
        verify_stable_harnack(problem, sine(1), 2.0, [0.0], [1.0], 10, seed=16, C=1.0)


def sweep() -> list[SweepInstance]:
    f = TestFunctionSpec("truncated-exp", params={"rate": 1.0})
    return [SweepInstance([0.0], [d], t, f) for d in (0.25, 0.5, 0.75, 1.0, 1.25) for t in (0.25, 0.5, 0.75, 1.0)]


def test_fitted_constant_makes_every_instance_hold():
    problem = heat()
    instances = sweep()
    fitted = fit_empirical_constant(Statement.DRIFT_LOG, problem, instances, 1.0, 2000, seed=17, dt=0.25)
    assert fitted.value >= 0.0
    assert len(fitted.ratios) == len(instances) == 20
    constants = fitted.constants(delta=1.0)
    f = truncated_exponential(1, 1.0)
    for k, inst in enumerate(instances):
        report = verify_log_harnack(Statement.DRIFT_LOG, problem, constants, inst.x, inst.y, inst.t, f, 2000,
                                    derive_seed(17, k), dt=0.25)
        assert report.verdict == Verdict.HOLDS


def test_fit_preconditions():
    with pytest.raises(ArgumentError):
        fit_empirical_constant(Statement.DRIFT_LOG, heat(), sweep()[:19], 1.0, 100, seed=1)
    with pytest.raises(ArgumentError):
        fit_empirical_constant(Statement.WANG_LOG, heat(), sweep(), 1.0, 100, seed=1)
    with pytest.raises(ArgumentError):
        fit_empirical_constant(Statement.DRIFT_LOG, heat(), sweep(), 0.0, 100, seed=1)


def test_constant_file_round_trip(tmp_path):
    fitted = fit_empirical_constant(Statement.DRIFTLESS_LOG, heat(), sweep(), 1.0, 200, seed=18, dt=0.25)
    path = tmp_path / "c.json"
    write_constant(fitted, path)
    back = read_constant(path)
    assert back.statement == Statement.DRIFTLESS_LOG
    assert back.value == fitted.value
    assert len(back.instances) == 20
    (tmp_path / "bad.json").write_text("not json")
    with pytest.raises(ConfigurationError):
        read_constant(tmp_path / "bad.json")
    with pytest.raises(ConfigurationError):
        read_constant(tmp_path / "missing.json")


def test_interpolation_identity_edge_cases():
    f = truncated_exponential(1, 1.0)
    report = verify_interpolation_identity(heat(), f, 0.0, 0.0, 1.0, [0.0], 100, seed=19)
    assert report.verdict == Verdict.HOLDS
    assert report.residual == 0.0
    ou = SdeProblem(1, build_field(FieldSpec("ou-drift", params={"k": 1.0}), 1))
    with pytest.raises(ArgumentError):
        verify_interpolation_identity(ou, f, 0.0, 0.5, 1.0, [0.0], 100, seed=19)
    with pytest.raises(ArgumentError):
        verify_interpolation_identity(heat(), sine(1), 0.0, 0.5, 1.0, [0.0], 100, seed=19)
    with pytest.raises(ArgumentError):
        verify_interpolation_identity(stable(1.0), f, 0.0, 0.5, 1.0, [0.0], 100, seed=19)


def test_interpolation_identity_for_heat():
    f = truncated_exponential(1, 1.0)
    report = verify_interpolation_identity(heat(), f, 0.0, 0.5, 1.0, [0.0], 8192, seed=20, nodes=3, dt=0.25)
    assert report.nodes == [0.0, 0.25, 0.5]
    assert report.verdict == Verdict.HOLDS
    assert abs(report.residual) <= 3.0 * report.stderr
    assert np.all(np.asarray(report.node_values) >= 0.0)
