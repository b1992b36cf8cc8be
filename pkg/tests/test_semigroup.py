import math

import numpy as np
import pytest

from harnack_lab.errors import ArgumentError, IntegrandError
from harnack_lab.fields import identity_diffusion, zero_drift
from harnack_lab.fields.presets import FieldSpec, build_field
from harnack_lab.sde_sim import SdeProblem
from harnack_lab.semigroup import (
    McEstimate,
    TestFunctionSpec,
    build_test_function,
    composition_check,
    constant,
    default_split,
    estimate_functional,
    estimate_gradient_ratio,
    gradient_ratio_family,
    integrand,
    mollification_convergence,
    monomial,
    resolve_dt,
    sine,
    truncated_exponential,
    z_value,
)


def heat(horizon: float = 1.0) -> SdeProblem:
    return SdeProblem(1, zero_drift(1), horizon=horizon)


def test_estimate_from_samples():
    e = McEstimate.from_samples(np.array([1.0, 2.0, 3.0]))
    assert e.mean == 2.0
    assert e.stderr == pytest.approx(1.0 / math.sqrt(3.0))
    assert e.half_width == pytest.approx(2.576 * e.stderr)
    assert e.ci == (e.lower, e.upper)
    assert e.log().mean == pytest.approx(math.log(2.0))
    assert e.log().stderr == pytest.approx(e.stderr / 2.0)
    squared = e.power(2.0)
    assert squared.mean == pytest.approx(4.0)
    assert squared.stderr == pytest.approx(4.0 * e.stderr)
    with pytest.raises(IntegrandError):
        McEstimate.exact(-1.0).log()
    with pytest.raises(ArgumentError):
        McEstimate.from_samples(np.array([]))
    assert z_value(0.95) == pytest.approx(1.96, abs=1e-3)


def test_step_resolution():
    assert resolve_dt(0.0, 1.0, 0.3, 1.0) == pytest.approx(0.25)
    assert resolve_dt(0.0, 1.0, None, 1.0) == pytest.approx(1.0 / 2048)
    assert resolve_dt(0.5, 1.0, 0.5, 1.0) == pytest.approx(0.5)
    with pytest.raises(ArgumentError):
        resolve_dt(0.0, 1.0, 0.0, 1.0)


def test_heat_second_moment():
    count = 20000
    e = estimate_functional(heat(), "plain", monomial(1, 0, 2), 0.0, 1.0, [0.0], count, seed=1, dt=1.0)
    # E W_1^2 = 1 with Var W_1^2 = 2
    assert e.stderr == pytest.approx(math.sqrt(2.0 / count), rel=0.1)
    assert abs(e.mean - 1.0) < 4.0 * e.stderr
    assert e.kind == "plain" and e.x == [0.0] and e.seed == 1


def test_integrand_preconditions():
    with pytest.raises(ArgumentError):
        integrand(sine(1), "log")
    with pytest.raises(ArgumentError):
        integrand(truncated_exponential(1, 1.0), "power", p=1.0)
    with pytest.raises(ArgumentError):
        integrand(sine(1), "power", p=2.0)
    with pytest.raises(ArgumentError):
        integrand(sine(1), "median")
    shifted = sine(1, offset=2.0)
    log_f = integrand(shifted, "log")
    assert log_f(np.array([[0.0]]))[0] == pytest.approx(math.log(2.0))


def test_constant_function_is_exact():
    e = estimate_functional(heat(), "log", constant(1, 3.0), 0.0, 1.0, [0.4], 100, seed=2)
    assert e.mean == pytest.approx(math.log(3.0))
    assert e.stderr == 0.0
    assert e.count == 100


def test_test_function_presets():
    f = build_test_function(TestFunctionSpec("sine", params={"offset": 2.0}), 1)
    assert f.at_least_one and f.nonnegative
    g = build_test_function(TestFunctionSpec("truncated-exp", params={"rate": 1.0}), 2)
    assert g(np.zeros((1, 2)))[0] == pytest.approx(2.0)
    assert g.at_least_one


def test_heat_gradient_ratio_for_sine():
    # |d/dx P_1 sin|^2 / P_1 cos^2 at 0 = e^-1 / ((1 + e^-2) / 2)
    expected = math.exp(-1.0) / ((1.0 + math.exp(-2.0)) / 2.0)
    ratio = estimate_gradient_ratio(heat(), sine(1), 1.0, [0.0], 20000, seed=3, dt=0.5)
    assert ratio.ratio == pytest.approx(expected, abs=0.05)
    assert ratio.step >= 1e-3
    assert ratio.rhs.mean > 0


def test_gradient_ratio_family_is_bounded():
    sigma = build_field(FieldSpec("holder-sign", params={"base": 1.0, "jump": 0.5}), 1)
    family = gradient_ratio_family(sigma, zero_drift(1), sine(1), 1.0, [0.0], 4000, seed=4, ns=(1, 2), dt=0.05)
    assert family.ns == [1, 2]
    assert [r.label for r in family.ratios] == ["n=1", "n=2"]
    assert family.bounded
    assert family.max_ratio == max(r.ratio for r in family.ratios)


def test_composition_over_two_units():
    assert default_split(2.0) == 1.0
    assert default_split(0.5) == 0.25
    report = composition_check(heat(horizon=2.0), monomial(1, 0, 2), 2.0, [0.0], 20000, seed=5, dt=0.5)
    assert report.split == 1.0
    assert report.consistent
    assert report.direct.mean == pytest.approx(2.0, abs=0.1)
    with pytest.raises(ArgumentError):
        composition_check(heat(horizon=2.0), monomial(1, 0, 2), 2.0, [0.0], 100, seed=5, split=3.0)


def test_mollification_reference_distance_is_zero():
    sigma = build_field(FieldSpec("holder-sign", params={"base": 1.0, "jump": 0.5}), 1)
    report = mollification_convergence(sigma, [0.0], 1.0, [1, 2, 4], 2000, seed=6, dt=0.05)
    assert report.reference == 4
    assert len(report.distances) == 3
    assert report.distances[-1] == 0.0
    assert all(d >= 0.0 for d in report.distances)
    with pytest.raises(ArgumentError):
        mollification_convergence(identity_diffusion(1), [0.0], 1.0, [4, 2], 10, seed=6)


def test_mollified_sign_diffusion_distances_decrease():
    sigma = build_field(FieldSpec("holder-sign"), 1)
    report = mollification_convergence(sigma, [0.0], 0.5, [2, 4, 8, 16], 4000, seed=7, dt=0.02)
    assert report.ns == [2, 4, 8, 16]
    assert report.nonincreasing
    assert report.distances[0] > report.distances[2] > 0.0
    assert report.distances[-1] == 0.0
