import math

import numpy as np
import pytest

from harnack_lab.errors import ArgumentError, SimulationError
from harnack_lab.fields import identity_diffusion, zero_drift
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind, constant_field
from harnack_lab.fields.presets import FieldSpec, build_field
from harnack_lab.sde_sim import (
    BLOCK_SIZE,
    Driver,
    SdeProblem,
    block_generator,
    derive_seed,
    exponential_integral,
    sample_stable_increment,
    simulate_coupled_pair,
    simulate_paths,
    stable_density_1d_cauchy,
    terminal_states,
    weak_order_check,
)
from harnack_lab.semigroup.test_functions import monomial


def brownian(d: int = 1, horizon: float = 1.0) -> SdeProblem:
    return SdeProblem(d, zero_drift(d), horizon=horizon)


def ou(k: float = 1.0) -> SdeProblem:
    return SdeProblem(1, build_field(FieldSpec("ou-drift", params={"k": k}), 1), horizon=1.0)


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(5, 0) == derive_seed(5, 0)
    assert len({derive_seed(5, k) for k in range(100)}) == 100
    assert derive_seed(5, 1) != derive_seed(6, 1)
    a = block_generator(3, 0, stream=0).standard_normal(4)
    b = block_generator(3, 0, stream=1).standard_normal(4)
    assert not np.array_equal(a, b)
    with pytest.raises(ArgumentError):
        block_generator(-1, 0)


def test_paths_depend_only_on_seed_and_index():
    problem = ou()
    small = simulate_paths(problem, [0.5], 10, 0.1, [0.5, 1.0], seed=9)
    large = simulate_paths(problem, [0.5], BLOCK_SIZE + 10, 0.1, [0.5, 1.0], seed=9)
    np.testing.assert_array_equal(small.states, large.states[:10])
    assert large.count == BLOCK_SIZE + 10
    assert large.at(1.0).shape == (BLOCK_SIZE + 10, 1)
    frame = small.to_frame()
    assert list(frame.columns) == ["path", "time", "x1"]
    assert len(frame) == 20


def test_ou_euler_mean():
    # Euler on dX = -X dt + dW has E X_T = (1 - dt)^(T/dt) X_0
    dt, count = 0.1, 20000
    X = terminal_states(ou(), [1.0], count, dt, 1.0, seed=2)
    expected = (1.0 - dt) ** 10
    stderr = X[:, 0].std(ddof=1) / math.sqrt(count)
    assert abs(X[:, 0].mean() - expected) < 4.0 * stderr


def test_save_times_must_fit_the_step():
    with pytest.raises(ArgumentError):
        simulate_paths(brownian(), [0.0], 10, 0.3, [1.0], seed=1)
    with pytest.raises(ArgumentError):
        simulate_paths(brownian(), [0.0], 10, 0.1, [2.0], seed=1)
    with pytest.raises(ArgumentError):
        simulate_paths(brownian(), [0.0], 0, 0.1, [1.0], seed=1)


def test_exploding_paths_raise():
    def evaluate(t, X):
        return X ** 3

    cubic = CoefficientField(1, FieldKind.VECTOR, evaluate, name="cubic")
    problem = SdeProblem(1, cubic, horizon=1.0)
    with pytest.raises(SimulationError) as caught:
        simulate_paths(problem, [3.0], 100, 0.25, [1.0], seed=1)
    assert caught.value.failure_fraction > 0.01


def test_stable_driver_validation():
    with pytest.raises(ArgumentError):
        Driver("stable", 0.5)
    with pytest.raises(ArgumentError):
        Driver("levy", 1.5)
    with pytest.raises(ArgumentError):
        SdeProblem(1, zero_drift(1), identity_diffusion(1, 2.0), Driver.stable(1.5))


def test_cauchy_increments_match_density():
    rng = np.random.default_rng(0)
    samples = sample_stable_increment(1.0, 1.0, rng, size=40000)[:, 0]
    # |X| has median tan(pi/4) = 1 for the standard Cauchy law
    assert np.median(np.abs(samples)) == pytest.approx(1.0, abs=0.05)
    assert stable_density_1d_cauchy(0.0) == pytest.approx(1.0 / math.pi)
    # scale t at time t
    scaled = sample_stable_increment(1.0, 0.25, np.random.default_rng(0), size=40000)[:, 0]
    assert np.median(np.abs(scaled)) == pytest.approx(0.25, abs=0.02)


def test_gaussian_limit_has_variance_two_dt():
    rng = np.random.default_rng(1)
    samples = sample_stable_increment(2.0, 0.5, rng, dimension=2, size=40000)
    assert samples.shape == (40000, 2)
    assert samples.var(axis=0) == pytest.approx([1.0, 1.0], rel=0.05)


def test_multivariate_stable_is_symmetric():
    rng = np.random.default_rng(2)
    samples = sample_stable_increment(1.5, 1.0, rng, dimension=2, size=40000)
    radii = np.linalg.norm(samples, axis=1)
    angles = np.arctan2(samples[:, 1], samples[:, 0])
    assert np.median(np.abs(angles)) == pytest.approx(math.pi / 2, abs=0.05)
    assert np.median(np.abs(samples[:, 0])) == pytest.approx(np.median(np.abs(samples[:, 1])), rel=0.05)
    assert np.isfinite(radii).all()


def test_weak_order_differences_shrink_for_ou():
    report = weak_order_check(ou(), monomial(1, 0, 1), [1.0], 1.0, 0.25, 4000, seed=3, refinements=2)
    assert report.dts == pytest.approx([0.25, 0.125, 0.0625])
    assert len(report.estimates) == 3
    # shared noise makes the level differences nearly deterministic
    for level, dt in enumerate(report.dts):
        assert report.estimates[level] == pytest.approx((1.0 - dt) ** round(1.0 / dt), abs=0.05)
    assert abs(report.differences[1]) < abs(report.differences[0])


def test_exponential_integral():
    assert exponential_integral(0.0, 2.0) == 2.0
    assert exponential_integral(1.0, 1.0) == pytest.approx((1.0 - math.exp(-2.0)) / 2.0)


def test_brownian_coupling_meets_at_horizon():
    stats = simulate_coupled_pair(brownian(), [0.0], [1.0], 0.0, 1.0, 2000, 0.01, seed=4)
    assert stats.success_fraction == 1.0
    assert stats.tau_max == pytest.approx(1.0)
    assert stats.tau_mean == pytest.approx(1.0)
    assert not stats.k_mismatch
    assert abs(stats.exp_log_density_mean - 1.0) <= 4.0 * stats.exp_log_density_stderr


def test_coupling_flags_k_mismatch():
    still = constant_field(np.zeros(1), FieldKind.VECTOR)
    problem = SdeProblem(1, build_field(FieldSpec("ou-drift", params={"k": -1.0}), 1), horizon=1.0)
    stats = simulate_coupled_pair(problem, [0.0], [1.0], 0.0, 1.0, 200, 0.05, seed=5)
    assert stats.k_mismatch
    assert stats.observed_k == pytest.approx(1.0)
    same = simulate_coupled_pair(SdeProblem(1, still), [0.5], [0.5], 0.0, 1.0, 10, 0.1, seed=5)
    assert same.tau_max == 0.0


def test_coupling_needs_additive_brownian_noise():
    problem = SdeProblem(1, zero_drift(1), driver=Driver.stable(1.5))
    with pytest.raises(ArgumentError):
        simulate_coupled_pair(problem, [0.0], [1.0], 0.0, 1.0, 10, 0.1, seed=1)
