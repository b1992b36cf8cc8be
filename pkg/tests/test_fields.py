import numpy as np
import pytest

from harnack_lab.errors import ArgumentError, ConfigurationError, SingularityError
from harnack_lab.fields import (
    FieldKind,
    ProbeSet,
    carre_du_champ,
    check_hoelder_seminorm,
    check_inverse_diffusion_bound,
    check_nondegeneracy,
    identity_diffusion,
)
from harnack_lab.fields.mollifier import bump_rule, mollify
from harnack_lab.fields.presets import PRESETS, FieldSpec, build_field


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_builds(name):
    preset = PRESETS[name]
    d = preset.dimensions[0]
    values = [1.0] * d if preset.uses_values else []
    field = build_field(FieldSpec(name, values=values), d)
    assert field.kind == preset.kind
    out = field.batch(0.0, np.zeros((3, d)))
    assert out.shape == (3,) + field.value_shape
    assert np.isfinite(out).all()


def test_unknown_preset_and_parameter():
    with pytest.raises(ConfigurationError):
        build_field(FieldSpec("no-such-field"), 1)
    with pytest.raises(ConfigurationError):
        build_field(FieldSpec("ou-drift", params={"speed": 1.0}), 1)
    with pytest.raises(ConfigurationError):
        build_field(FieldSpec("zero"), 1, FieldKind.MATRIX)
    with pytest.raises(ConfigurationError):
        build_field(FieldSpec("footnote-matrix"), 3)


def test_footnote_matrix_singular_but_rowwise_nondegenerate():
    sigma = build_field(FieldSpec("footnote-matrix"), 2)
    points = np.array([[0.0, 0.0], [1.0, -2.0]])
    witness = check_nondegeneracy(sigma, ProbeSet.angular(points, resolution=1e-3))

    assert witness.violated
    assert witness.delta < 1e-5
    assert not witness.surrogate_violated
    assert witness.surrogate_delta == pytest.approx(2.0)
    # the degenerate direction is (1, 1) / sqrt 2
    direction = np.abs(np.asarray(witness.worst_direction))
    assert direction == pytest.approx([np.sqrt(0.5)] * 2, abs=1e-3)

    with pytest.raises(SingularityError):
        check_inverse_diffusion_bound(sigma, ProbeSet.angular(points))


def test_identity_is_uniformly_elliptic():
    sigma = identity_diffusion(3)
    probes = ProbeSet.unit_directions(np.zeros((2, 3)), count=32, seed=4)
    witness = check_nondegeneracy(sigma, probes)
    assert witness.delta == pytest.approx(1.0)
    assert witness.kappa_upper == pytest.approx(1.0)
    assert not witness.violated
    assert check_inverse_diffusion_bound(sigma, probes) == pytest.approx(np.sqrt(3.0))


def test_nondegeneracy_rejects_bad_probes():
    sigma = identity_diffusion(2)
    with pytest.raises(ArgumentError):
        check_nondegeneracy(sigma, ProbeSet.from_triples([(0.0, [0.0, 0.0], [2.0, 0.0])]))
    with pytest.raises(ArgumentError):
        check_nondegeneracy(sigma, ProbeSet.from_triples([]))


def test_hoelder_seminorm_of_power_drift():
    b = build_field(FieldSpec("holder-power", params={"amplitude": 1.0, "exponent": 0.5, "radius": 4.0}), 1)
    probes = ProbeSet.from_triples([(0.0, [0.0], [0.25]), (0.0, [1.0], [1.5])])
    # |sqrt(0.25) - 0| / 0.25^0.5 = 1 dominates
    assert check_hoelder_seminorm(b, 0.5, probes) == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        check_hoelder_seminorm(b, 1.5, probes)


def test_carre_du_champ_of_square():
    sigma = identity_diffusion(1)

    def square(x):
        return float(x[0] ** 2)

    # 1/2 |2x|^2 at x = 1
    assert carre_du_champ(sigma, square, square, 0.0, [1.0]) == pytest.approx(2.0, rel=1e-6)


def test_bump_rule_is_normalized():
    nodes, weights = bump_rule(2)
    assert weights.sum() == pytest.approx(1.0)
    assert np.all((nodes ** 2).sum(axis=1) < 1.0)


def test_mollified_sign_diffusion():
    sigma = build_field(FieldSpec("holder-sign", params={"base": 1.0, "jump": 0.5}), 1)
    smooth = mollify(sigma, 4)
    assert smooth.regularity.kind == "smooth"
    # symmetric kernel averages the jump away at the discontinuity
    assert smooth(0.0, [0.0])[0, 0] == pytest.approx(1.0, abs=1e-12)
    # outside the support radius 1/4 nothing changes
    assert smooth(0.0, [1.0])[0, 0] == pytest.approx(1.5)
    assert smooth(0.0, [-1.0])[0, 0] == pytest.approx(0.5)
    identity = identity_diffusion(1)
    assert mollify(identity, 3) is identity
    with pytest.raises(ArgumentError):
        mollify(sigma, 0)
