"""
SDE coefficient fields, named presets and probe-based condition checks.
"""

from .coefficient_field import (
    CoefficientField,
    Evaluator,
    FieldKind,
    Regularity,
    constant_field,
    field_norms,
    identity_diffusion,
    zero_drift,
)
from .conditions import (
    EllipticityWitness,
    ProbeSet,
    carre_du_champ,
    central_gradient,
    check_hoelder_seminorm,
    check_inverse_diffusion_bound,
    check_nondegeneracy,
    evaluate_at_probes,
)
from .mollifier import bump_rule, mollify
from .presets import PRESETS, FieldSpec, Preset, build_field

__all__ = [
    "CoefficientField",
    "Evaluator",
    "FieldKind",
    "Regularity",
    "constant_field",
    "field_norms",
    "identity_diffusion",
    "zero_drift",
    "EllipticityWitness",
    "ProbeSet",
    "carre_du_champ",
    "central_gradient",
    "check_hoelder_seminorm",
    "check_inverse_diffusion_bound",
    "check_nondegeneracy",
    "evaluate_at_probes",
    "bump_rule",
    "mollify",
    "PRESETS",
    "FieldSpec",
    "Preset",
    "build_field",
]
