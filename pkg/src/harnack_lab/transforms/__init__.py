"""
Drift-removing space-time transformations and the explicit constants they yield.
"""

from .constants import AssumptionCertificate, HarnackConstants, harnack_constants, measure_constants, verify_A1_A2_A3
from .ito_tanaka import DEFAULT_SCHEDULE, ItoTanakaTransform, build_ito_tanaka, transformed_drift
from .pushforward import PushforwardReport, ks_critical_value, pushforward_consistency
from .transform_map import BiLipschitzCertificate, JacobianBounds, TransformMap, invert_map
from .zvonkin import (
    SigmaEllipticityReport,
    ZvonkinTransform,
    build_zvonkin,
    check_sigma_ellipticity,
    default_pair_probes,
    transformed_diffusion,
)

__all__ = [
    "AssumptionCertificate",
    "HarnackConstants",
    "harnack_constants",
    "measure_constants",
    "verify_A1_A2_A3",
    "DEFAULT_SCHEDULE",
    "ItoTanakaTransform",
    "build_ito_tanaka",
    "transformed_drift",
    "PushforwardReport",
    "ks_critical_value",
    "pushforward_consistency",
    "BiLipschitzCertificate",
    "JacobianBounds",
    "TransformMap",
    "invert_map",
    "SigmaEllipticityReport",
    "ZvonkinTransform",
    "build_zvonkin",
    "check_sigma_ellipticity",
    "default_pair_probes",
    "transformed_diffusion",
]
