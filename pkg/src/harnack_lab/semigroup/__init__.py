"""
Monte Carlo semigroup estimates, test functions and the gradient and
composition checks built on them.
"""

from .composition import CompositionReport, composed_estimate, composition_check, default_split
from .estimates import (
    McEstimate,
    estimate_functional,
    integrand,
    resolve_dt,
    sample_terminal,
    z_value,
)
from .gradient import (
    GradientRatio,
    GradientRatioFamily,
    MollificationReport,
    estimate_gradient_ratio,
    gradient_ratio_family,
    mollification_convergence,
)
from .test_functions import (
    TEST_FUNCTIONS,
    TestFunction,
    TestFunctionPreset,
    TestFunctionSpec,
    build_test_function,
    bump,
    constant,
    monomial,
    sine,
    truncated_exponential,
)

__all__ = [
    "CompositionReport",
    "composed_estimate",
    "composition_check",
    "default_split",
    "McEstimate",
    "estimate_functional",
    "integrand",
    "resolve_dt",
    "sample_terminal",
    "z_value",
    "GradientRatio",
    "GradientRatioFamily",
    "MollificationReport",
    "estimate_gradient_ratio",
    "gradient_ratio_family",
    "mollification_convergence",
    "TEST_FUNCTIONS",
    "TestFunction",
    "TestFunctionPreset",
    "TestFunctionSpec",
    "build_test_function",
    "bump",
    "constant",
    "monomial",
    "sine",
    "truncated_exponential",
]
