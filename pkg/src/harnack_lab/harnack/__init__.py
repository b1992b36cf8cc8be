"""
Harnack-type inequality checks with three-valued verdicts, fitted constants
and the kernel and interpolation diagnostics behind them.
"""

from .fitting import (
    EmpiricalConstant,
    SweepInstance,
    fit_empirical_constant,
    fit_stable_constant,
    read_constant,
    write_constant,
)
from .inequalities import (
    SplitReport,
    log_term,
    nested_log_estimate,
    power_exponents,
    power_threshold,
    verify_log_harnack,
    verify_log_harnack_split,
    verify_power_harnack,
)
from .interpolation import InterpolationReport, gamma_ratio_at, verify_interpolation_identity
from .report import (
    HarnackReport,
    InequalityConstants,
    Statement,
    Verdict,
    classify,
    kt_factor,
    reports_to_frame,
)
from .stable import (
    KernelBoundsReport,
    kernel_density,
    robust_bandwidth,
    stable_base_estimates,
    stable_factor,
    verify_kernel_bounds,
    verify_stable_harnack,
)

__all__ = [
    "EmpiricalConstant",
    "SweepInstance",
    "fit_empirical_constant",
    "fit_stable_constant",
    "read_constant",
    "write_constant",
    "SplitReport",
    "log_term",
    "nested_log_estimate",
    "power_exponents",
    "power_threshold",
    "verify_log_harnack",
    "verify_log_harnack_split",
    "verify_power_harnack",
    "InterpolationReport",
    "gamma_ratio_at",
    "verify_interpolation_identity",
    "HarnackReport",
    "InequalityConstants",
    "Statement",
    "Verdict",
    "classify",
    "kt_factor",
    "reports_to_frame",
    "KernelBoundsReport",
    "kernel_density",
    "robust_bandwidth",
    "stable_base_estimates",
    "stable_factor",
    "verify_kernel_bounds",
    "verify_stable_harnack",
]
