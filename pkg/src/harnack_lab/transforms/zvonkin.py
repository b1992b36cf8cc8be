"""
Zvonkin map Phi_r(x) = x + u(r, x) from the backward parabolic system, and the
diffusion Sigma(r, y) = (grad Phi_r sigma(r, .))(Phi_r^-1(y)) of the
transformed, driftless equation.
"""
import logging
from dataclasses import dataclass

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, TransformError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind, zero_drift
from harnack_lab.fields.conditions import EllipticityWitness, ProbeSet, check_nondegeneracy
from harnack_lab.pde.grid import SpaceTimeGrid
from harnack_lab.pde.operators import covariance_field
from harnack_lab.pde.solvers import PdeSolutionReport, solve_backward_system
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.transforms.transform_map import BiLipschitzCertificate, TransformMap

logger = logging.getLogger(__name__)

GRADIENT_TARGET = 0.5
MAX_T0_HALVINGS = 8
CERTIFICATE_PROBES = 1000


@serde
class SigmaEllipticityReport:
    witness: EllipticityWitness
    lower_bound: float
    upper_bound: float
    holds: bool


@dataclass
class ZvonkinTransform:
    map: TransformMap
    sigma: CoefficientField
    sigma_hat: CoefficientField
    T0: float
    halvings: int
    report: PdeSolutionReport
    certificate: BiLipschitzCertificate

    def transformed_problem(self) -> SdeProblem:
        """dY = Sigma(r, Y) dW on the transformed interval, r measured from grid start."""
        d = self.map.dimension
        return SdeProblem(d, zero_drift(d), self.sigma_hat, horizon=self.map.base.grid.t_end)


def transformed_diffusion(transform: TransformMap, sigma: CoefficientField, name: str) -> CoefficientField:
    """(grad F_t . sigma(t, .)) composed with F_t^-1."""

    def evaluate(t: float, Y: np.ndarray) -> np.ndarray:
        X = transform.inverse(t, Y)
        return transform.jacobian(t, X) @ sigma.batch(t, X)

    bound = None if sigma.sup_norm is None else (1.0 + transform.grad_bound) * sigma.sup_norm
    return CoefficientField(sigma.dimension, FieldKind.MATRIX, evaluate, name=name,
                            horizon=sigma.horizon, sup_norm=bound, time_dependent=True)


def default_pair_probes(grid: SpaceTimeGrid, t: float, count: int = CERTIFICATE_PROBES, seed: int = 0) -> ProbeSet:
    return ProbeSet.random_pairs(grid.dimension, count, grid.half_width / 2.0, seed=seed, t=t)


def build_zvonkin(sigma: CoefficientField, b: CoefficientField, grid: SpaceTimeGrid,
                  T0: float | None = None, include_drift_in_L: bool = True,
                  probes: ProbeSet | None = None) -> ZvonkinTransform:
    """
    Solve the backward system on [t_end - T0, t_end], halving T0 up to 8 times
    until the interpolant's gradient bound is at most 1/2.
    """
    if sigma.kind != FieldKind.MATRIX:
        raise ArgumentError(f"{sigma.name} is not a matrix field")
    a = covariance_field(sigma)
    horizon = grid.t_end - grid.t_start if T0 is None else T0
    best = np.inf
    for halving in range(MAX_T0_HALVINGS + 1):
        attempt = grid.with_interval(grid.t_end - horizon, grid.t_end)
        u, report = solve_backward_system(a, b, attempt, include_drift_in_L)
        best = min(best, report.grad_sup)
        if report.grad_sup <= GRADIENT_TARGET:
            phi = TransformMap("Phi", u, report.grad_sup)
            check = probes if probes is not None else default_pair_probes(attempt, attempt.t_start)
            certificate = phi.certify(check)
            if not certificate.holds:
                logger.warning("Phi gradient bound %.3g but probe ratios span [%.4f, %.4f]",
                               report.grad_sup, certificate.min_ratio, certificate.max_ratio)
            sigma_hat = transformed_diffusion(phi, sigma, name=f"Sigma[{sigma.name}]")
            logger.info("Zvonkin map on T0=%g after %d halvings: sup|grad u| = %.4g",
                        horizon, halving, report.grad_sup)
            return ZvonkinTransform(phi, sigma, sigma_hat, horizon, halving, report, certificate)
        logger.info("sup|grad u| = %.4g > %.2f on T0=%g, halving", report.grad_sup, GRADIENT_TARGET, horizon)
        horizon /= 2.0
    raise TransformError(f"no T0 down to {2 * horizon:g} brings sup|grad u| to {GRADIENT_TARGET}", achieved=best)


def check_sigma_ellipticity(transform: ZvonkinTransform, delta: float, K: float,
                            probes: ProbeSet) -> SigmaEllipticityReport:
    """delta/4 |y|^2 <= |Sigma^T y|^2 <= 9K/4 |y|^2 on probes, given sigma satisfies (delta, K)."""
    witness = check_nondegeneracy(transform.sigma_hat, probes)
    lower, upper = delta / 4.0, 9.0 * K / 4.0
    holds = witness.delta >= lower and witness.kappa_upper <= upper
    return SigmaEllipticityReport(witness, lower, upper, bool(holds))
