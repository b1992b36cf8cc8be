"""
Ito-Tanaka map Psi_t(x) = x + psi(t, x), where psi is the bounded solution of

    d_t psi + L_t psi - lambda psi = -b,

so that Psi_t(X_t) solves the conjugate equation with drift lambda psi(Psi^-1)
and diffusion (grad Psi sigma)(Psi^-1).
"""
import logging
from dataclasses import dataclass

import numpy as np

from harnack_lab.errors import ArgumentError, TransformError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind
from harnack_lab.pde.grid import SpaceTimeGrid
from harnack_lab.pde.operators import covariance_field
from harnack_lab.pde.solvers import PdeSolutionReport, solve_resolvent_system
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.transforms.constants import HarnackConstants, measure_constants
from harnack_lab.transforms.transform_map import TransformMap
from harnack_lab.transforms.zvonkin import transformed_diffusion

logger = logging.getLogger(__name__)

GRADIENT_TARGET = 0.5
DEFAULT_SCHEDULE = tuple(4.0 ** k for k in range(9))


@dataclass
class ItoTanakaTransform:
    map: TransformMap
    lam: float
    sigma: CoefficientField
    drift: CoefficientField
    sigma_hat: CoefficientField
    b_hat: CoefficientField
    constants: HarnackConstants
    report: PdeSolutionReport
    schedule_trace: list[tuple[float, float]]

    def psi0(self, X) -> np.ndarray:
        return self.map.forward(0.0, X)

    def transformed_problem(self, horizon: float) -> SdeProblem:
        d = self.map.dimension
        return SdeProblem(d, self.b_hat, self.sigma_hat, horizon=horizon)


def transformed_drift(transform: TransformMap, lam: float, name: str) -> CoefficientField:
    """lambda psi_t(Psi_t^-1(x))"""

    def evaluate(t: float, Y: np.ndarray) -> np.ndarray:
        return lam * transform.base(t, transform.inverse(t, Y))

    bound = lam * float(np.abs(transform.base.values).max())
    return CoefficientField(transform.dimension, FieldKind.VECTOR, evaluate, name=name,
                            sup_norm=bound, time_dependent=True)


def build_ito_tanaka(sigma: CoefficientField, b: CoefficientField, grid: SpaceTimeGrid,
                     schedule=DEFAULT_SCHEDULE) -> ItoTanakaTransform:
    """
    Walk the increasing lambda schedule and keep the first lambda whose measured
    sup|grad psi| is at most 1/2. The grid covers [0, T]; coefficients are frozen after T.
    """
    schedule = [float(lam) for lam in schedule]
    if not schedule or any(b2 <= b1 for b1, b2 in zip(schedule, schedule[1:])):
        raise ArgumentError(f"lambda schedule must be nonempty and increasing, got {schedule}")
    if sigma.kind != FieldKind.MATRIX:
        raise ArgumentError(f"{sigma.name} is not a matrix field")
    if b.regularity.kind not in ("hoelder", "smooth"):
        logger.warning("drift %s is tagged %s, not Hoelder; Psi may be poorly resolved", b.name, b.regularity.kind)
    a = covariance_field(sigma)
    source = b.scaled(-1.0)
    trace = []
    for lam in schedule:
        psi, report = solve_resolvent_system(a, b, source, lam, grid)
        trace.append((lam, report.grad_sup))
        logger.info("lambda=%g: sup|grad psi| = %.4g", lam, report.grad_sup)
        if report.grad_sup <= GRADIENT_TARGET:
            Psi = TransformMap("Psi", psi, report.grad_sup)
            constants = measure_constants(psi, sigma, lam)
            return ItoTanakaTransform(
                map=Psi,
                lam=lam,
                sigma=sigma,
                drift=b,
                sigma_hat=transformed_diffusion(Psi, sigma, name=f"sigma_hat[{sigma.name}]"),
                b_hat=transformed_drift(Psi, lam, name=f"b_hat[{b.name}]"),
                constants=constants,
                report=report,
                schedule_trace=trace,
            )
    achieved = min(g for _, g in trace)
    raise TransformError(f"no lambda in {schedule} brings sup|grad psi| to {GRADIENT_TARGET}", achieved=achieved)
