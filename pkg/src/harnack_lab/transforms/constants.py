"""
Explicit Harnack constants of the transformed equation, computed from grid
suprema, and probe certificates for the conditions they stand for.
"""
import logging
import math

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, ConsistencyError
from harnack_lab.fields.coefficient_field import CoefficientField
from harnack_lab.fields.conditions import ProbeSet, check_nondegeneracy, evaluate_at_probes
from harnack_lab.pde.grid import GridFunction, SpaceTimeGrid

logger = logging.getLogger(__name__)

SLACK = 0.05
NORM_LABEL = "measured on grid"
IDENTIFICATION = "(K, kappa, delta) of the transformed inequalities taken as (K1, kappa1, delta1)"


@serde
class HarnackConstants:
    K1: float
    kappa1: float
    delta1: float
    lam: float
    dimension: int
    hessian_psi_sup: float
    sigma_sup: float
    grad_Psi_sup: float
    grad_sigma_sup: float
    inv_a_sup: float
    norms: str = NORM_LABEL
    identification: str = IDENTIFICATION


@serde
class AssumptionCertificate:
    K0: float
    kappa0: float
    delta0: float
    sigma_hat_sup: float
    sigma_hat_bound: float
    probe_count: int
    consistent: bool


def harnack_constants(lam: float, dimension: int, bracket_terms: list[tuple[float, float, float, float]],
                      sigma_sup: float, inv_a_sup: float) -> HarnackConstants:
    """
    K1 = 4 max_t (|hess psi_t| |sigma_t| + |grad Psi_t| |grad sigma_t|)^2 + 2 lam,
    kappa1 = (4 sqrt(d) |a^-1|)^(-1/2), delta1 = (2d + 1) |sigma|.
    bracket_terms holds (|hess psi_t|, |sigma_t|, |grad Psi_t|, |grad sigma_t|) per time slice.
    """
    bracket = max(h * s + g * gs for h, s, g, gs in bracket_terms)
    worst = max(bracket_terms, key=lambda r: r[0] * r[1] + r[2] * r[3])
    return HarnackConstants(
        K1=4.0 * bracket ** 2 + 2.0 * lam,
        kappa1=(4.0 * math.sqrt(dimension) * inv_a_sup) ** -0.5,
        delta1=(2 * dimension + 1) * sigma_sup,
        lam=lam,
        dimension=dimension,
        hessian_psi_sup=max(r[0] for r in bracket_terms),
        sigma_sup=sigma_sup,
        grad_Psi_sup=worst[2],
        grad_sigma_sup=worst[3],
        inv_a_sup=inv_a_sup,
    )


def _hs(values: np.ndarray, tail: int) -> np.ndarray:
    return np.sqrt((values ** 2).sum(axis=tuple(range(-tail, 0))))


def measure_constants(psi: GridFunction, sigma: CoefficientField, lam: float) -> HarnackConstants:
    """Evaluate the constant formulas with every norm taken as a supremum over grid nodes."""
    grid: SpaceTimeGrid = psi.grid
    d = grid.dimension
    nodes = grid.points()
    terms = []
    sigma_sup = 0.0
    inv_a_sup = 0.0
    eye = np.eye(d)
    for i, t in enumerate(psi.times):
        S = sigma.checked_batch(float(t), nodes)
        s_sup = float(_hs(S, 2).max())
        grad_sigma = np.gradient(S.reshape(grid.shape + (d * d,)), grid.h, axis=tuple(range(d)), edge_order=2)
        if d == 1:
            grad_sigma = [grad_sigma]
        gs_sup = float(np.sqrt(sum(g ** 2 for g in grad_sigma).sum(axis=-1)).max())
        hess = psi.hessian_values[i].reshape(grid.size, d, d, d)
        h_sup = float(_hs(hess, 3).max())
        jac = eye[None, :, :] + psi.gradient_values[i].reshape(grid.size, d, d)
        g_sup = float(_hs(jac, 2).max())
        a = S @ np.swapaxes(S, 1, 2)
        inv = np.linalg.inv(a)
        inv_a_sup = max(inv_a_sup, float(_hs(inv, 2).max()))
        sigma_sup = max(sigma_sup, s_sup)
        terms.append((h_sup, s_sup, g_sup, gs_sup))
    return harnack_constants(lam, d, terms, sigma_sup, inv_a_sup)


def verify_A1_A2_A3(sigma_hat: CoefficientField, b_hat: CoefficientField, probes: ProbeSet,
                    constants: HarnackConstants | None = None, sigma_sup: float | None = None,
                    slack: float = SLACK) -> AssumptionCertificate:
    """
    Probe suprema over point pairs (t, x, y) for

      |s(x) - s(y)|_HS^2 + 2 <b(x) - b(y), x - y> <= K0 |x - y|^2   (K0 clipped at 0)
      s s^T >= kappa0^2 Id
      |(s(x) - s(y))(x - y)| <= delta0 |x - y|

    With constants given, K0 <= (1+slack) K1, kappa0 >= (1-slack) kappa1 and
    delta0 <= (1+slack) delta1 must hold; with sigma_sup given, also
    sup |s|_HS <= (1+slack)(d + 1/2) sigma_sup.
    """
    if len(probes) == 0:
        raise ArgumentError("empty probe set")
    dx = probes.x - probes.y
    gaps = np.linalg.norm(dx, axis=1)
    if np.any(gaps == 0):
        raise ArgumentError("probe pairs must have x != y")
    Sx = evaluate_at_probes(sigma_hat, probes.t, probes.x)
    Sy = evaluate_at_probes(sigma_hat, probes.t, probes.y)
    bx = evaluate_at_probes(b_hat, probes.t, probes.x)
    by = evaluate_at_probes(b_hat, probes.t, probes.y)
    lhs = ((Sx - Sy) ** 2).sum(axis=(1, 2)) + 2.0 * ((bx - by) * dx).sum(axis=1)
    K0 = max(0.0, float((lhs / gaps ** 2).max()))
    delta0 = float((np.linalg.norm(np.einsum("nij,nj->ni", Sx - Sy, dx), axis=1) / gaps).max())

    d = probes.dimension
    directions = ProbeSet.unit_directions(probes.x[: min(len(probes), 64)], count=32, t=float(probes.t[0]))
    witness = check_nondegeneracy(sigma_hat, directions)
    kappa0 = math.sqrt(max(witness.delta, 0.0))
    sigma_hat_sup = float(np.sqrt((Sx ** 2).sum(axis=(1, 2))).max())

    bound = math.inf if sigma_sup is None else (d + 0.5) * sigma_sup
    failures = []
    if sigma_hat_sup > bound * (1.0 + slack):
        failures.append(f"|sigma_hat|={sigma_hat_sup:.4g} > (d+1/2)|sigma|={bound:.4g}")
    if constants is not None:
        if K0 > constants.K1 * (1.0 + slack):
            failures.append(f"K0={K0:.4g} > K1={constants.K1:.4g}")
        if kappa0 < constants.kappa1 * (1.0 - slack):
            failures.append(f"kappa0={kappa0:.4g} < kappa1={constants.kappa1:.4g}")
        if delta0 > constants.delta1 * (1.0 + slack):
            failures.append(f"delta0={delta0:.4g} > delta1={constants.delta1:.4g}")
    if failures:
        raise ConsistencyError("probe constants contradict the formula constants ("
                               + "; ".join(failures) + "); the PDE solution is probably under-resolved")
    return AssumptionCertificate(K0, kappa0, delta0, sigma_hat_sup, bound, len(probes), True)
