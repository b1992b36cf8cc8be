"""
Implicit Euler solvers for the backward parabolic system

    d_r u + L_r u + b = 0 on [s, t],  u(t, .) = 0,

and the resolvent system

    d_t u + L_t u - lambda u = f on [0, T],

whose bounded solution is taken with coefficients frozen after T.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from serde import serde

from harnack_lab.errors import ArgumentError, ConvergenceError, PreconditionError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind
from harnack_lab.pde.grid import GridFunction, SpaceTimeGrid, lipschitz_bound
from harnack_lab.pde.operators import DifferenceStencils, generator_matrix, node_covariance

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8
STATIONARY_TOLERANCE = 1e-12
PSEUDO_STEP = 1.0
MAX_PSEUDO_STEPS = 2000


@serde
class PdeSolutionReport:
    system: str
    grad_sup: float
    hessian_sup: float
    time_derivative_sup: float
    sup_norm: float
    residual: float
    horizon: float
    half_width: float
    nodes: int
    steps: int
    lam: float | None = None
    pseudo_steps: int | None = None
    boundary_sensitivity: float | None = None


@dataclass
class _Assembly:
    grid: SpaceTimeGrid
    a: CoefficientField
    b: CoefficientField
    include_drift: bool
    shift: float = 0.0

    def __post_init__(self):
        self.stencils = DifferenceStencils(self.grid)
        self.nodes = self.grid.points()
        self.frozen = not (self.a.time_dependent or (self.include_drift and self.b.time_dependent))
        self._cache: dict = {}

    def generator(self, t: float) -> sp.csc_matrix:
        key = 0.0 if self.frozen else t
        L = self._cache.get(("L", key))
        if L is None:
            A = node_covariance(self.a, t, self.nodes)
            B = self.b.checked_batch(t, self.nodes) if self.include_drift else None
            L = generator_matrix(self.stencils, A, B)
            if self.frozen:
                self._cache[("L", key)] = L
        return L

    def factor(self, t: float, dt: float):
        """LU of I - dt (L_t - shift)."""
        key = (0.0 if self.frozen else t, dt)
        lu = self._cache.get(("lu", key))
        if lu is None:
            n = self.grid.size
            system = (sp.identity(n, format="csc") * (1.0 + dt * self.shift) - dt * self.generator(t)).tocsc()
            lu = splu(system)
            if self.frozen:
                self._cache[("lu", key)] = lu
        return lu


def _source_values(f: CoefficientField, t: float, nodes: np.ndarray) -> np.ndarray:
    values = f.checked_batch(t, nodes)
    return values.reshape(nodes.shape[0], -1)


def _check_drift(b: CoefficientField, grid: SpaceTimeGrid):
    if b.kind != FieldKind.VECTOR or b.dimension != grid.dimension:
        raise ArgumentError(f"drift must be a vector field on R^{grid.dimension}")


def _report(system: str, u: GridFunction, residual: float, lam: float | None = None,
            pseudo_steps: int | None = None) -> PdeSolutionReport:
    grid = u.grid
    H = u.hessian_values
    if len(u.times) > 1:
        dt_u = np.abs(np.diff(u.values, axis=0)) / np.diff(u.times).reshape((-1,) + (1,) * (u.values.ndim - 1))
        time_derivative = float(dt_u.max())
    else:
        time_derivative = 0.0
    return PdeSolutionReport(
        system=system,
        grad_sup=lipschitz_bound(u.values, grid),
        hessian_sup=float(np.sqrt((H ** 2).sum(axis=(-3, -2, -1))).max()),
        time_derivative_sup=time_derivative,
        sup_norm=float(np.abs(u.values).max()),
        residual=residual,
        horizon=grid.t_end - grid.t_start,
        half_width=grid.half_width,
        nodes=grid.nodes,
        steps=grid.steps,
        lam=lam,
        pseudo_steps=pseudo_steps,
    )


def _implicit_march(assembly: _Assembly, start: np.ndarray, times_desc: np.ndarray,
                    source, tolerance: float) -> tuple[np.ndarray, float]:
    """
    Integrate backward in time from times_desc[0] down to times_desc[-1]:
    (I - dt (L - shift)) u_new = u_old + dt * source(t_new).
    Returns slices ordered like times_desc and the worst residual.
    """
    slices = [start]
    worst = 0.0
    u = start
    for k in range(1, len(times_desc)):
        t_new = float(times_desc[k])
        dt = float(times_desc[k - 1] - times_desc[k])
        rhs = source(t_new)
        lu = assembly.factor(t_new, dt)
        new = np.column_stack([lu.solve(u[:, c] + dt * rhs[:, c]) for c in range(u.shape[1])])
        L = assembly.generator(t_new)
        residual = (new - u) / dt - (L @ new - assembly.shift * new) - rhs
        scale = max(1.0, float(np.abs(rhs).max()), float(np.abs(new).max()) / dt)
        worst = max(worst, float(np.abs(residual).max()) / scale)
        if worst > tolerance:
            raise ConvergenceError(f"implicit step at t={t_new} left residual {worst:.3g} > {tolerance:.3g}")
        slices.append(new)
        u = new
    return np.stack(slices), worst


def solve_backward_system(a: CoefficientField, b: CoefficientField, grid: SpaceTimeGrid,
                          include_drift_in_L: bool = True, T0: float | None = None,
                          tolerance: float = RESIDUAL_TOLERANCE,
                          check_boundary: bool = False) -> tuple[GridFunction, PdeSolutionReport]:
    """
    Solve d_r u + L_r u + b = 0 on [grid.t_start, grid.t_end] with u = 0 at the
    end time. `a` is the covariance matrix field sigma sigma^T.
    """
    _check_drift(b, grid)
    if T0 is not None and grid.t_end - grid.t_start > T0 * (1.0 + 1e-12):
        raise PreconditionError(f"interval length {grid.t_end - grid.t_start} exceeds T0={T0}")
    assembly = _Assembly(grid, a, b, include_drift_in_L)
    times_desc = grid.times[::-1]
    start = np.zeros((grid.size, grid.dimension))
    slices, residual = _implicit_march(assembly, start, times_desc,
                                       lambda t: _source_values(b, t, assembly.nodes), tolerance)
    values = slices[::-1].reshape((len(times_desc),) + grid.shape + (grid.dimension,))
    u = GridFunction(grid, grid.times, values)
    report = _report("backward", u, residual)
    logger.debug("backward system on [%g, %g]: sup|grad u| = %.4g", grid.t_start, grid.t_end, report.grad_sup)
    if check_boundary:
        report.boundary_sensitivity = _boundary_sensitivity(
            u, solve_backward_system(a, b, grid.doubled(), include_drift_in_L, T0, tolerance)[0])
    return u, report


def stationary_resolvent(assembly: _Assembly, f: CoefficientField, t: float, components: int,
                         tolerance: float = STATIONARY_TOLERANCE,
                         pseudo_step: float = PSEUDO_STEP) -> tuple[np.ndarray, int]:
    """
    Bounded solution of L u - lambda u = f with coefficients frozen at t, by
    pseudo-time implicit Euler from u = 0 until the increment is below tolerance.
    """
    rhs = _source_values(f, t, assembly.nodes)
    u = np.zeros((assembly.grid.size, components))
    lu = assembly.factor(t, pseudo_step)
    for k in range(1, MAX_PSEUDO_STEPS + 1):
        new = np.column_stack([lu.solve(u[:, c] - pseudo_step * rhs[:, c]) for c in range(components)])
        increment = float(np.abs(new - u).max())
        u = new
        if increment <= tolerance * max(1.0, float(np.abs(u).max())):
            return u, k
    raise ConvergenceError(f"resolvent tail did not settle in {MAX_PSEUDO_STEPS} pseudo-time steps "
                           f"(last increment {increment:.3g})")


def solve_resolvent_system(a: CoefficientField, b: CoefficientField, f: CoefficientField, lam: float,
                           grid: SpaceTimeGrid, tolerance: float = RESIDUAL_TOLERANCE,
                           check_boundary: bool = False) -> tuple[GridFunction, PdeSolutionReport]:
    """
    Bounded solution of d_t u + L_t u - lam u = f on [grid.t_start, grid.t_end],
    coefficients frozen after grid.t_end. L includes the drift term.
    """
    if not lam >= 1.0:
        raise ArgumentError(f"lambda must be >= 1, got {lam}")
    _check_drift(b, grid)
    if f.dimension != grid.dimension:
        raise ArgumentError(f"source must live on R^{grid.dimension}")
    components = int(np.prod(f.value_shape)) if f.value_shape else 1
    assembly = _Assembly(grid, a, b, include_drift=True, shift=lam)
    assembly.frozen = assembly.frozen and not f.time_dependent
    tail, pseudo_steps = stationary_resolvent(assembly, f, grid.t_end, components)
    times_desc = grid.times[::-1]
    slices, residual = _implicit_march(assembly, tail, times_desc,
                                       lambda t: -_source_values(f, t, assembly.nodes), tolerance)
    values = slices[::-1].reshape((len(times_desc),) + grid.shape + (components,))
    u = GridFunction(grid, grid.times, values)
    report = _report("resolvent", u, residual, lam=lam, pseudo_steps=pseudo_steps)
    logger.debug("resolvent system, lambda=%g: sup|grad u| = %.4g", lam, report.grad_sup)
    if check_boundary:
        report.boundary_sensitivity = _boundary_sensitivity(
            u, solve_resolvent_system(a, b, f, lam, grid.doubled(), tolerance)[0])
    return u, report


def _boundary_sensitivity(u: GridFunction, wide: GridFunction) -> float:
    """Max difference on the original box between the solution and its rerun on the doubled box."""
    M = u.grid.nodes
    offset = (M - 1) // 2
    window = (slice(None),) + (slice(offset, offset + M),) * u.grid.dimension
    diff = float(np.abs(wide.values[window] - u.values).max())
    if diff > 0:
        logger.info("boundary sensitivity on [-%g, %g]: %.3g", u.grid.half_width, u.grid.half_width, diff)
    return diff


def manufactured_error(u: GridFunction, exact, t: float | None = None) -> float:
    """Max nodal error against a closed form exact(t, X) -> (n, comps)."""
    pts = u.grid.points()
    worst = 0.0
    slice_ids = range(len(u.times)) if t is None else [int(np.argmin(np.abs(u.times - t)))]
    for i in slice_ids:
        expected = np.asarray(exact(float(u.times[i]), pts), dtype=float).reshape(pts.shape[0], -1)
        worst = max(worst, float(np.abs(u.values[i].reshape(pts.shape[0], -1) - expected).max()))
    return worst if math.isfinite(worst) else math.inf
