"""
Space-time maps x -> x + u(t, x) built on a grid function u, with Newton
inversion and Lipschitz certificates.
"""
import logging
from dataclasses import dataclass

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, InversionError
from harnack_lab.fields.conditions import ProbeSet
from harnack_lab.pde.grid import GridFunction, SpaceTimeGrid, lipschitz_bound

logger = logging.getLogger(__name__)

INVERSION_TOLERANCE = 1e-8
MAX_NEWTON_STEPS = 50
MAX_HALVINGS = 12


@serde
class BiLipschitzCertificate:
    grad_bound: float
    min_ratio: float
    max_ratio: float
    probe_count: int
    holds: bool


@serde
class JacobianBounds:
    smallest_singular_value: float
    largest_singular_value: float
    within_half_to_three_halves: bool


@dataclass
class TransformMap:
    name: str
    base: GridFunction
    grad_bound: float

    @staticmethod
    def from_grid_function(name: str, base: GridFunction) -> "TransformMap":
        if base.components != base.grid.dimension:
            raise ArgumentError(f"{name}: base must have {base.grid.dimension} components")
        return TransformMap(name, base, lipschitz_bound(base.values, base.grid))

    @staticmethod
    def identity(grid: SpaceTimeGrid, name: str = "identity") -> "TransformMap":
        values = np.zeros((len(grid.times),) + grid.shape + (grid.dimension,))
        return TransformMap(name, GridFunction(grid, grid.times, values), 0.0)

    @property
    def dimension(self) -> int:
        return self.base.grid.dimension

    def forward(self, t: float, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X + self.base(t, X)

    def jacobian(self, t: float, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.eye(self.dimension)[None, :, :] + self.base.gradient(t, X)

    def inverse(self, t: float, Y, tolerance: float = INVERSION_TOLERANCE) -> np.ndarray:
        """Damped Newton from x0 = y, vectorized over points."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.grad_bound == 0.0:
            # spatially constant shift
            return Y - self.base(t, Y)
        X = Y.copy()
        residual = self.forward(t, X) - Y
        norms = np.linalg.norm(residual, axis=1)
        for _ in range(MAX_NEWTON_STEPS):
            active = norms >= tolerance
            if not active.any():
                return X
            J = self.jacobian(t, X[active])
            step = np.linalg.solve(J, residual[active][:, :, None])[:, :, 0]
            scale = np.ones(step.shape[0])
            current = norms[active]
            for _ in range(MAX_HALVINGS):
                trial = X[active] - scale[:, None] * step
                trial_res = self.forward(t, trial) - Y[active]
                trial_norm = np.linalg.norm(trial_res, axis=1)
                worse = trial_norm >= current
                if not worse.any():
                    break
                scale[worse] *= 0.5
            X[active] = trial
            residual[active] = trial_res
            norms[active] = trial_norm
        if np.any(norms >= tolerance):
            worst = int(np.argmax(norms))
            raise InversionError(f"{self.name}: Newton did not converge at y={Y[worst].tolist()} "
                                 f"(residual {norms[worst]:.3g})")
        return X

    def jacobian_bounds(self, t: float, X) -> JacobianBounds:
        s = np.linalg.svd(self.jacobian(t, X), compute_uv=False)
        lo, hi = float(s.min()), float(s.max())
        return JacobianBounds(lo, hi, bool(lo >= 0.5 and hi <= 1.5))

    def certify(self, probes: ProbeSet) -> BiLipschitzCertificate:
        """Check 1/2 |x - y| <= |F(x) - F(y)| <= 3/2 |x - y| on probe pairs (t, x, y)."""
        if len(probes) == 0:
            raise ArgumentError("empty probe set")
        ratios = np.empty(len(probes))
        for t in np.unique(probes.t):
            mask = probes.t == t
            fx = self.forward(float(t), probes.x[mask])
            fy = self.forward(float(t), probes.y[mask])
            gaps = np.linalg.norm(probes.x[mask] - probes.y[mask], axis=1)
            if np.any(gaps == 0):
                raise ArgumentError("probe pairs must have x != y")
            ratios[mask] = np.linalg.norm(fx - fy, axis=1) / gaps
        lo, hi = float(ratios.min()), float(ratios.max())
        return BiLipschitzCertificate(self.grad_bound, lo, hi, len(probes), bool(lo >= 0.5 and hi <= 1.5))


def invert_map(transform: TransformMap, t: float, y) -> np.ndarray:
    if transform.grad_bound >= 1.0:
        raise ArgumentError(f"{transform.name}: gradient bound {transform.grad_bound:.3g} >= 1, "
                            "map may not be invertible")
    y = np.asarray(y, dtype=float)
    x = transform.inverse(t, y.reshape(-1, transform.dimension))
    return x[0] if y.ndim <= 1 else x
