"""
Convolution of a coefficient field with the standard bump rho_n supported in
the ball of radius 1/n, by tensor Gauss-Legendre quadrature.
"""
import functools

import numpy as np

from harnack_lab.errors import ArgumentError
from harnack_lab.fields.coefficient_field import CoefficientField, Regularity

QUADRATURE_ORDER = 16
CHUNK = 8192


@functools.cache
def bump_rule(dimension: int, order: int = QUADRATURE_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in the unit ball and weights of rho(u) du, normalized to sum to one."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    axes = np.meshgrid(*([nodes] * dimension), indexing="ij")
    points = np.stack([g.ravel() for g in axes], axis=1)
    w = np.prod(np.stack(np.meshgrid(*([weights] * dimension), indexing="ij")), axis=0).ravel()
    r2 = (points ** 2).sum(axis=1)
    inside = r2 < 1.0
    rho = np.zeros_like(r2)
    rho[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    w = w * rho
    keep = w > 0
    return points[keep], w[keep] / w[keep].sum()


def mollify(sigma: CoefficientField, n: int, order: int = QUADRATURE_ORDER) -> CoefficientField:
    if n < 1:
        raise ArgumentError(f"mollification index must be >= 1, got {n}")
    if sigma.constant:
        return sigma
    nodes, weights = bump_rule(sigma.dimension, order)
    offsets = nodes / n
    q = len(weights)

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0],) + sigma.value_shape)
        for start in range(0, X.shape[0], CHUNK):
            chunk = X[start:start + CHUNK]
            shifted = (chunk[:, None, :] - offsets[None, :, :]).reshape(-1, sigma.dimension)
            values = sigma.batch(t, shifted).reshape((chunk.shape[0], q) + sigma.value_shape)
            out[start:start + CHUNK] = np.tensordot(weights, values, axes=([0], [1]))
        return out

    return CoefficientField(
        sigma.dimension, sigma.kind, evaluate, Regularity.smooth(),
        name=f"{sigma.name}*rho_{n}", horizon=sigma.horizon, sup_norm=sigma.sup_norm,
        time_dependent=sigma.time_dependent,
    )
