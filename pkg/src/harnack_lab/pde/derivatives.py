import numpy as np

from harnack_lab.errors import DomainError
from harnack_lab.pde.grid import GridFunction

TIME_TOLERANCE = 1e-12


def gradient_and_hessian(u: GridFunction, t: float, x) -> tuple[np.ndarray, np.ndarray]:
    """
    Gradient (comps, d) and symmetric Hessian (comps, d, d) of u at an interior
    point, from second-order central differences on the grid.
    """
    grid = u.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.dimension,) or not grid.interior(x):
        raise DomainError(f"x={x.tolist()} is not interior to [-{grid.half_width}, {grid.half_width}]^{grid.dimension}")
    lo, hi = float(u.times[0]), float(u.times[-1])
    if not lo - TIME_TOLERANCE <= t <= hi + TIME_TOLERANCE:
        raise DomainError(f"t={t} lies outside [{lo}, {hi}]")
    point = x.reshape(1, -1)
    return u.gradient(t, point)[0], u.hessian(t, point)[0]
