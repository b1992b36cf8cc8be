"""
Rotationally symmetric alpha-stable increments with characteristic function
exp(-dt |xi|^alpha).
"""
import numpy as np

from harnack_lab.errors import ArgumentError


def _check(alpha: float, dt: float):
    if not 1.0 <= alpha <= 2.0:
        raise ArgumentError(f"stability index must lie in [1, 2], got {alpha}")
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")


def chambers_mallows_stuck(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Standard symmetric stable variates, E exp(i xi X) = exp(-|xi|^alpha)."""
    V = rng.uniform(-np.pi / 2, np.pi / 2, size)
    W = rng.exponential(1.0, size)
    if alpha == 1.0:
        return np.tan(V)
    return (np.sin(alpha * V) / np.cos(V) ** (1.0 / alpha)
            * (np.cos(V - alpha * V) / W) ** ((1.0 - alpha) / alpha))


def positive_stable(beta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Kanter's representation: E exp(-s A) = exp(-s^beta), beta in (0, 1)."""
    U = rng.uniform(0.0, np.pi, size)
    E = rng.exponential(1.0, size)
    a = ((np.sin(beta * U) / np.sin(U)) ** (1.0 / (1.0 - beta))
         * np.sin((1.0 - beta) * U) / np.sin(beta * U))
    return (a / E) ** ((1.0 - beta) / beta)


def sample_stable_increment(alpha: float, dt: float, rng: np.random.Generator,
                            dimension: int = 1, size: int | None = None) -> np.ndarray:
    """
    One increment (shape (d,)) or `size` increments (shape (size, d)).

    d = 1 uses Chambers-Mallows-Stuck. For d > 1 the increment is sqrt(A) G with
    A positive (alpha/2)-stable and G ~ N(0, 2 Id), which is rotationally
    symmetric for every alpha. alpha = 2 is Gaussian with covariance 2 dt Id.
    """
    _check(alpha, dt)
    n = 1 if size is None else size
    scale = dt ** (1.0 / alpha)
    if alpha == 2.0:
        out = np.sqrt(2.0) * rng.standard_normal((n, dimension))
    elif dimension == 1:
        out = chambers_mallows_stuck(alpha, n, rng)[:, None]
    else:
        A = positive_stable(alpha / 2.0, n, rng)
        G = np.sqrt(2.0) * rng.standard_normal((n, dimension))
        out = np.sqrt(A)[:, None] * G
    out *= scale
    return out[0] if size is None else out


def stable_density_1d_cauchy(x, t: float = 1.0) -> np.ndarray:
    """Exact alpha = 1, d = 1 transition density t / (pi (t^2 + x^2))."""
    x = np.asarray(x, dtype=float)
    return t / (np.pi * (t * t + x * x))
