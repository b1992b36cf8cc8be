"""
Evaluatable SDE coefficients (drift b, diffusion sigma, scalar test data) with
declared regularity metadata.
"""
import math
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Callable

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, EvaluationError

# Vectorized evaluator: (t, X[n, d]) -> values[n, ...]
Evaluator = Callable[[float, np.ndarray], np.ndarray]


class FieldKind(StrEnum):
    SCALAR = "scalar"
    VECTOR = "vector"
    MATRIX = "matrix"


@serde
class Regularity:
    kind: str  # smooth | hoelder | lps | bounded-measurable
    theta: float | None = None
    p: float | None = None
    q: float | None = None

    @staticmethod
    def smooth() -> "Regularity":
        return Regularity("smooth")

    @staticmethod
    def hoelder(theta: float) -> "Regularity":
        if not 0.0 < theta < 1.0:
            raise ArgumentError(f"Hoelder exponent must lie in (0, 1), got {theta}")
        return Regularity("hoelder", theta=theta)

    @staticmethod
    def lps(p: float, q: float) -> "Regularity":
        if p <= 0 or q <= 2:
            raise ArgumentError(f"LPS exponents need p > 0 and q > 2, got p={p}, q={q}")
        return Regularity("lps", p=p, q=q)

    @staticmethod
    def bounded_measurable() -> "Regularity":
        return Regularity("bounded-measurable")

    def lps_admissible(self, dimension: int) -> bool:
        """d/p + 2/q < 1"""
        if self.kind != "lps" or self.p is None or self.q is None:
            return False
        return dimension / self.p + 2.0 / self.q < 1.0


@dataclass(frozen=True)
class CoefficientField:
    dimension: int
    kind: FieldKind
    evaluator: Evaluator
    regularity: Regularity = field(default_factory=Regularity.smooth)
    name: str = "field"
    horizon: float = math.inf
    sup_norm: float | None = None
    hoelder_seminorm: float | None = None
    time_dependent: bool = False
    constant: bool = False

    def __post_init__(self):
        if self.dimension < 1:
            raise ArgumentError(f"dimension must be positive, got {self.dimension}")
        if not self.horizon > 0:
            raise ArgumentError(f"horizon must be positive, got {self.horizon}")

    @property
    def value_shape(self) -> tuple[int, ...]:
        match self.kind:
            case FieldKind.SCALAR:
                return ()
            case FieldKind.VECTOR:
                return (self.dimension,)
            case FieldKind.MATRIX:
                return (self.dimension, self.dimension)

    def batch(self, t: float, points: np.ndarray) -> np.ndarray:
        """
        Evaluate at many points sharing one time. Times past the horizon use
        the coefficient frozen at the horizon.
        """
        X = np.asarray(points, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dimension:
            raise ArgumentError(f"{self.name}: expected points in R^{self.dimension}, got shape {X.shape}")
        tt = min(max(float(t), 0.0), self.horizon)
        out = np.asarray(self.evaluator(tt, X), dtype=float)
        expected = (X.shape[0],) + self.value_shape
        if out.shape != expected or not out.flags.writeable:
            out = np.broadcast_to(out, expected).copy()
        return out

    def checked_batch(self, t: float, points: np.ndarray) -> np.ndarray:
        out = self.batch(t, points)
        finite = np.isfinite(out.reshape(out.shape[0], -1)).all(axis=1)
        if not finite.all():
            bad = int(np.argmin(finite))
            raise EvaluationError(f"{self.name} returned a non-finite value",
                                  probe=(float(t), np.atleast_2d(points)[bad].tolist()))
        return out

    def __call__(self, t: float, x) -> np.ndarray:
        return self.batch(t, np.asarray(x, dtype=float).reshape(1, -1))[0]

    def scaled(self, factor: float) -> "CoefficientField":
        evaluator = self.evaluator

        def evaluate(t: float, X: np.ndarray) -> np.ndarray:
            return factor * np.asarray(evaluator(t, X), dtype=float)

        return replace(
            self,
            evaluator=evaluate,
            name=f"{factor:g}*{self.name}",
            sup_norm=None if self.sup_norm is None else abs(factor) * self.sup_norm,
            hoelder_seminorm=None if self.hoelder_seminorm is None else abs(factor) * self.hoelder_seminorm,
        )


def constant_field(value, kind: FieldKind, name: str = "constant") -> CoefficientField:
    arr = np.asarray(value, dtype=float)
    dimension = 1 if arr.ndim == 0 else arr.shape[0]

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        return np.broadcast_to(arr, (X.shape[0],) + arr.shape)

    norm = float(np.linalg.norm(arr))
    return CoefficientField(dimension, kind, evaluate, name=name, sup_norm=norm,
                            hoelder_seminorm=0.0, constant=True)


def identity_diffusion(dimension: int, scale: float = 1.0) -> CoefficientField:
    return constant_field(scale * np.eye(dimension), FieldKind.MATRIX,
                          name="identity" if scale == 1.0 else f"{scale:g}*identity")


def zero_drift(dimension: int) -> CoefficientField:
    return constant_field(np.zeros(dimension), FieldKind.VECTOR, name="zero")


def field_norms(values: np.ndarray, kind: FieldKind) -> np.ndarray:
    """Euclidean norm for vectors, Hilbert-Schmidt norm for matrices."""
    match kind:
        case FieldKind.SCALAR:
            return np.abs(values)
        case FieldKind.VECTOR:
            return np.linalg.norm(values, axis=-1)
        case FieldKind.MATRIX:
            return np.sqrt((values ** 2).sum(axis=(-2, -1)))
