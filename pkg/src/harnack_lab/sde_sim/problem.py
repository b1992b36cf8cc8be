import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind, identity_diffusion


@serde
class Driver:
    kind: str = "brownian"  # brownian | stable
    alpha: float = 2.0

    def __post_init__(self):
        if self.kind not in ("brownian", "stable"):
            raise ArgumentError(f"unknown driver {self.kind!r}")
        if self.kind == "stable" and not 1.0 <= self.alpha <= 2.0:
            raise ArgumentError(f"stability index must lie in [1, 2], got {self.alpha}")

    @property
    def is_stable(self) -> bool:
        return self.kind == "stable"

    @staticmethod
    def brownian() -> "Driver":
        return Driver("brownian", 2.0)

    @staticmethod
    def stable(alpha: float) -> "Driver":
        return Driver("stable", alpha)


def is_identity(sigma: CoefficientField | None) -> bool:
    if sigma is None:
        return True
    if not sigma.constant:
        return False
    return bool(np.array_equal(sigma(0.0, np.zeros(sigma.dimension)), np.eye(sigma.dimension)))


@dataclass(frozen=True)
class SdeProblem:
    """
    dX_t = sigma(t, X_t) dW_t + b(t, X_t) dt, or dX_t = b(X_t) dt + dZ_t for a
    stable driver. diffusion = None means additive unit noise. Coefficients
    are frozen at the horizon for later times.
    """
    dimension: int
    drift: CoefficientField
    diffusion: CoefficientField | None = None
    driver: Driver = field(default_factory=Driver.brownian)
    horizon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ArgumentError(f"horizon must be finite and positive, got {self.horizon}")
        if self.drift.kind != FieldKind.VECTOR or self.drift.dimension != self.dimension:
            raise ArgumentError(f"drift must be a vector field on R^{self.dimension}")
        if self.diffusion is not None:
            if self.diffusion.kind != FieldKind.MATRIX or self.diffusion.dimension != self.dimension:
                raise ArgumentError(f"diffusion must be a matrix field on R^{self.dimension}")
        if self.driver.is_stable and not is_identity(self.diffusion):
            raise ArgumentError("a stable driver requires additive noise (identity diffusion)")

    @cached_property
    def additive(self) -> bool:
        return is_identity(self.diffusion)

    def diffusion_or_identity(self) -> CoefficientField:
        if self.diffusion is not None:
            return self.diffusion
        return identity_diffusion(self.dimension)

    def drift_at(self, t: float, X: np.ndarray) -> np.ndarray:
        return self.drift.batch(min(t, self.horizon), X)

    def noise_at(self, t: float, X: np.ndarray, dW: np.ndarray) -> np.ndarray:
        if self.additive:
            return dW
        assert self.diffusion is not None
        S = self.diffusion.batch(min(t, self.horizon), X)
        return np.einsum("nij,nj->ni", S, dW)
