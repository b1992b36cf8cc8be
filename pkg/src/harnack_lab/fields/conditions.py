"""
Probe-based checks of the structural conditions on coefficients: ellipticity,
Hoelder seminorms, the inverse-diffusion bound and the carre du champ.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from serde import serde

from harnack_lab.errors import ArgumentError, EvaluationError, SingularityError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind, field_norms

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray], float]

UNIT_TOLERANCE = 1e-9
ELLIPTICITY_TOLERANCE = 1e-5
CONDITION_LIMIT = 1e12
FD_STEP = 1e-5


@dataclass(frozen=True)
class ProbeSet:
    """Probe triples (t, x, y); y is a direction or a second point depending on the check."""
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 2 or self.t.shape != (self.x.shape[0],):
            raise ArgumentError(f"inconsistent probe arrays {self.t.shape}, {self.x.shape}, {self.y.shape}")

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def dimension(self) -> int:
        return self.x.shape[1]

    @staticmethod
    def from_triples(triples) -> "ProbeSet":
        triples = list(triples)
        if not triples:
            return ProbeSet(np.zeros(0), np.zeros((0, 1)), np.zeros((0, 1)))
        t = np.array([float(tr[0]) for tr in triples])
        x = np.array([np.atleast_1d(np.asarray(tr[1], dtype=float)) for tr in triples])
        y = np.array([np.atleast_1d(np.asarray(tr[2], dtype=float)) for tr in triples])
        return ProbeSet(t, x, y)

    @staticmethod
    def angular(points: np.ndarray, resolution: float = 1e-3, t: float = 0.0) -> "ProbeSet":
        """Unit directions on the half circle (d = 2) at every point; includes both axes."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != 2:
            raise ArgumentError("angular probes are defined for d = 2")
        angles = np.arange(0.0, np.pi, resolution)
        angles = np.unique(np.concatenate([angles, [np.pi / 2]]))
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        x = np.repeat(points, len(dirs), axis=0)
        y = np.tile(dirs, (points.shape[0], 1))
        return ProbeSet(np.full(x.shape[0], t), x, y)

    @staticmethod
    def unit_directions(points: np.ndarray, count: int, seed: int = 0, t: float = 0.0) -> "ProbeSet":
        """Random unit directions at every point, plus the coordinate axes."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d = points.shape[1]
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((count, d))
        dirs = np.concatenate([np.eye(d), g / np.linalg.norm(g, axis=1, keepdims=True)])
        x = np.repeat(points, len(dirs), axis=0)
        y = np.tile(dirs, (points.shape[0], 1))
        return ProbeSet(np.full(x.shape[0], t), x, y)

    @staticmethod
    def random_pairs(dimension: int, count: int, half_width: float, seed: int = 0,
                     max_distance: float | None = None, t: float = 0.0) -> "ProbeSet":
        """Random point pairs in [-half_width, half_width]^d with x != y."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-half_width, half_width, (count, dimension))
        if max_distance is None:
            y = rng.uniform(-half_width, half_width, (count, dimension))
        else:
            step = rng.standard_normal((count, dimension))
            step *= rng.uniform(0.05, 1.0, (count, 1)) * max_distance / np.linalg.norm(step, axis=1, keepdims=True)
            y = np.clip(x + step, -half_width, half_width)
        return ProbeSet(np.full(count, t), x, y)

    def to_frame(self) -> pd.DataFrame:
        d = self.dimension
        data = {"t": self.t}
        data |= {f"x{i + 1}": self.x[:, i] for i in range(d)}
        data |= {f"y{i + 1}": self.y[:, i] for i in range(d)}
        return pd.DataFrame(data)

    def to_csv(self, path: Path | str):
        self.to_frame().to_csv(path, index=False)

    @staticmethod
    def read_csv(path: Path | str) -> "ProbeSet":
        frame = pd.read_csv(path)
        xs = sorted((c for c in frame.columns if c.startswith("x")), key=lambda c: int(c[1:]))
        ys = sorted((c for c in frame.columns if c.startswith("y")), key=lambda c: int(c[1:]))
        if "t" not in frame.columns or not xs or len(xs) != len(ys):
            raise ArgumentError(f"{path}: probe CSV needs columns t, x1..xd, y1..yd")
        return ProbeSet(frame["t"].to_numpy(float), frame[xs].to_numpy(float), frame[ys].to_numpy(float))


@serde
class EllipticityWitness:
    delta: float
    kappa_upper: float
    probe_count: int
    violated: bool
    surrogate_delta: float
    surrogate_kappa: float
    surrogate_violated: bool
    worst_point: list[float]
    worst_direction: list[float]
    tolerance: float


def evaluate_at_probes(f: CoefficientField, t: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Evaluate f at (t_i, x_i), one batch per distinct time."""
    out = np.empty((X.shape[0],) + f.value_shape)
    for tt in np.unique(t):
        mask = t == tt
        values = f.batch(float(tt), X[mask])
        finite = np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
        if not finite.all():
            bad = X[mask][np.argmin(finite)]
            raise EvaluationError(f"{f.name} is not finite at t={tt}, x={bad.tolist()}",
                                  probe=(float(tt), bad.tolist()))
        out[mask] = values
    return out


def check_nondegeneracy(sigma: CoefficientField, probes: ProbeSet,
                        tolerance: float = ELLIPTICITY_TOLERANCE) -> EllipticityWitness:
    """
    Tightest delta, K with delta|y|^2 <= |sigma^T y|^2 <= K|y|^2 over the probes,
    alongside the row-wise surrogate sum_i y_i^2 sum_k sigma_ik^2, which can stay
    positive where the matrix itself is singular.
    """
    if sigma.kind != FieldKind.MATRIX:
        raise ArgumentError(f"{sigma.name} is not a matrix field")
    if len(probes) == 0:
        raise ArgumentError("empty probe set")
    if probes.dimension != sigma.dimension:
        raise ArgumentError(f"probes live in R^{probes.dimension}, field in R^{sigma.dimension}")
    norms = np.linalg.norm(probes.y, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise ArgumentError("probe directions must be unit vectors")

    S = evaluate_at_probes(sigma, probes.t, probes.x)
    Y = probes.y
    q = (np.einsum("nji,nj->ni", S, Y) ** 2).sum(axis=1)
    surrogate = ((Y ** 2) * (S ** 2).sum(axis=2)).sum(axis=1)

    worst = int(np.argmin(q))
    witness = EllipticityWitness(
        delta=float(q[worst]),
        kappa_upper=float(q.max()),
        probe_count=len(probes),
        violated=bool(q[worst] <= tolerance),
        surrogate_delta=float(surrogate.min()),
        surrogate_kappa=float(surrogate.max()),
        surrogate_violated=bool(surrogate.min() <= tolerance),
        worst_point=probes.x[worst].tolist(),
        worst_direction=Y[worst].tolist(),
        tolerance=tolerance,
    )
    if witness.violated:
        logger.info("%s degenerate along %s at %s (|sigma^T y|^2 = %.3g)",
                    sigma.name, witness.worst_direction, witness.worst_point, witness.delta)
    return witness


def check_hoelder_seminorm(f: CoefficientField, theta: float, probes: ProbeSet) -> float:
    if not 0.0 < theta < 1.0:
        raise ArgumentError(f"theta must lie in (0, 1), got {theta}")
    if len(probes) == 0:
        raise ArgumentError("empty probe set")
    gaps = np.linalg.norm(probes.x - probes.y, axis=1)
    if np.any(gaps == 0.0):
        raise ArgumentError("probe pairs must have x != y")
    fx = evaluate_at_probes(f, probes.t, probes.x)
    fy = evaluate_at_probes(f, probes.t, probes.y)
    quotients = field_norms(fx - fy, f.kind) / gaps ** theta
    return float(quotients.max())


def check_inverse_diffusion_bound(sigma: CoefficientField, probes: ProbeSet) -> float:
    """sup over probe points (t, x) of the Hilbert-Schmidt norm of (sigma sigma^T)^-1."""
    if sigma.kind != FieldKind.MATRIX:
        raise ArgumentError(f"{sigma.name} is not a matrix field")
    if len(probes) == 0:
        raise ArgumentError("empty probe set")
    S = evaluate_at_probes(sigma, probes.t, probes.x)
    a = S @ np.swapaxes(S, 1, 2)
    cond = np.linalg.cond(a)
    bad = ~np.isfinite(cond) | (cond > CONDITION_LIMIT)
    if bad.any():
        i = int(np.argmax(bad))
        location = (float(probes.t[i]), probes.x[i].tolist())
        raise SingularityError(f"a = sigma sigma^T of {sigma.name} is singular at t={location[0]}, x={location[1]}",
                               location=location)
    inv = np.linalg.inv(a)
    return float(np.sqrt((inv ** 2).sum(axis=(1, 2))).max())


def central_gradient(f: ScalarField, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.empty(x.shape[0])
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        grad[j] = (float(f(x + e)) - float(f(x - e))) / (2.0 * step)
    return grad


def carre_du_champ(sigma: CoefficientField, f: ScalarField, g: ScalarField, t: float, x,
                   step: float = FD_STEP) -> float:
    """Gamma(t)(f, g)(x) = 1/2 <sigma^T grad f, sigma^T grad g>."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = sigma(t, x)
    gf = s.T @ central_gradient(f, x, step)
    gg = gf if g is f else s.T @ central_gradient(g, x, step)
    return 0.5 * float(gf @ gg)
