"""
Monte Carlo estimates of P_t f(x) = E f(X_t(x)) and of the two-parameter
T_{s,t} f(x) = E[f(X_t) | X_s = x], with CLT confidence intervals.
"""
import logging
import math

import numpy as np
from scipy.stats import norm
from serde import serde

from harnack_lab.errors import ArgumentError, IntegrandError
from harnack_lab.sde_sim.euler import simulate_paths
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import STREAM_PATHS
from harnack_lab.semigroup.test_functions import TestFunction

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.99
Z_99 = 2.576
DEFAULT_STEPS_PER_HORIZON = 2048


def z_value(confidence: float) -> float:
    if confidence == DEFAULT_CONFIDENCE:
        return Z_99
    return float(norm.ppf(0.5 + confidence / 2.0))


@serde
class McEstimate:
    mean: float
    stderr: float
    count: int
    confidence: float = DEFAULT_CONFIDENCE
    half_width: float = 0.0
    kind: str = "plain"
    f: str = ""
    s: float = 0.0
    t: float = 0.0
    x: list[float] | None = None
    seed: int | None = None

    @staticmethod
    def make(mean: float, stderr: float, count: int, confidence: float = DEFAULT_CONFIDENCE,
             **labels) -> "McEstimate":
        return McEstimate(float(mean), float(stderr), int(count), confidence,
                          z_value(confidence) * float(stderr), **labels)

    @staticmethod
    def from_samples(samples: np.ndarray, confidence: float = DEFAULT_CONFIDENCE, **labels) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        if n == 0:
            raise ArgumentError("no samples")
        stderr = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return McEstimate.make(float(samples.mean()), stderr, n, confidence, **labels)

    @staticmethod
    def exact(value: float, **labels) -> "McEstimate":
        return McEstimate.make(value, 0.0, 1, **labels)

    @property
    def lower(self) -> float:
        return self.mean - self.half_width

    @property
    def upper(self) -> float:
        return self.mean + self.half_width

    @property
    def ci(self) -> tuple[float, float]:
        return self.lower, self.upper

    def log(self) -> "McEstimate":
        """log of the mean, delta-method error."""
        if self.mean <= 0:
            raise IntegrandError(f"log of a nonpositive estimate {self.mean}")
        return McEstimate.make(math.log(self.mean), self.stderr / self.mean, self.count, self.confidence,
                               kind=f"log({self.kind})", f=self.f, s=self.s, t=self.t, x=self.x, seed=self.seed)

    def power(self, p: float) -> "McEstimate":
        """mean^p, delta-method error."""
        if self.mean < 0:
            raise IntegrandError(f"power of a negative estimate {self.mean}")
        value = self.mean ** p
        stderr = p * self.mean ** (p - 1) * self.stderr if self.mean > 0 else 0.0
        return McEstimate.make(value, stderr, self.count, self.confidence,
                               kind=f"({self.kind})^{p:g}", f=self.f, s=self.s, t=self.t, x=self.x, seed=self.seed)


def resolve_dt(s: float, t: float, dt: float | None, horizon: float) -> float:
    """Largest step not above dt (default horizon/2048) that divides t - s."""
    limit = horizon / DEFAULT_STEPS_PER_HORIZON if dt is None else dt
    if not limit > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    span = t - s
    if span <= 0:
        return limit
    return span / max(1, math.ceil(span / limit - 1e-9))


def sample_terminal(problem: SdeProblem, s: float, t: float, x, count: int, seed: int,
                    dt: float | None = None, stream: int = STREAM_PATHS) -> tuple[np.ndarray, np.ndarray]:
    """X_t of `count` paths started at (s, x); returns the states and their path ids."""
    if s > t:
        raise ArgumentError(f"need s <= t, got s={s}, t={t}")
    d = problem.dimension
    starts = np.asarray(x, dtype=float)
    if s == t:
        states = np.array(np.broadcast_to(starts.reshape(-1, d), (count, d)))
        return states, np.arange(count)
    step = resolve_dt(s, t, dt, problem.horizon)
    ensemble = simulate_paths(problem, starts, count, step, [t], seed, start_time=s, stream=stream)
    return ensemble.at(t), ensemble.path_ids


def integrand(f: TestFunction, kind: str, p: float | None = None):
    """Pointwise integrand of the plain, log or power functional."""
    match kind:
        case "plain":
            return f
        case "log":
            if not f.at_least_one:
                raise ArgumentError(f"log functional needs f >= 1, {f.name} is not flagged")

            def log_f(X: np.ndarray) -> np.ndarray:
                values = f(X)
                if np.any(values < 1.0):
                    bad = int(np.argmin(values))
                    raise IntegrandError(f"{f.name} = {values[bad]:.6g} < 1 at x={np.atleast_2d(X)[bad].tolist()}")
                return np.log(values)

            return log_f
        case "power":
            if p is None or not p > 1:
                raise ArgumentError(f"power functional needs p > 1, got {p}")
            if not f.nonnegative:
                raise ArgumentError(f"power functional needs f >= 0, {f.name} is not flagged")
            return lambda X: f(X) ** p
        case _:
            raise ArgumentError(f"unknown functional kind {kind!r}")


def estimate_functional(problem: SdeProblem, kind: str, f: TestFunction, s: float, t: float, x,
                        count: int, seed: int, p: float | None = None, dt: float | None = None,
                        confidence: float = DEFAULT_CONFIDENCE, stream: int = STREAM_PATHS) -> McEstimate:
    g = integrand(f, kind, p)
    x_list = np.atleast_1d(np.asarray(x, dtype=float)).tolist()
    labels = dict(kind=kind if kind != "power" else f"power({p:g})", f=f.name, s=s, t=t, x=x_list, seed=seed)
    if f.constant:
        value = float(g(np.atleast_2d(np.asarray(x, dtype=float)))[0])
        return McEstimate.make(value, 0.0, count, confidence, **labels)
    states, _ = sample_terminal(problem, s, t, x, count, seed, dt, stream)
    return McEstimate.from_samples(g(states), confidence, **labels)
