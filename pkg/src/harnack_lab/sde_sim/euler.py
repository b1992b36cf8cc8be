"""
Euler-Maruyama ensembles for Brownian and stable drivers.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from serde import serde

from harnack_lab.errors import ArgumentError, SimulationError
from harnack_lab.sde_sim.problem import SdeProblem
from harnack_lab.sde_sim.rng import BLOCK_SIZE, STREAM_PATHS, block_generator, blocks
from harnack_lab.sde_sim.stable import sample_stable_increment

logger = logging.getLogger(__name__)

BLOW_UP = 1e6
MAX_FAILURE_FRACTION = 0.01
TIME_TOLERANCE = 1e-9


def draw_noise(problem: SdeProblem, rng: np.random.Generator, dt: float) -> np.ndarray:
    """Driver increments for a full block; callers slice off the paths they own."""
    if problem.driver.is_stable:
        return sample_stable_increment(problem.driver.alpha, dt, rng, problem.dimension, BLOCK_SIZE)
    return np.sqrt(dt) * rng.standard_normal((BLOCK_SIZE, problem.dimension))


def euler_step(problem: SdeProblem, t: float, X: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    return X + problem.drift_at(t, X) * dt + problem.noise_at(t, X, noise)


def failed_rows(X: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return ~np.isfinite(X).all(axis=1) | (np.linalg.norm(X, axis=1) > BLOW_UP)


def step_counts(start_time: float, save_times: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative Euler step index of every save time."""
    counts = (save_times - start_time) / dt
    rounded = np.rint(counts)
    if np.any(np.abs(counts - rounded) > TIME_TOLERANCE * np.maximum(1.0, counts)):
        raise ArgumentError(f"dt={dt} does not divide the save intervals from t={start_time}")
    return rounded.astype(int)


@dataclass
class PathEnsemble:
    times: np.ndarray  # (k,)
    states: np.ndarray  # (N, k, d), surviving paths only
    dt: float
    seed: int
    path_ids: np.ndarray  # (N,) index of every surviving path
    failed: int = 0

    @property
    def count(self) -> int:
        return self.states.shape[0]

    @property
    def dimension(self) -> int:
        return self.states.shape[2]

    @property
    def failure_fraction(self) -> float:
        return self.failed / (self.failed + self.count)

    def at(self, t: float) -> np.ndarray:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=TIME_TOLERANCE * max(1.0, abs(t))))
        if hits.size == 0:
            raise ArgumentError(f"t={t} is not a save time of this ensemble")
        return self.states[:, hits[0], :]

    def to_frame(self) -> pd.DataFrame:
        n, k, d = self.states.shape
        data = {
            "path": np.repeat(self.path_ids, k),
            "time": np.tile(self.times, n),
        }
        data |= {f"x{i + 1}": self.states[:, :, i].ravel() for i in range(d)}
        return pd.DataFrame(data)

    def to_csv(self, path: Path | str):
        self.to_frame().to_csv(path, index=False)


def simulate_paths(problem: SdeProblem, x0, count: int, dt: float, save_times, seed: int,
                   start_time: float = 0.0, stream: int = STREAM_PATHS) -> PathEnsemble:
    """
    Euler-Maruyama ensemble from (start_time, x0). x0 is one point or one row per
    path. Paths leaving |x| > 1e6 or turning non-finite are dropped; more than 1%
    of them raises SimulationError.
    """
    if count < 1:
        raise ArgumentError(f"path count must be positive, got {count}")
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    d = problem.dimension
    starts = np.asarray(x0, dtype=float)
    if starts.ndim <= 1:
        starts = np.broadcast_to(starts.reshape(1, d), (count, d))
    elif starts.shape != (count, d):
        raise ArgumentError(f"initial states must have shape ({count}, {d}), got {starts.shape}")
    times = np.unique(np.atleast_1d(np.asarray(save_times, dtype=float)))
    if times[0] < start_time - TIME_TOLERANCE or times[-1] > problem.horizon + TIME_TOLERANCE:
        raise ArgumentError(f"save times must lie in [{start_time}, {problem.horizon}]")
    saves = step_counts(start_time, times, dt)
    total = int(saves[-1])

    states = np.empty((count, len(times), d))
    alive = np.ones(count, dtype=bool)
    for block, lo, hi in blocks(count):
        rng = block_generator(seed, block, stream)
        X = np.array(starts[lo:hi], dtype=float)
        ok = np.ones(hi - lo, dtype=bool)
        slot = 0
        while slot < len(saves) and saves[slot] == 0:
            states[lo:hi, slot] = X
            slot += 1
        for k in range(total):
            t = start_time + k * dt
            noise = draw_noise(problem, rng, dt)[: hi - lo]
            with np.errstate(over="ignore", invalid="ignore"):
                X = euler_step(problem, t, X, dt, noise)
            bad = failed_rows(X)
            if bad.any():
                ok &= ~bad
                X[bad] = 0.0
            while slot < len(saves) and saves[slot] == k + 1:
                states[lo:hi, slot] = X
                slot += 1
        alive[lo:hi] = ok

    failed = int(count - alive.sum())
    if failed:
        fraction = failed / count
        if fraction > MAX_FAILURE_FRACTION:
            raise SimulationError("too many paths blew up", failure_fraction=fraction)
        logger.warning("dropped %d of %d paths that left |x| <= %g", failed, count, BLOW_UP)
    return PathEnsemble(times, states[alive], dt, seed, np.flatnonzero(alive), failed)


def terminal_states(problem: SdeProblem, x0, count: int, dt: float, t: float, seed: int,
                    start_time: float = 0.0, stream: int = STREAM_PATHS) -> np.ndarray:
    if t == start_time:
        starts = np.asarray(x0, dtype=float)
        return np.array(np.broadcast_to(starts.reshape(-1, problem.dimension), (count, problem.dimension)))
    return simulate_paths(problem, x0, count, dt, [t], seed, start_time, stream).at(t)


@serde
class WeakOrderReport:
    dts: list[float]
    estimates: list[float]
    differences: list[float]
    difference_stderr: list[float]
    ratios: list[float]
    shrinking: bool


def weak_order_check(problem: SdeProblem, f: Callable[[np.ndarray], np.ndarray], x0, T: float,
                     dt: float, count: int, seed: int, refinements: int = 3) -> WeakOrderReport:
    """
    E f(X_T) at dt, dt/2, ..., dt/2^refinements, all levels driven by the same
    finest-level increments summed in groups.
    """
    if refinements < 1:
        raise ArgumentError("at least one refinement is needed")
    d = problem.dimension
    levels = refinements + 1
    fine_dt = dt / 2 ** refinements
    fine_steps = int(step_counts(0.0, np.array([T]), fine_dt)[0])
    start = np.asarray(x0, dtype=float).reshape(1, d)
    values = np.empty((levels, count))
    for block, lo, hi in blocks(count):
        rng = block_generator(seed, block)
        m = hi - lo
        X = [np.repeat(start, m, axis=0) for _ in range(levels)]
        acc = [np.zeros((m, d)) for _ in range(levels)]
        for j in range(fine_steps):
            noise = draw_noise(problem, rng, fine_dt)[:m]
            for level in range(levels):
                acc[level] += noise
                group = 2 ** (refinements - level)
                if (j + 1) % group == 0:
                    h = fine_dt * group
                    t = (j + 1 - group) * fine_dt
                    X[level] = euler_step(problem, t, X[level], h, acc[level])
                    acc[level][:] = 0.0
        for level in range(levels):
            values[level, lo:hi] = f(X[level])

    estimates = values.mean(axis=1)
    diffs = values[:-1] - values[1:]
    differences = diffs.mean(axis=1)
    stderr = diffs.std(axis=1, ddof=1) / np.sqrt(count)
    ratios = [float(differences[i] / differences[i + 1]) if differences[i + 1] != 0 else float("inf")
              for i in range(len(differences) - 1)]
    shrinking = all(
        abs(differences[i + 1]) <= abs(differences[i]) + 3.0 * np.hypot(stderr[i], stderr[i + 1])
        for i in range(len(differences) - 1)
    )
    return WeakOrderReport(
        dts=[dt / 2 ** level for level in range(levels)],
        estimates=estimates.tolist(),
        differences=differences.tolist(),
        difference_stderr=stderr.tolist(),
        ratios=ratios,
        shrinking=bool(shrinking),
    )
