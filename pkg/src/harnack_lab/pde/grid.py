"""
Tensor space-time grids on [-L, L]^d and grid functions with multilinear
interpolation, binary and CSV export.
"""
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator
from serde import serde

from harnack_lab.errors import ArgumentError

HEADER = struct.Struct("<IIdII")


@serde
class SpaceTimeGrid:
    half_width: float
    nodes: int
    dimension: int = 1
    t_start: float = 0.0
    t_end: float = 1.0
    steps: int = 64

    def __post_init__(self):
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ArgumentError(f"nodes per axis must be odd and >= 3, got {self.nodes}")
        if self.dimension not in (1, 2):
            raise ArgumentError(f"grid solvers support d in {{1, 2}}, got {self.dimension}")
        if self.steps < 1:
            raise ArgumentError(f"time step count must be >= 1, got {self.steps}")
        if not self.half_width > 0 or not self.t_end > self.t_start:
            raise ArgumentError("grid needs L > 0 and t_end > t_start")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.nodes - 1)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.steps

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.nodes)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nodes,) * self.dimension

    @property
    def size(self) -> int:
        return self.nodes ** self.dimension

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps + 1)

    def points(self) -> np.ndarray:
        """All nodes as (M^d, d), first axis slowest."""
        mesh = np.meshgrid(*([self.axis] * self.dimension), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def with_interval(self, t_start: float, t_end: float, steps: int | None = None) -> "SpaceTimeGrid":
        return SpaceTimeGrid(self.half_width, self.nodes, self.dimension, t_start, t_end,
                             self.steps if steps is None else steps)

    def doubled(self) -> "SpaceTimeGrid":
        """Same mesh on [-2L, 2L]^d."""
        return SpaceTimeGrid(2.0 * self.half_width, 2 * self.nodes - 1, self.dimension,
                             self.t_start, self.t_end, self.steps)

    def interior(self, x: np.ndarray) -> bool:
        limit = self.half_width - self.h
        return bool(np.all(np.abs(np.asarray(x, dtype=float)) <= limit + 1e-12))


@dataclass
class GridFunction:
    """
    values has shape (n_slices, M[, M], n_components); slices sit at `times`.
    Evaluation is multilinear in space and linear in time, with points clipped
    to the box and times clamped to the covered interval.
    """
    grid: SpaceTimeGrid
    times: np.ndarray
    values: np.ndarray
    _interpolators: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        expected = (len(self.times),) + self.grid.shape
        if self.values.shape[:-1] != expected:
            raise ArgumentError(f"grid function values {self.values.shape} do not match {expected} + (components,)")
        if not np.isfinite(self.values).all():
            raise ArgumentError("grid function values must be finite")

    @property
    def components(self) -> int:
        return self.values.shape[-1]

    @cached_property
    def gradient_values(self) -> np.ndarray:
        """(n_slices, M.., comps, d) central differences, second order at edges."""
        return _spatial_gradient(self.values, self.grid)

    @cached_property
    def hessian_values(self) -> np.ndarray:
        """(n_slices, M.., comps, d, d), symmetrized."""
        g = self.gradient_values
        n, comps, d = g.shape[0], self.components, self.grid.dimension
        flat = g.reshape(g.shape[: 1 + d] + (comps * d,))
        H = _spatial_gradient(flat, self.grid).reshape(g.shape[: 1 + d] + (comps, d, d))
        return 0.5 * (H + np.swapaxes(H, -1, -2))

    def _slice_weights(self, t: float) -> tuple[int, int, float]:
        t = min(max(float(t), float(self.times[0])), float(self.times[-1]))
        if len(self.times) == 1:
            return 0, 0, 0.0
        i = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        span = self.times[i + 1] - self.times[i]
        w = 0.0 if span == 0 else (t - self.times[i]) / span
        return i, i + 1, float(w)

    def _interpolator(self, name: str, array: np.ndarray, i: int) -> RegularGridInterpolator:
        key = (name, i)
        interp = self._interpolators.get(key)
        if interp is None:
            d = self.grid.dimension
            data = array[i].reshape(self.grid.shape + (-1,))
            interp = RegularGridInterpolator((self.grid.axis,) * d, data, method="linear")
            self._interpolators[key] = interp
        return interp

    def _evaluate(self, name: str, array: np.ndarray, t: float, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.grid.dimension:
            raise ArgumentError(f"points must lie in R^{self.grid.dimension}")
        L = self.grid.half_width
        X = np.clip(X, -L, L)
        i, j, w = self._slice_weights(t)
        out = self._interpolator(name, array, i)(X)
        if w > 0:
            out = (1.0 - w) * out + w * self._interpolator(name, array, j)(X)
        return out

    def __call__(self, t: float, X: np.ndarray) -> np.ndarray:
        """(n, comps)"""
        return self._evaluate("values", self.values, t, X)

    def gradient(self, t: float, X: np.ndarray) -> np.ndarray:
        """(n, comps, d)"""
        d = self.grid.dimension
        flat = self._evaluate("gradient", self.gradient_values, t, X)
        return flat.reshape(-1, self.components, d)

    def hessian(self, t: float, X: np.ndarray) -> np.ndarray:
        """(n, comps, d, d)"""
        d = self.grid.dimension
        flat = self._evaluate("hessian", self.hessian_values, t, X)
        return flat.reshape(-1, self.components, d, d)

    def to_bytes(self) -> bytes:
        header = HEADER.pack(self.grid.dimension, self.grid.nodes, self.grid.half_width,
                             len(self.times), self.components)
        return (header + np.asarray(self.times, dtype="<f8").tobytes()
                + np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @staticmethod
    def from_bytes(data: bytes) -> "GridFunction":
        d, M, L, n_slices, comps = HEADER.unpack_from(data, 0)
        offset = HEADER.size
        times = np.frombuffer(data, dtype="<f8", count=n_slices, offset=offset).astype(float)
        offset += 8 * n_slices
        count = n_slices * M ** d * comps
        values = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(float)
        t_end = times[-1] if n_slices > 1 and times[-1] > times[0] else times[0] + 1.0
        grid = SpaceTimeGrid(L, M, d, float(times[0]), float(t_end), max(1, n_slices - 1))
        return GridFunction(grid, times, values.reshape((n_slices,) + (M,) * d + (comps,)))

    def write_binary(self, path: Path | str):
        Path(path).write_bytes(self.to_bytes())

    @staticmethod
    def read_binary(path: Path | str) -> "GridFunction":
        return GridFunction.from_bytes(Path(path).read_bytes())

    def to_frame(self) -> pd.DataFrame:
        pts = self.grid.points()
        n, size = len(self.times), pts.shape[0]
        data = {"time": np.repeat(self.times, size)}
        data |= {f"x{i + 1}": np.tile(pts[:, i], n) for i in range(self.grid.dimension)}
        flat = self.values.reshape(n * size, self.components)
        data |= {f"u{c + 1}": flat[:, c] for c in range(self.components)}
        return pd.DataFrame(data)

    def to_csv(self, path: Path | str):
        self.to_frame().to_csv(path, index=False)


def _spatial_gradient(values: np.ndarray, grid: SpaceTimeGrid) -> np.ndarray:
    d = grid.dimension
    grads = np.gradient(values, grid.h, axis=tuple(range(1, 1 + d)), edge_order=2)
    if d == 1:
        grads = [grads]
    return np.stack(grads, axis=-1)


def lipschitz_bound(values: np.ndarray, grid: SpaceTimeGrid) -> float:
    """
    Upper bound of the Jacobian's Frobenius norm for the multilinear interpolant:
    the larger of nodal central differences and per-cell maxima of edge slopes.
    """
    d, h = grid.dimension, grid.h
    nodal = _spatial_gradient(values, grid)
    nodal_sup = float(np.sqrt((nodal ** 2).sum(axis=(-2, -1))).max())
    squared = 0.0
    for j in range(d):
        slopes = np.abs(np.diff(values, axis=1 + j)) / h
        # for d = 2 every cell has two edges along axis j
        for k in range(d):
            if k != j:
                slopes = np.maximum(np.take(slopes, np.arange(slopes.shape[1 + k] - 1), axis=1 + k),
                                    np.take(slopes, np.arange(1, slopes.shape[1 + k]), axis=1 + k))
        squared = squared + (slopes ** 2).sum(axis=-1)
    cell_sup = float(np.sqrt(squared).max())
    return max(nodal_sup, cell_sup)
