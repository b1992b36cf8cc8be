"""
Named coefficient presets selectable from scenario files.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from serde import serde

from harnack_lab.errors import ArgumentError, ConfigurationError
from harnack_lab.fields.coefficient_field import (
    CoefficientField,
    FieldKind,
    Regularity,
    constant_field,
)


@serde
class FieldSpec:
    preset: str
    params: dict[str, float] = field(default_factory=dict)
    values: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class Preset:
    name: str
    kind: FieldKind
    description: str
    defaults: dict[str, float]
    builder: Callable[[int, dict[str, float], list[float]], CoefficientField]
    uses_values: bool = False
    dimensions: tuple[int, ...] = (1, 2, 3)

    def schema(self) -> dict:
        return {
            "name": self.name,
            "kind": str(self.kind),
            "params": dict(self.defaults),
            "values": self.uses_values,
            "dimensions": list(self.dimensions),
            "description": self.description,
        }


def _direction(dimension: int, values: list[float]) -> np.ndarray:
    if not values:
        e = np.zeros(dimension)
        e[0] = 1.0
        return e
    if len(values) != dimension:
        raise ArgumentError(f"expected {dimension} values, got {len(values)}")
    return np.asarray(values, dtype=float)


def _identity(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    scale = params["scale"]
    return constant_field(scale * np.eye(d), FieldKind.MATRIX,
                          name="identity" if scale == 1.0 else f"{scale:g}*identity")


def _diag(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    if len(values) != d:
        raise ArgumentError(f"diag needs {d} values, got {len(values)}")
    return constant_field(np.diag(values), FieldKind.MATRIX, name=f"diag{tuple(values)}")


def _footnote_matrix(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    return constant_field([[1.0, -1.0], [-1.0, 1.0]], FieldKind.MATRIX, name="footnote-matrix")


def _holder_sign(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    base, jump = params["base"], params["jump"]

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        s = base + jump * np.sign(X[:, 0])
        return s[:, None, None] * np.eye(d)[None, :, :]

    return CoefficientField(d, FieldKind.MATRIX, evaluate, Regularity.bounded_measurable(),
                            name="holder-sign", sup_norm=(abs(base) + abs(jump)) * np.sqrt(d))


def _sine_diffusion(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    amplitude, frequency = params["amplitude"], params["frequency"]
    if not 0 <= amplitude < 1:
        raise ArgumentError(f"sine-diffusion amplitude must lie in [0, 1), got {amplitude}")

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        s = 1.0 + amplitude * np.sin(frequency * X[:, 0])
        return s[:, None, None] * np.eye(d)[None, :, :]

    return CoefficientField(d, FieldKind.MATRIX, evaluate, name="sine-diffusion",
                            sup_norm=(1.0 + amplitude) * np.sqrt(d))


def _zero(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    return constant_field(np.zeros(d), FieldKind.VECTOR, name="zero")


def _constant_drift(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    c = _direction(d, values) if values else np.full(d, params["c"])
    return constant_field(c, FieldKind.VECTOR, name="constant-drift")


def _ou_drift(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    k = params["k"]

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        return -k * X

    # unbounded, fine for simulation but not a PDE-grade input
    return CoefficientField(d, FieldKind.VECTOR, evaluate, name="ou-drift")


def _holder_bump(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    amplitude, width, theta = params["amplitude"], params["width"], params["theta"]
    e = _direction(d, values)

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        r2 = (X ** 2).sum(axis=1) / width ** 2
        profile = np.maximum(0.0, 1.0 - r2) ** theta
        return amplitude * profile[:, None] * e[None, :]

    return CoefficientField(d, FieldKind.VECTOR, evaluate, Regularity.hoelder(theta),
                            name="holder-bump", sup_norm=abs(amplitude) * float(np.linalg.norm(e)))


def _smooth_bump(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    amplitude, width = params["amplitude"], params["width"]
    e = _direction(d, values)

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        profile = np.exp(-(X ** 2).sum(axis=1) / (2.0 * width ** 2))
        return amplitude * profile[:, None] * e[None, :]

    return CoefficientField(d, FieldKind.VECTOR, evaluate, name="smooth-bump",
                            sup_norm=abs(amplitude) * float(np.linalg.norm(e)))


def _holder_power(d: int, params: dict[str, float], values: list[float]) -> CoefficientField:
    amplitude, exponent, radius = params["amplitude"], params["exponent"], params["radius"]

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        return amplitude * np.sign(X) * np.minimum(np.abs(X), radius) ** exponent

    return CoefficientField(d, FieldKind.VECTOR, evaluate, Regularity.hoelder(exponent),
                            name="holder-power",
                            sup_norm=abs(amplitude) * radius ** exponent * np.sqrt(d))


PRESETS: dict[str, Preset] = {p.name: p for p in [
    Preset("identity", FieldKind.MATRIX, "scale * Id", {"scale": 1.0}, _identity),
    Preset("diag", FieldKind.MATRIX, "diag(values)", {}, _diag, uses_values=True),
    Preset("footnote-matrix", FieldKind.MATRIX,
           "[[1,-1],[-1,1]]: rows nondegenerate, matrix singular", {}, _footnote_matrix,
           dimensions=(2,)),
    Preset("holder-sign", FieldKind.MATRIX, "(base + jump*sign(x1)) * Id",
           {"base": 1.0, "jump": 0.5}, _holder_sign),
    Preset("sine-diffusion", FieldKind.MATRIX, "(1 + amplitude*sin(frequency*x1)) * Id",
           {"amplitude": 0.25, "frequency": 1.0}, _sine_diffusion),
    Preset("zero", FieldKind.VECTOR, "b = 0", {}, _zero),
    Preset("constant-drift", FieldKind.VECTOR, "b = values, or c in every coordinate",
           {"c": 1.0}, _constant_drift, uses_values=True),
    Preset("ou-drift", FieldKind.VECTOR, "b(x) = -k x", {"k": 1.0}, _ou_drift),
    Preset("holder-bump", FieldKind.VECTOR,
           "amplitude * max(0, 1 - |x|^2/width^2)^theta * direction",
           {"amplitude": 1.0, "width": 1.0, "theta": 0.5}, _holder_bump, uses_values=True),
    Preset("smooth-bump", FieldKind.VECTOR,
           "amplitude * exp(-|x|^2 / (2 width^2)) * direction",
           {"amplitude": 1.0, "width": 1.0}, _smooth_bump, uses_values=True),
    Preset("holder-power", FieldKind.VECTOR,
           "amplitude * sign(x) * min(|x|, radius)^exponent, per coordinate",
           {"amplitude": 0.3, "exponent": 0.7, "radius": 1.0}, _holder_power),
]}


def build_field(spec: FieldSpec, dimension: int, expected: FieldKind | None = None) -> CoefficientField:
    preset = PRESETS.get(spec.preset)
    if preset is None:
        raise ConfigurationError(f"unknown field preset {spec.preset!r}")
    if expected is not None and preset.kind != expected:
        raise ConfigurationError(f"preset {spec.preset!r} is a {preset.kind} field, expected {expected}")
    if dimension not in preset.dimensions:
        raise ConfigurationError(f"preset {spec.preset!r} does not support d={dimension}")
    unknown = set(spec.params) - set(preset.defaults)
    if unknown:
        raise ConfigurationError(f"preset {spec.preset!r} has no parameters {sorted(unknown)}")
    params = preset.defaults | {k: float(v) for k, v in spec.params.items()}
    return preset.builder(dimension, params, list(spec.values))
