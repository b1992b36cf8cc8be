"""
Scenario files. One TOML file holds any number of [[scenarios]] tables:

    [[scenarios]]
    name = "heat-log-harnack"
    kind = "harnack-verify"

    [scenarios.problem]
    dimension = 1
    drift = { preset = "zero" }

    [scenarios.knobs]
    statement = "wang-log"
    count = 100000
    xs = [[0.0]]
    ys = [[1.0]]
    times = [1.0]
    f = { name = "truncated-exp", params = { rate = 1.0 } }
"""
import tomllib
from dataclasses import field
from enum import StrEnum
from pathlib import Path

from serde import SerdeError, serde
from serde.toml import from_toml

from harnack_lab.errors import ConfigurationError, HarnackLabError
from harnack_lab.fields.coefficient_field import FieldKind, identity_diffusion
from harnack_lab.fields.presets import FieldSpec, build_field
from harnack_lab.harnack.report import Statement
from harnack_lab.pde.grid import SpaceTimeGrid
from harnack_lab.sde_sim.problem import Driver, SdeProblem
from harnack_lab.semigroup.test_functions import TestFunctionSpec, build_test_function


class ExperimentKind(StrEnum):
    CONDITION_CHECK = "condition-check"
    TRANSFORM_BUILD = "transform-build"
    HARNACK_VERIFY = "harnack-verify"
    KERNEL_BOUNDS = "kernel-bounds"
    COUPLING = "coupling"
    GRADIENT_ESTIMATE = "gradient-estimate"
    INTERPOLATION_IDENTITY = "interpolation-identity"
    MOLLIFICATION = "mollification"
    PUSHFORWARD = "pushforward"
    WEAK_ORDER = "weak-order"


@serde
class ProblemSpec:
    dimension: int
    drift: FieldSpec
    diffusion: FieldSpec | None = None
    driver: Driver = field(default_factory=Driver.brownian)
    horizon: float = 1.0

    def build(self) -> SdeProblem:
        drift = build_field(self.drift, self.dimension, FieldKind.VECTOR)
        diffusion = None if self.diffusion is None else build_field(self.diffusion, self.dimension,
                                                                    FieldKind.MATRIX)
        return SdeProblem(self.dimension, drift, diffusion, self.driver, self.horizon)

    def sigma(self):
        if self.diffusion is None:
            return identity_diffusion(self.dimension)
        return build_field(self.diffusion, self.dimension, FieldKind.MATRIX)


@serde
class Knobs:
    count: int = 10000
    seed: int = 1
    dt: float | None = None
    # harnack-verify, kernel-bounds, coupling, gradient-estimate
    statement: str | None = None
    xs: list[list[float]] = field(default_factory=list)
    ys: list[list[float]] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    p: list[float] = field(default_factory=list)
    f: TestFunctionSpec | None = None
    # constants given outright; unset ones are derived or loaded from constant_file
    K: float | None = None
    kappa: float | None = None
    delta: float | None = None
    C: float | None = None
    constant_file: str | None = None
    # transform-build, pushforward, transformed statements
    transform: str = "ito-tanaka"
    grid: SpaceTimeGrid | None = None
    schedule: list[float] = field(default_factory=list)
    T0: float | None = None
    check_boundary: bool = False
    probes: int = 1000
    probe_file: str | None = None
    # interpolation-identity and the splitting diagnostic
    s: float = 0.0
    u: float | None = None
    nodes: int = 5
    inner: int = 64
    split: bool = False
    # gradient-estimate, mollification
    ns: list[int] = field(default_factory=list)
    # weak-order
    refinements: int = 3


@serde
class OutputSpec:
    directory: str = "out"
    csv: bool = True
    gnuplot: bool = False


@serde
class Scenario:
    name: str
    kind: ExperimentKind
    problem: ProblemSpec
    knobs: Knobs = field(default_factory=Knobs)
    output: OutputSpec = field(default_factory=OutputSpec)

    def test_function(self):
        if self.knobs.f is None:
            raise ConfigurationError(f"scenario {self.name!r} needs a test function (knobs.f)")
        return build_test_function(self.knobs.f, self.problem.dimension)

    def validate(self) -> None:
        """Build everything the scenario references so bad presets fail before any run starts."""
        try:
            self.problem.build()
            if self.knobs.f is not None:
                self.test_function()
            if self.kind == ExperimentKind.HARNACK_VERIFY:
                if self.knobs.statement is None:
                    raise ConfigurationError("harnack-verify needs knobs.statement")
                Statement(self.knobs.statement)
            if self.knobs.transform not in ("zvonkin", "ito-tanaka", "none"):
                raise ConfigurationError(f"unknown transform {self.knobs.transform!r}")
        except ValueError as e:
            raise ConfigurationError(f"scenario {self.name!r}: {e}") from e
        except HarnackLabError as e:
            raise ConfigurationError(f"scenario {self.name!r}: {e}") from e


@serde
class LabConfig:
    scenarios: list[Scenario] = field(default_factory=list)


def load_config(path: Path | str) -> LabConfig:
    """Parse and validate a scenario file; every failure is a ConfigurationError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e}") from e
    try:
        tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    try:
        config = from_toml(LabConfig, text)
    except (SerdeError, TypeError, ValueError, KeyError) as e:
        raise ConfigurationError(f"{path}: {e}") from e
    for scenario in config.scenarios:
        scenario.validate()
    return config
