"""
Exception hierarchy shared by every subpackage.
"""
from typing import Any


class HarnackLabError(Exception):
    pass


class ArgumentError(HarnackLabError, ValueError):
    pass


class EvaluationError(HarnackLabError):
    probe: Any

    def __init__(self, message: str, probe: Any = None):
        super().__init__(message if probe is None else f"{message} at probe {probe!r}")
        self.probe = probe


class SingularityError(HarnackLabError):
    location: Any

    def __init__(self, message: str, location: Any = None):
        super().__init__(message if location is None else f"{message} at {location!r}")
        self.location = location


class SimulationError(HarnackLabError):
    failure_fraction: float

    def __init__(self, message: str, failure_fraction: float):
        super().__init__(f"{message} (failure fraction {failure_fraction:.4f})")
        self.failure_fraction = failure_fraction


class PreconditionError(HarnackLabError):
    pass


class ConvergenceError(HarnackLabError):
    pass


class DomainError(HarnackLabError):
    pass


class TransformError(HarnackLabError):
    achieved: float

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(f"{message} (best gradient bound {achieved:.6g})")
        self.achieved = achieved


class InversionError(HarnackLabError):
    pass


class ConsistencyError(HarnackLabError):
    pass


class IntegrandError(HarnackLabError):
    pass


class DegenerateError(HarnackLabError):
    pass


class ConfigurationError(HarnackLabError):
    pass
