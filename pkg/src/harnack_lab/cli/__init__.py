"""
Scenario files, experiment handlers and the harnack-lab command line.
"""

from .config import ExperimentKind, Knobs, LabConfig, OutputSpec, ProblemSpec, Scenario, load_config
from .experiments import HANDLERS, ExperimentResult, resolve_constants, run_experiment, sweep_instances
from .runner import RunSummary, ScenarioOutcome, execute_scenario, exit_status, run_scenarios

__all__ = [
    "ExperimentKind",
    "Knobs",
    "LabConfig",
    "OutputSpec",
    "ProblemSpec",
    "Scenario",
    "load_config",
    "HANDLERS",
    "ExperimentResult",
    "resolve_constants",
    "run_experiment",
    "sweep_instances",
    "RunSummary",
    "ScenarioOutcome",
    "execute_scenario",
    "exit_status",
    "run_scenarios",
]
