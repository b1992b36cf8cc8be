"""
Scenario orchestration: a TaskGroup hands scenarios to a process pool, every
worker writes its own artifacts atomically and reports a ScenarioOutcome.
"""
import asyncio
import dataclasses
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import pandas as pd
import psutil
from serde import serde
from serde.json import to_json

from harnack_lab.errors import HarnackLabError

from .config import Scenario
from .experiments import ExperimentResult, output_directory, run_experiment

logger = logging.getLogger(__name__)

JOBS_ENV = "HARNACK_LAB_JOBS"


@serde
class ScenarioOutcome:
    name: str
    kind: str
    status: str  # ok | error
    violated: bool
    summary: str
    artifacts: list[str]
    elapsed: float
    cpu_seconds: float
    memory_mb: float
    error: str | None = None


@serde
class RunSummary:
    outcomes: list[ScenarioOutcome]
    exit_status: int


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        logger.warning("ignoring %s=%r, not an integer", JOBS_ENV, os.environ[JOBS_ENV])
        return 1


def atomic_write(path: Path, text: str) -> None:
    """Write to a temporary file next to `path`, then rename over it."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def atomic_write_frame(path: Path, frame: pd.DataFrame) -> None:
    atomic_write(path, frame.to_csv(index=False))


def gnuplot_script(name: str, csv_name: str) -> str:
    """Plot LHS against RHS intervals over |x - y| for one instances table."""
    return "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{name}'",
        "set xlabel '|x - y|'",
        f"set output '{name}.png'",
        "set terminal pngcairo size 900,600",
        f"plot '{csv_name}' using 'distance':'lhs':'lhs_lower':'lhs_upper' with yerrorbars title 'LHS', \\",
        f"     '{csv_name}' using 'distance':'rhs':'rhs_lower':'rhs_upper' with yerrorbars title 'RHS'",
        "",
    ])


def write_artifacts(scenario: Scenario, result: ExperimentResult, directory: Path) -> list[str]:
    written = []
    report_path = directory / f"{scenario.name}.json"
    atomic_write(report_path, to_json(result.report))
    written.append(str(report_path))
    if scenario.output.csv:
        for label, frame in result.frames.items():
            path = directory / f"{scenario.name}.{label}.csv"
            atomic_write_frame(path, frame)
            written.append(str(path))
    if scenario.output.gnuplot and "instances" in result.frames:
        path = directory / f"{scenario.name}.gp"
        atomic_write(path, gnuplot_script(scenario.name, f"{scenario.name}.instances.csv"))
        written.append(str(path))
    return written


def execute_scenario(scenario: Scenario, out_dir: str | None = None, seed: int | None = None) -> ScenarioOutcome:
    """Run one scenario and write its artifacts; never raises for scenario failures."""
    if seed is not None:
        scenario = dataclasses.replace(scenario, knobs=dataclasses.replace(scenario.knobs, seed=seed))
    process = psutil.Process()
    cpu_start = sum(process.cpu_times()[:2])
    start = time.perf_counter()
    artifacts: list[str] = []
    try:
        result = run_experiment(scenario)
        artifacts = write_artifacts(scenario, result, output_directory(scenario, out_dir))
        status, violated, summary, error = "ok", result.violated, result.summary, None
    except HarnackLabError as e:
        logger.error("scenario %s failed: %s", scenario.name, e)
        status, violated, summary, error = "error", False, "", f"{type(e).__name__}: {e}"
    except Exception as e:
        logger.exception("scenario %s crashed", scenario.name)
        status, violated, summary, error = "error", False, "", f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - start
    cpu = sum(process.cpu_times()[:2]) - cpu_start
    memory = process.memory_info().rss / 1024 / 1024
    return ScenarioOutcome(scenario.name, str(scenario.kind), status, violated, summary, artifacts, elapsed, cpu,
                           memory, error)


async def run_scenarios(scenarios: list[Scenario], jobs: int = 1, out_dir: str | None = None,
                        seed: int | None = None) -> list[ScenarioOutcome]:
    """Outcomes come back in scenario order whatever the completion order."""
    loop = asyncio.get_running_loop()
    if jobs <= 1:
        return [await asyncio.to_thread(execute_scenario, s, out_dir, seed) for s in scenarios]
    with ProcessPoolExecutor(max_workers=jobs) as pool:

        async def submit(scenario: Scenario) -> ScenarioOutcome:
            return await loop.run_in_executor(pool, execute_scenario, scenario, out_dir, seed)

        async with asyncio.TaskGroup() as tg:
            tasks = [tg.create_task(submit(s)) for s in scenarios]
    return [t.result() for t in tasks]


def exit_status(outcomes: list[ScenarioOutcome]) -> int:
    if any(o.status == "error" or o.violated for o in outcomes):
        return 1
    return 0
