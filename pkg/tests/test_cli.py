import asyncio
import dataclasses
import json
from pathlib import Path

import pandas as pd
import pytest

from harnack_lab import __version__
from harnack_lab.cli import ExperimentKind, execute_scenario, exit_status, load_config, run_experiment, run_scenarios
from harnack_lab.cli import experiments
from harnack_lab.cli.main import main
from harnack_lab.errors import ConfigurationError
from harnack_lab.harnack import Statement
from harnack_lab.sde_sim import WeakOrderReport
from harnack_lab.semigroup import MollificationReport

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

FOOTNOTE = """
[[scenarios]]
name = "footnote-matrix"
kind = "condition-check"

[scenarios.problem]
dimension = 2
drift = { preset = "zero" }
diffusion = { preset = "footnote-matrix" }
"""

DRIFT_LOG_WITHOUT_TERM = """
[[scenarios]]
name = "zero-constant"
kind = "harnack-verify"

[scenarios.problem]
dimension = 1
drift = { preset = "zero" }

[scenarios.knobs]
statement = "thm1.1-log"
count = 20000
dt = 1.0
C = 0.0
delta = 1.0
xs = [[0.0]]
ys = [[1.0]]
times = [1.0]
f = { name = "truncated-exp", params = { rate = 1.0 } }
"""

SPLIT_CHECK = """
[[scenarios]]
name = "heat-split"
kind = "harnack-verify"

[scenarios.problem]
dimension = 1
drift = { preset = "zero" }

[scenarios.knobs]
statement = "thm1.1-log"
count = 4096
dt = 0.25
C = 2.0
delta = 1.0
T0 = 0.5
split = true
xs = [[0.0]]
ys = [[0.5]]
times = [1.0]
f = { name = "truncated-exp", params = { rate = 1.0 } }
"""

MISSING_FUNCTION = """
[[scenarios]]
name = "no-function"
kind = "harnack-verify"

[scenarios.problem]
dimension = 1
drift = { preset = "zero" }

[scenarios.knobs]
statement = "wang-log"
xs = [[0.0]]
ys = [[1.0]]
times = [1.0]
"""


@pytest.fixture(autouse=True)
def single_job(monkeypatch):
    monkeypatch.delenv("HARNACK_LAB_JOBS", raising=False)


def write(tmp_path, text: str, name: str = "scenarios.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_config(tmp_path):
    config = load_config(write(tmp_path, FOOTNOTE))
    assert len(config.scenarios) == 1
    scenario = config.scenarios[0]
    assert scenario.kind == ExperimentKind.CONDITION_CHECK
    assert scenario.knobs.count == 10000
    assert scenario.output.directory == "out"


def test_bad_configuration(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(write(tmp_path, "[[scenarios]\nname = 1"))
    with pytest.raises(ConfigurationError):
        load_config(write(tmp_path, FOOTNOTE.replace('"zero"', '"no-such-drift"')))
    with pytest.raises(ConfigurationError):
        load_config(write(tmp_path, FOOTNOTE.replace("condition-check", "dance")))
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.toml")


def test_empty_file_is_a_usage_error(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, ""))]) == 2
    assert "no scenarios" in capsys.readouterr().err
    assert main(["run"]) == 2


def test_version_and_presets(capsys):
    assert main(["version"]) == 0
    assert __version__ in capsys.readouterr().out
    assert main(["list-presets", "--json"]) == 0
    names = {entry["name"] for entry in json.loads(capsys.readouterr().out)}
    assert {"footnote-matrix", "ou-drift", "truncated-exp", "sine"} <= names


def test_condition_check_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert main(["-q", "run", str(write(tmp_path, FOOTNOTE)), "--out-dir", str(out)]) == 0
    report = json.loads((out / "footnote-matrix.json").read_text())
    assert report["witness"]["violated"] is True
    assert report["witness"]["surrogate_violated"] is False
    assert report["singular_at"] is not None
    assert (out / "footnote-matrix.probes.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_status"] == 0
    assert summary["outcomes"][0]["status"] == "ok"


def test_violated_verdict_exits_with_one(tmp_path):
    out = tmp_path / "out"
    # without the additive term E log f(X(y)) exceeds log E f(X(x)) for y > x
    assert main(["-q", "run", "--config", str(write(tmp_path, DRIFT_LOG_WITHOUT_TERM)), "--out-dir", str(out)]) == 1
    lines = (out / "zero-constant.instances.csv").read_text().splitlines()
    assert lines[0].startswith("statement,")
    assert lines[1].startswith("thm1.1-log,")
    assert "VIOLATED" in lines[1]


def test_failing_scenario_is_reported_not_raised(tmp_path):
    config = load_config(write(tmp_path, MISSING_FUNCTION))
    outcome = execute_scenario(config.scenarios[0], out_dir=str(tmp_path))
    assert outcome.status == "error"
    assert "ConfigurationError" in outcome.error
    assert exit_status([outcome]) == 1


def test_run_scenarios_keeps_order_and_overrides_seed(tmp_path):
    config = load_config(write(tmp_path, FOOTNOTE + FOOTNOTE.replace('name = "footnote-matrix"', 'name = "again"')))
    outcomes = asyncio.run(run_scenarios(config.scenarios, 1, str(tmp_path), seed=3))
    assert [o.name for o in outcomes] == ["footnote-matrix", "again"]
    assert exit_status(outcomes) == 0
    first = json.loads((tmp_path / "footnote-matrix.json").read_text())
    second = json.loads((tmp_path / "again.json").read_text())
    assert first["witness"] == second["witness"]


def test_statement_ids_load_from_toml(tmp_path):
    scenario = load_config(write(tmp_path, DRIFT_LOG_WITHOUT_TERM)).scenarios[0]
    assert Statement(scenario.knobs.statement) == Statement.DRIFT_LOG
    assert [str(s) for s in Statement] == ["thm1.1-log", "prop2.1-log", "thm1.2-log", "thm1.2-power", "wang-log",
                                          "wang-power", "stable-harnack"]


def test_shipped_heat_scenario_exits_cleanly(tmp_path):
    out = tmp_path / "out"
    assert main(["-q", "run", str(SCENARIOS / "heat_log_harnack.toml"), "--out-dir", str(out)]) == 0
    table = pd.read_csv(out / "heat-log-harnack.instances.csv")
    assert set(table["statement"]) == {"wang-log"}
    assert "VIOLATED" not in set(table["verdict"])
    assert "HOLDS" in set(table["verdict"])


@pytest.mark.parametrize("name", ["transformed-log-holder-bump", "transformed-power-holder-bump", "wang-power-ou"])
def test_shipped_explicit_constant_scenarios_are_not_violated(name):
    scenarios = {s.name: s for s in load_config(SCENARIOS / "transformed_harnack.toml").scenarios}
    scenario = scenarios[name]
    scenario.knobs.count = 4000
    result = run_experiment(scenario)
    assert result.report.counts["VIOLATED"] == 0
    assert not result.violated
    assert "VIOLATED" not in set(result.frames["instances"]["alternative_verdict"].dropna())


def test_disagreeing_split_fails_the_scenario(tmp_path, monkeypatch):
    scenario = load_config(write(tmp_path, SPLIT_CHECK)).scenarios[0]
    result = run_experiment(scenario)
    assert len(result.report.splits) == 1
    assert result.report.splits[0].agree
    assert not result.violated

    split = experiments.verify_log_harnack_split
    monkeypatch.setattr(experiments, "verify_log_harnack_split",
                        lambda *args, **kwargs: dataclasses.replace(split(*args, **kwargs), agree=False))
    result = run_experiment(scenario)
    assert result.violated
    assert "splits agreeing 0/1" in result.summary


def test_failed_diagnostics_fail_the_scenario(tmp_path, monkeypatch):
    scenarios = {s.name: s for s in load_config(SCENARIOS / "diagnostics.toml").scenarios}
    monkeypatch.setattr(experiments, "mollification_convergence",
                        lambda *args, **kwargs: MollificationReport([2, 4], [0.1, 0.3], [0.01, 0.0], 4, False))
    monkeypatch.setattr(experiments, "weak_order_check",
                        lambda *args, **kwargs: WeakOrderReport([0.125, 0.0625], [1.0, 1.2], [0.2], [0.01], [], False))
    assert run_experiment(scenarios["holder-sign-mollification"]).violated
    assert run_experiment(scenarios["ou-weak-order"]).violated
    outcome = execute_scenario(scenarios["ou-weak-order"], out_dir=str(tmp_path))
    assert outcome.status == "ok"
    assert exit_status([outcome]) == 1
