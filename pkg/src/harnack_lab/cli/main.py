"""
harnack-lab command line: run, list-presets, fit-constant, version.

Exit status: 0 when every scenario ran and none produced a VIOLATED verdict,
1 on a runtime error or a VIOLATED verdict, 2 when the configuration is unusable.
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

from serde.json import to_json

from harnack_lab import __version__
from harnack_lab.errors import ArgumentError, ConfigurationError, HarnackLabError
from harnack_lab.fields.presets import PRESETS
from harnack_lab.harnack import Statement, fit_empirical_constant, fit_stable_constant
from harnack_lab.semigroup.test_functions import TEST_FUNCTIONS

from .config import ExperimentKind, LabConfig, load_config
from .experiments import output_directory, resolve_constants, sweep_instances
from .runner import RunSummary, atomic_write, default_jobs, exit_status, run_scenarios

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
FITTABLE = (Statement.DRIFT_LOG, Statement.DRIFTLESS_LOG, Statement.STABLE_HARNACK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harnack-lab", description=__doc__.splitlines()[1])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p: argparse.ArgumentParser):
        p.add_argument("config_path", nargs="?", help="scenario file (TOML)")
        p.add_argument("--config", dest="config_flag", help="scenario file (TOML)")
        p.add_argument("--seed", type=int, help="override every scenario seed")
        p.add_argument("--out-dir", help="override every scenario output directory")

    run = sub.add_parser("run", help="run every scenario of a file")
    scenario_args(run)
    run.add_argument("--jobs", type=int, default=None, help="worker processes (default $HARNACK_LAB_JOBS or 1)")
    run.add_argument("--json", action="store_true", help="print the run summary as JSON")

    presets = sub.add_parser("list-presets", help="list coefficient presets and test functions")
    presets.add_argument("--json", action="store_true", help="machine-readable output")

    fit = sub.add_parser("fit-constant", help="fit the non-explicit constant of harnack-verify scenarios")
    scenario_args(fit)
    fit.add_argument("--scenario", help="only this scenario")
    fit.add_argument("--json", action="store_true", help="print the fitted constants as JSON")

    sub.add_parser("version", help="print the version")
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def _load(args: argparse.Namespace) -> LabConfig:
    path = args.config_flag or args.config_path
    if path is None:
        raise ConfigurationError("no scenario file given (positional or --config)")
    config = load_config(path)
    if not config.scenarios:
        raise ConfigurationError("no scenarios")
    return config


def list_presets(as_json: bool = False) -> str:
    entries = [PRESETS[name].schema() for name in sorted(PRESETS)]
    entries += [TEST_FUNCTIONS[name].schema() for name in sorted(TEST_FUNCTIONS)]
    if as_json:
        return json.dumps(entries, indent=2, sort_keys=True)
    lines = [f"{'name':<18} {'kind':<14} {'params':<44} description"]
    for e in entries:
        params = ", ".join(f"{k}={v:g}" for k, v in sorted(e["params"].items()))
        if e["values"]:
            params = f"{params}, values=[..]" if params else "values=[..]"
        lines.append(f"{e['name']:<18} {e['kind']:<14} {params:<44} {e['description']}")
    return "\n".join(lines)


def command_run(args: argparse.Namespace) -> int:
    config = _load(args)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise ArgumentError(f"--jobs must be positive, got {jobs}")
    outcomes = asyncio.run(run_scenarios(config.scenarios, jobs, args.out_dir, args.seed))
    status = exit_status(outcomes)
    summary = RunSummary(outcomes, status)
    if args.out_dir is not None:
        atomic_write(Path(args.out_dir) / "summary.json", to_json(summary))
    if args.json:
        print(to_json(summary))
    else:
        for o in outcomes:
            state = "VIOLATED" if o.violated else o.status
            detail = o.error if o.error else o.summary
            print(f"{o.name:<32} {o.kind:<22} {state:<9} {o.elapsed:7.1f}s {o.memory_mb:7.1f}MB  {detail}")
    return status


def command_fit(args: argparse.Namespace) -> int:
    config = _load(args)
    fitted = []
    for scenario in config.scenarios:
        if args.scenario is not None and scenario.name != args.scenario:
            continue
        if scenario.kind != ExperimentKind.HARNACK_VERIFY or Statement(scenario.knobs.statement) not in FITTABLE:
            continue
        if args.seed is not None:
            scenario.knobs.seed = args.seed
        problem = scenario.problem.build()
        statement = Statement(scenario.knobs.statement)
        sweep = sweep_instances(scenario)
        knobs = scenario.knobs
        if statement == Statement.STABLE_HARNACK:
            constant = fit_stable_constant(problem, sweep, knobs.count, knobs.seed, knobs.dt)
        else:
            constants, _ = resolve_constants(scenario, statement, problem)
            constant = fit_empirical_constant(statement, problem, sweep, constants.delta, knobs.count, knobs.seed,
                                              knobs.dt)
        path = output_directory(scenario, args.out_dir) / f"{scenario.name}.constant.json"
        atomic_write(path, to_json(constant))
        fitted.append(constant)
        if not args.json:
            print(f"{scenario.name}: {statement} C = {constant.value:.6g} "
                  f"(2N: {constant.value_doubled:.6g}, stable={constant.stable}) -> {path}")
    if not fitted:
        raise ConfigurationError("no harnack-verify scenario with a fittable statement")
    if args.json:
        print(to_json(fitted))
    return EXIT_OK if all(c.stable for c in fitted) else EXIT_FAILURE


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args)
    try:
        match args.command:
            case "version":
                print(f"harnack-lab {__version__}")
                return EXIT_OK
            case "list-presets":
                print(list_presets(args.json))
                return EXIT_OK
            case "run":
                return command_run(args)
            case "fit-constant":
                return command_fit(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ArgumentError as e:
        print(f"argument error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HarnackLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
