"""Command-line interface: run one cell, sweep the grid, verify, report."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import harness, verify
from .config import SimConfig, desk_scale_config


def _load_config_file(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    if path.endswith(".json"):
        return json.loads(text)
    raise SystemExit(f"config file must be .json or .toml, got {path!r}")


def _build_scenario(args) -> harness.Scenario:
    if args.config:
        scenario = harness.scenario_from_dict(_load_config_file(args.config))
    elif args.full:
        scenario = harness.Scenario(sim=SimConfig())
    else:
        scenario = harness.desk_scenario()
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.runs is not None:
        updates["runs"] = args.runs
    if updates:
        scenario = dataclasses.replace(scenario, **updates)
    return scenario


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON or TOML scenario file")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--runs", type=int, default=None, help="Monte Carlo runs per cell")
    p.add_argument("--full", action="store_true",
                   help="reference-scale profile (32 antennas, F=2048) "
                        "instead of the desk-scale default")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_cell_flags(p: argparse.ArgumentParser):
    p.add_argument("--q", type=int, default=40, help="beacon slots")
    p.add_argument("--estimator", choices=harness.ESTIMATORS, default="antijam")
    p.add_argument("--sjr-db", type=float, default=0.0)
    p.add_argument("--jammer-mode", choices=("random", "omni", "copy_bs"),
                   default="random")
    p.add_argument("--gamma-j", type=float, default=1.0)


def cmd_run(args) -> int:
    scenario = _build_scenario(args)
    point = harness.run_cell(scenario, args.q, args.estimator, args.sjr_db,
                             args.jammer_mode, args.gamma_j, cell_index=0)
    if args.format == "csv":
        _emit(harness.points_to_csv([point]), args.out)
    else:
        doc = {"point": harness.points_to_json([point])[0],
               "bounds": harness.report_diagnostics(
                   scenario, args.q, args.sjr_db, args.jammer_mode,
                   args.gamma_j, n_runs=min(5, scenario.runs))}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    scenario = _build_scenario(args)
    points = harness.sweep(scenario, workers=args.workers)
    if args.format == "csv":
        _emit(harness.points_to_csv(points), args.out)
    else:
        _emit(json.dumps(harness.points_to_json(points), indent=2) + "\n",
              args.out)
    return 0


def cmd_verify(args) -> int:
    ok = verify.run_checks(quick=not args.thorough)
    return 0 if ok else 1


def cmd_report(args) -> int:
    scenario = _build_scenario(args)
    doc = harness.report_diagnostics(scenario, args.q, args.sjr_db,
                                     args.jammer_mode, args.gamma_j,
                                     n_runs=args.sample_runs)
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mmwba",
        description="Beam alignment under smart jamming: NNLS beam sweep, "
                    "randomized-probing countermeasure, Monte Carlo curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one Monte Carlo cell")
    _add_common(p_run)
    _add_cell_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full scenario grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run oracle and property suites")
    p_verify.add_argument("--thorough", action="store_true",
                          help="larger case counts")
    p_verify.set_defaults(func=cmd_verify)

    p_report = sub.add_parser("report", help="bounds diagnostics as JSON")
    _add_common(p_report)
    _add_cell_flags(p_report)
    p_report.add_argument("--sample-runs", type=int, default=10)
    p_report.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
