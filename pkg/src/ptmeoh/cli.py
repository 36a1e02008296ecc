"""Command-line front end: ``ptmeoh validate|stats|simulate|optimize``.

Exit codes: 0 success, 1 infeasible or no result, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import ConfigError, RunConfig, parse_config
from .economics import cost_report
from .optimize import NoFeasibleDesignError, OptimizationResult, optimize_design, write_bundle
from .plant import DecisionError, PlantModel, Topology, read_schedule
from .scenario import Mode, ScenarioError, hourly_variation_stats, load_scenario

log = logging.getLogger("ptmeoh")

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 1, 2

SUMMARY_COLUMNS = (
    "topology", "RL", "c_meoh", "E_batt", "V", "N_mod", "p_pem",
    "beta_max", "h2_nom", "MeOH_y", "CAPEX_0", "OPEX_y",
)


def _fmt(value: float | None, digits: int) -> str:
    if value is None:
        return ""
    if not math.isfinite(value):
        return "inf"
    return f"{value:.{digits}f}"


def summary_row(topology: Topology, rl_percent: float, result: OptimizationResult | None) -> list[str]:
    if result is None:
        return [topology.value, f"{rl_percent:g}", "inf"] + [""] * (len(SUMMARY_COLUMNS) - 3)
    d, r = result.design, result.cost_report
    return [
        topology.value,
        f"{rl_percent:g}",
        _fmt(r.c_meoh, 6),
        _fmt(d.e_batt_nom, 3),
        _fmt(d.volume, 3),
        str(d.n_mod),
        _fmt(d.p_pem, 3),
        _fmt(d.beta_max, 4),
        _fmt(d.h2_meoh_nom, 4),
        _fmt(r.meoh_year, 3),
        _fmt(r.capex0, 3),
        _fmt(r.opex_year_total, 3),
    ]


def write_summary(rows: Sequence[Sequence[str]], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerows(rows)


def _load(config_path: str) -> RunConfig:
    return parse_config(config_path)


def cmd_validate(config_path: str, out=None) -> int:
    out = out or sys.stdout
    try:
        _load(config_path)
    except ConfigError as exc:
        for issue in exc.issues:
            print(issue, file=out)
        print(f"{len(exc.issues)} issues", file=out)
        return EXIT_CONFIG
    print("0 issues", file=out)
    return EXIT_OK


def cmd_stats(scenario_path: str, mode: str = "grid", out=None) -> int:
    out = out or sys.stdout
    try:
        stats = hourly_variation_stats(load_scenario(scenario_path, mode))
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        return EXIT_CONFIG
    print(f"mean,{stats.mean:.6f}", file=out)
    for t, f in zip(stats.thresholds, stats.fractions):
        print(f"share_le_{t * 100:g}pct,{f:.6f}", file=out)
    return EXIT_OK


def cmd_simulate(config_path: str, schedule_path: str, output: str | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = _load(config_path)
        if cfg.design is None:
            raise ConfigError(["simulate needs a [design] section"])
        schedule = read_schedule(schedule_path)
    except ConfigError as exc:
        print("\n".join(exc.issues), file=out)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError, DecisionError) as exc:
        print(f"error: cannot read schedule: {exc}", file=out)
        return EXIT_CONFIG
    if len(schedule) != cfg.scenario.steps:
        print(f"error: schedule has {len(schedule)} rows, scenario has {cfg.scenario.steps} hours", file=out)
        return EXIT_CONFIG
    flex = cfg.flex_policies[0]
    model = PlantModel(cfg.design, cfg.scenario.mode, cfg.params)
    traj = model.simulate(cfg.scenario, schedule, flex)
    dest = Path(output) if output else cfg.output
    dest.mkdir(parents=True, exist_ok=True)
    traj.to_csv(dest / "trajectory.csv")
    report = cost_report(cfg.design, traj, cfg.scenario, cfg.econ, cfg.params, check=False)
    report.to_csv(dest / "costs.csv")
    if traj.feasible:
        print(f"feasible: {traj.steps} hours, c_meoh = {report.c_meoh:.4f} EUR/kg", file=out)
        return EXIT_OK
    print(f"infeasible: {len(traj.violations)} violations", file=out)
    for v in traj.violations[:20]:
        print(f"  hour {v.hour}: {v.kind.value} {v.detail}", file=out)
    return EXIT_INFEASIBLE


def cmd_optimize(config_path: str, output: str | None = None, out=None, seed: int | None = None) -> int:
    out = out or sys.stdout
    try:
        cfg = _load(config_path)
    except ConfigError as exc:
        print("\n".join(exc.issues), file=out)
        return EXIT_CONFIG
    if seed is not None:
        cfg.search = replace(cfg.search, seed=seed, schedule=replace(cfg.search.schedule, seed=seed))
    dest = Path(output) if output else cfg.output
    dest.mkdir(parents=True, exist_ok=True)
    topologies = cfg.topologies
    if cfg.scenario.mode is Mode.STANDALONE:
        topologies = (Topology.BOTH,)
    rows, found = [], 0
    # runs are executed one after another; each writes to its own directory
    for topo in topologies:
        for rl, flex in zip(cfg.rl_percent, cfg.flex_policies):
            log.info("optimizing %s %s", topo.value, flex.label())
            try:
                res = optimize_design(cfg.scenario, cfg.search, flex, cfg.econ, cfg.params, topology=topo)
            except NoFeasibleDesignError as exc:
                print(f"{topo.value} {flex.label()}: {exc}", file=out)
                rows.append(summary_row(topo, rl, None))
                continue
            found += 1
            write_bundle(res, dest / f"{topo.value}_{flex.label()}")
            rows.append(summary_row(topo, rl, res))
            print(f"{topo.value} {flex.label()}: c_meoh = {res.c_meoh:.4f} EUR/kg", file=out)
    write_summary(rows, dest / "summary.csv")
    print(f"summary written to {dest / 'summary.csv'}", file=out)
    return EXIT_OK if found else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptmeoh", description="Power-to-methanol design and dispatch toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("config")

    p = sub.add_parser("stats", help="hour-to-hour variation statistics of a scenario file")
    p.add_argument("scenario")
    p.add_argument("--mode", default="grid", choices=["grid", "standalone"])

    p = sub.add_parser("simulate", help="replay a schedule for the configured design")
    p.add_argument("config")
    p.add_argument("schedule")
    p.add_argument("-o", "--output")

    p = sub.add_parser("optimize", help="design search for every (topology, RL) combination")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int, help="override the configured seed")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "validate":
        return cmd_validate(args.config)
    if args.command == "stats":
        return cmd_stats(args.scenario, args.mode)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.schedule, args.output)
    return cmd_optimize(args.config, args.output, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
