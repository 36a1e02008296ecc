"""Result bundle: one directory of CSV files per optimization run."""

from __future__ import annotations

from pathlib import Path

from ..plant import write_design, write_schedule
from .design import OptimizationResult

BUNDLE_FILES = ("design.csv", "schedule.csv", "trajectory.csv", "costs.csv", "search_log.csv")


def write_bundle(result: OptimizationResult, directory: str | Path) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_design(result.design, out / "design.csv")
    write_schedule(result.schedule, out / "schedule.csv")
    result.trajectory.to_csv(out / "trajectory.csv")
    result.cost_report.to_csv(out / "costs.csv")
    result.write_search_log(out / "search_log.csv")
    return out
