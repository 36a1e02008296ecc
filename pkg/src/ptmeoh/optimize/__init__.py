"""Scheduling at fixed design (heuristic and exhaustive oracle) and outer design search."""

from .bundle import BUNDLE_FILES, write_bundle
from .design import (
    DesignEvaluation,
    DesignSearchOptions,
    NoFeasibleDesignError,
    OptimizationResult,
    SearchLogEntry,
    TopologyOutcome,
    compare_topologies,
    design_variables,
    evaluate_design,
    optimize_design,
)
from .heuristic import schedule_heuristic
from .objective import (
    MOVE_TYPES,
    STANDALONE_CREDIT,
    EnumerationBudgetError,
    InfeasibleScheduleError,
    ScheduleOptions,
    ScheduleResult,
    schedule_objective,
    startups,
)
from .oracle import ControlGrid, enumerate_schedules, evaluate_schedule, schedule_oracle

__all__ = [
    "BUNDLE_FILES",
    "ControlGrid",
    "DesignEvaluation",
    "DesignSearchOptions",
    "EnumerationBudgetError",
    "InfeasibleScheduleError",
    "MOVE_TYPES",
    "NoFeasibleDesignError",
    "OptimizationResult",
    "STANDALONE_CREDIT",
    "ScheduleOptions",
    "ScheduleResult",
    "SearchLogEntry",
    "TopologyOutcome",
    "compare_topologies",
    "design_variables",
    "enumerate_schedules",
    "evaluate_design",
    "evaluate_schedule",
    "optimize_design",
    "schedule_heuristic",
    "schedule_objective",
    "schedule_oracle",
    "startups",
    "write_bundle",
]
