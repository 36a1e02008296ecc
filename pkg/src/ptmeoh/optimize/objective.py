"""Schedule objective shared by the exhaustive oracle and the heuristic.

J = electricity bought - electricity sold + cooling + CO2 - credit * methanol
    + startup_cost * (number of electrolyzer start-ups)

all in € over the horizon. ``credit`` (€/t methanol) turns "produce more"
into a cost term. With no explicit credit, grid runs use 0 (pure operating
cost) and stand-alone runs use a credit large enough that any extra methanol
outweighs every cost term, which reproduces the lexicographic
"maximize methanol, then minimize cost" ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..economics import EconParams
from ..plant import NO_FLEXIBILITY, FlexPolicy, HourRecord, ScheduleDecision, Trajectory
from ..scenario import Mode

STANDALONE_CREDIT = 1.0e5  # €/t; dwarfs the ~80 €/t of cooling and CO2 per tonne of methanol

MOVE_TYPES = frozenset({"level", "draw", "transfer", "battery", "ramp_shift"})


class InfeasibleScheduleError(RuntimeError):
    """No feasible schedule could be found for the design and scenario."""


class EnumerationBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScheduleOptions:
    flex: FlexPolicy = NO_FLEXIBILITY
    improvement_iters: int = 200
    neighborhood: frozenset = MOVE_TYPES
    seed: int = 0
    tolerance: float = 1e-9
    meoh_credit: float | None = None  # €/t
    startup_cost: float = 0.0  # € per electrolyzer start-up
    restarts: int = 0
    pair_candidates: int = 8

    def __post_init__(self):
        if self.improvement_iters < 0:
            raise ValueError("improvement_iters must be >= 0")
        if self.restarts < 0 or self.pair_candidates < 1:
            raise ValueError("restarts must be >= 0 and pair_candidates >= 1")
        unknown = set(self.neighborhood) - MOVE_TYPES
        if unknown:
            raise ValueError(f"unknown move types {sorted(unknown)}")
        if self.startup_cost < 0:
            raise ValueError("startup_cost must be non-negative")

    def credit(self, mode: Mode) -> float:
        if self.meoh_credit is not None:
            return self.meoh_credit
        return STANDALONE_CREDIT if mode is Mode.STANDALONE else 0.0


def hour_objective(rec: HourRecord, value: float, mode: Mode, econ: EconParams, credit: float) -> float:
    cost = econ.cooling_cost * rec.cooling + econ.co2_cost * rec.co2 - credit * rec.meoh
    if mode is Mode.GRID:
        cost += value * rec.electricity_drawn - value * econ.sell_price_factor * rec.electricity_sold
    return cost


def startups(schedule: Sequence[ScheduleDecision]) -> int:
    """Off-to-on transitions; the plant counts as running before the horizon, so hour 0 never starts up."""
    return sum(1 for a, b in zip(schedule, schedule[1:]) if b.x_pem_on and not a.x_pem_on)


def schedule_objective(
    trajectory: Trajectory,
    values: Sequence[float],
    schedule: Sequence[ScheduleDecision],
    econ: EconParams = EconParams(),
    credit: float = 0.0,
    startup_cost: float = 0.0,
) -> float:
    total = sum(hour_objective(r, v, trajectory.mode, econ, credit) for r, v in zip(trajectory.records, values))
    return total + startup_cost * startups(schedule)


@dataclass
class ScheduleResult:
    schedule: list[ScheduleDecision]
    objective: float
    trajectory: Trajectory
    credit: float
    history: list[float] = field(default_factory=list)
    evaluations: int = 0

    @property
    def meoh_total(self) -> float:
        return float(sum(r.meoh for r in self.trajectory.records))
