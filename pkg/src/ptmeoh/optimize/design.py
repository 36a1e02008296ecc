"""Outer design search minimizing the specific cost of methanol.

Each candidate design is scored by scheduling it with the heuristic,
replaying the schedule and costing the result. Because the specific cost is
a ratio (cost over production), the schedule is re-solved with a methanol
credit equal to the current cost estimate (Dinkelbach iteration), so the
inner problem stays a plain cost minimization.

The continuous design variables are searched with a compass (pattern)
search in coordinates normalized to [0, 1]; the module count is evaluated at
the floor and ceiling of each continuous proposal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..economics import CostReport, EconParams, cost_report
from ..plant import (
    ALL_TOPOLOGIES,
    NO_FLEXIBILITY,
    TABLE_BOUNDS,
    DesignBounds,
    FlexPolicy,
    PlantDesign,
    ScheduleDecision,
    Topology,
    Trajectory,
)
from ..scenario import Mode, Scenario
from ..units import PlantParams
from .heuristic import schedule_heuristic
from .objective import STANDALONE_CREDIT, InfeasibleScheduleError, ScheduleOptions


class NoFeasibleDesignError(RuntimeError):
    pass


# name, bounds attribute, default starting fraction
_VARIABLES = {
    "n_mod": ("n_mod", 1.0),
    "p_pem": ("p_pem", 1.0),
    "e_batt_nom": ("e_batt_nom", 0.1),
    "beta_max": ("beta_max", 0.8),
    "volume": ("volume", 0.3),
    "h2_meoh_nom": ("h2_meoh_nom", 0.6),
}


def design_variables(topology: Topology) -> tuple[str, ...]:
    names = ["n_mod", "p_pem"]
    if topology.has_battery:
        names.append("e_batt_nom")
    if topology.has_vessel:
        names += ["beta_max", "volume", "h2_meoh_nom"]
    return tuple(names)


@dataclass(frozen=True)
class DesignSearchOptions:
    bounds: DesignBounds = TABLE_BOUNDS
    multistart_count: int = 2
    pattern_step_init: float = 0.25
    shrink: float = 0.5
    min_step: float = 0.03
    max_evals: int = 60
    topology: Topology | None = None  # None enumerates all topologies
    seed: int = 0
    schedule: ScheduleOptions = ScheduleOptions(improvement_iters=25)
    polish_iters: int = 200
    dinkelbach_iters: int = 2

    def __post_init__(self):
        if not self.bounds.within(TABLE_BOUNDS):
            raise ValueError("search bounds must lie within the design table bounds")
        if self.multistart_count < 1 or self.max_evals < 1:
            raise ValueError("multistart_count and max_evals must be >= 1")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.pattern_step_init <= 0 or self.min_step <= 0:
            raise ValueError("pattern steps must be positive")
        if self.dinkelbach_iters < 0 or self.polish_iters < 0:
            raise ValueError("iteration counts must be non-negative")


@dataclass
class DesignEvaluation:
    design: PlantDesign
    c_meoh: float
    report: CostReport | None = None
    schedule: list[ScheduleDecision] | None = None
    trajectory: Trajectory | None = None
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.c_meoh)


def evaluate_design(
    design: PlantDesign,
    scenario: Scenario,
    flex: FlexPolicy = NO_FLEXIBILITY,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    options: ScheduleOptions | None = None,
    dinkelbach_iters: int = 2,
    bounds: DesignBounds = TABLE_BOUNDS,
) -> DesignEvaluation:
    """Score one design by its specific methanol cost (inf when it cannot be operated)."""
    params = params or PlantParams()
    options = replace(options or ScheduleOptions(), flex=flex)
    problems = design.issues(params, bounds)
    if problems:
        return DesignEvaluation(design, math.inf, reason="; ".join(problems))

    def solve(credit, iters):
        opts = replace(options, meoh_credit=credit, improvement_iters=iters)
        res = schedule_heuristic(design, scenario, opts, econ, params)
        rep = cost_report(design, res.trajectory, scenario, econ, params)
        return DesignEvaluation(design, rep.c_meoh, rep, res.schedule, res.trajectory)

    try:
        if options.meoh_credit is not None:
            return solve(options.meoh_credit, options.improvement_iters)
        # start from the most productive schedule, then re-price production at the running cost
        best = solve(STANDALONE_CREDIT, 0)
        for _ in range(dinkelbach_iters):
            if not math.isfinite(best.c_meoh):
                break
            cand = solve(1000.0 * best.c_meoh, options.improvement_iters)
            if cand.c_meoh < best.c_meoh - 1e-12:
                best = cand
            else:
                break
        return best
    except InfeasibleScheduleError as exc:
        return DesignEvaluation(design, math.inf, reason=str(exc))


@dataclass
class SearchLogEntry:
    index: int
    objective: float
    design: PlantDesign


@dataclass
class OptimizationResult:
    design: PlantDesign
    schedule: list[ScheduleDecision]
    trajectory: Trajectory
    cost_report: CostReport
    evals_used: int
    best_objective_history: list[float]
    search_log: list[SearchLogEntry] = field(default_factory=list)
    flex: FlexPolicy = NO_FLEXIBILITY

    @property
    def c_meoh(self) -> float:
        return self.cost_report.c_meoh

    def write_search_log(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["eval", "objective", "n_mod", "p_pem", "beta_max", "h2_meoh_nom", "e_batt_nom", "volume"])
            for e in self.search_log:
                d = e.design
                writer.writerow([
                    e.index,
                    "inf" if not math.isfinite(e.objective) else f"{e.objective:.9g}",
                    d.n_mod, f"{d.p_pem:.9g}", f"{d.beta_max:.9g}", f"{d.h2_meoh_nom:.9g}",
                    "" if d.e_batt_nom is None else f"{d.e_batt_nom:.9g}",
                    "" if d.volume is None else f"{d.volume:.9g}",
                ])


class _Search:
    """Normalized-coordinate view of the design space of one topology, with an evaluation cache."""

    def __init__(self, topology, scenario, flex, econ, params, opts: DesignSearchOptions):
        self.topology = topology
        self.scenario = scenario
        self.flex = flex
        self.econ = econ
        self.params = params
        self.opts = opts
        self.names = design_variables(topology)
        self.cache: dict[tuple, DesignEvaluation] = {}
        self.log: list[SearchLogEntry] = []
        self.history: list[float] = []
        self.best: DesignEvaluation | None = None

    @property
    def evals(self) -> int:
        return len(self.cache)

    def box(self, name):
        return getattr(self.opts.bounds, name)

    def decode(self, x: np.ndarray, n_mod: int) -> PlantDesign:
        vals = dict(zip(self.names, x))
        lo, hi = self.box("p_pem")
        p_pem = lo + vals["p_pem"] * (hi - lo)
        kw = {}
        if self.topology.has_battery:
            lo, hi = self.box("e_batt_nom")
            kw["e_batt_nom"] = lo + vals["e_batt_nom"] * (hi - lo)
        if self.topology.has_vessel:
            lo, hi = self.box("beta_max")
            # keep the storage pressure above the synthesis pressure for every coordinate value
            floor = self.params.vessel.p_floor / p_pem
            lo_eff = max(lo, floor)
            if lo_eff >= hi:
                beta = hi
            else:
                beta = lo_eff + (0.02 + 0.98 * vals["beta_max"]) * (hi - lo_eff)
                if lo == hi:
                    beta = lo
            kw["beta_max"] = beta
            lo, hi = self.box("volume")
            kw["volume"] = lo + vals["volume"] * (hi - lo)
            lo, hi = self.box("h2_meoh_nom")
            kw["h2_meoh_nom"] = lo + vals["h2_meoh_nom"] * (hi - lo)
        return PlantDesign.create(self.topology, n_mod, p_pem, params=self.params, bounds=self.opts.bounds, **kw)

    def n_mod_candidates(self, frac: float) -> list[int]:
        lo, hi = self.box("n_mod")
        value = lo + frac * (hi - lo)
        return sorted({int(math.floor(value + 1e-9)), int(math.ceil(value - 1e-9))})

    def evaluate_design(self, design: PlantDesign) -> DesignEvaluation:
        key = tuple(round(v, 9) if isinstance(v, float) else v for v in design.as_dict().values())
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        res = evaluate_design(
            design, self.scenario, self.flex, self.econ, self.params,
            self.opts.schedule, self.opts.dinkelbach_iters, self.opts.bounds,
        )
        self.cache[key] = res
        self.log.append(SearchLogEntry(len(self.cache) - 1, res.c_meoh, design))
        if self.best is None or res.c_meoh < self.best.c_meoh - 1e-12:
            self.best = res
        self.history.append(self.best.c_meoh)
        return res

    def f(self, x: np.ndarray) -> float:
        out = math.inf
        idx = self.names.index("n_mod")
        for n in self.n_mod_candidates(float(x[idx])):
            if self.evals >= self.opts.max_evals and not self._cached(x, n):
                break
            out = min(out, self.evaluate_design(self.decode(x, n)).c_meoh)
        return out

    def _cached(self, x, n) -> bool:
        d = self.decode(x, n)
        key = tuple(round(v, 9) if isinstance(v, float) else v for v in d.as_dict().values())
        return key in self.cache

    def starts(self) -> list[np.ndarray]:
        first = np.array([_VARIABLES[n][1] for n in self.names], dtype=float)
        out = [first]
        rng = np.random.default_rng(self.opts.seed)
        for _ in range(self.opts.multistart_count - 1):
            out.append(rng.uniform(0.0, 1.0, size=len(self.names)))
        return out

    def pattern_search(self, x: np.ndarray) -> None:
        fx = self.f(x)
        step = self.opts.pattern_step_init
        while step >= self.opts.min_step and self.evals < self.opts.max_evals:
            improved = False
            for i in range(len(x)):
                for sign in (1.0, -1.0):
                    y = x.copy()
                    y[i] = min(1.0, max(0.0, x[i] + sign * step))
                    if y[i] == x[i]:
                        continue
                    fy = self.f(y)
                    if fy < fx - 1e-12:
                        x, fx = y, fy
                        improved = True
                        break
                if self.evals >= self.opts.max_evals:
                    return
            if not improved:
                step *= self.opts.shrink


def optimize_design(
    scenario: Scenario,
    search: DesignSearchOptions = DesignSearchOptions(),
    flex: FlexPolicy = NO_FLEXIBILITY,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    topology: Topology | str | None = None,
) -> OptimizationResult:
    """Best design of one topology (``topology`` argument, else ``search.topology``, else both storages)."""
    params = params or PlantParams()
    topo = Topology.parse(topology or search.topology or Topology.BOTH)
    s = _Search(topo, scenario, flex, econ, params, search)
    for x0 in s.starts():
        if s.evals >= search.max_evals:
            break
        s.pattern_search(x0)
    if s.best is None or not s.best.feasible:
        reason = s.best.reason if s.best is not None else "no design evaluated"
        raise NoFeasibleDesignError(f"no feasible {topo.value} design within bounds ({reason})")
    best = s.best
    if search.polish_iters > search.schedule.improvement_iters:
        polished = evaluate_design(
            best.design, scenario, flex, econ, params,
            replace(search.schedule, improvement_iters=search.polish_iters),
            search.dinkelbach_iters, search.bounds,
        )
        if polished.c_meoh < best.c_meoh:
            best = polished
            s.history.append(best.c_meoh)
    return OptimizationResult(
        best.design, best.schedule, best.trajectory, best.report, s.evals, s.history, s.log, flex
    )


@dataclass
class TopologyOutcome:
    topology: Topology
    result: OptimizationResult | None
    error: str = ""

    @property
    def c_meoh(self) -> float:
        return self.result.c_meoh if self.result is not None else math.inf


def compare_topologies(
    scenario: Scenario,
    search: DesignSearchOptions = DesignSearchOptions(),
    flex: FlexPolicy = NO_FLEXIBILITY,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    topologies: tuple[Topology, ...] | None = None,
) -> list[TopologyOutcome]:
    """Optimize each topology and return the outcomes ranked by specific cost (best first).

    Stand-alone scenarios only admit the configuration with both storages.
    """
    if scenario.mode is Mode.STANDALONE:
        if topologies is not None and any(t is not Topology.BOTH for t in topologies):
            raise ValueError("stand-alone scenarios only support the topology with both storages")
        topologies = (Topology.BOTH,)
    elif topologies is None:
        topologies = ALL_TOPOLOGIES
    outcomes = []
    for topo in topologies:
        try:
            res = optimize_design(scenario, search, flex, econ, params, topology=topo)
            outcomes.append(TopologyOutcome(topo, res))
        except NoFeasibleDesignError as exc:
            outcomes.append(TopologyOutcome(topo, None, str(exc)))
    order = {t: i for i, t in enumerate(ALL_TOPOLOGIES)}
    outcomes.sort(key=lambda o: (o.c_meoh, order[o.topology]))
    return outcomes
