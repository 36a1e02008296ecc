"""Exhaustive schedule search on a discretized control grid, for tiny horizons.

Every combination of per-hour controls is explored. Partial schedules that
reach the same storage state, previous methanol feed and electrolyzer on/off
flag have identical futures, so only the best of them is kept (ties go to
the lexicographically smaller control-index vector). This is exact
enumeration with duplicate suppression; nothing is pruned except
infeasibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..economics import EconParams
from ..plant import (
    NO_FLEXIBILITY,
    FlexPolicy,
    PlantDesign,
    PlantModel,
    PlantState,
    ScheduleDecision,
)
from ..scenario import Mode, Scenario
from ..units import PlantParams
from .objective import (
    EnumerationBudgetError,
    InfeasibleScheduleError,
    ScheduleResult,
    hour_objective,
)

MAX_ORACLE_STEPS = 8
MAX_ORACLE_NODES = 10_000_000

IDLE, CHARGE, DISCHARGE = 0, 1, 2


@dataclass(frozen=True)
class ControlGrid:
    """Discrete control levels.

    PEM levels are fractions of nominal power (2 MW per module), draw levels
    fractions of the methanol plant's nominal feed. Battery moves are idle,
    full-rate charge and full-rate discharge.
    """

    pem_levels: tuple[float, ...] = (0.0, 0.25, 0.5, 1.0, 1.25)
    draw_levels: tuple[float, ...] = (0.2, 0.6, 1.0)
    battery_moves: tuple[int, ...] = (IDLE, CHARGE, DISCHARGE)

    def __post_init__(self):
        if len(self.pem_levels) > 5 or len(self.draw_levels) > 5:
            raise ValueError("at most 5 levels per control")
        if not self.pem_levels or not self.draw_levels or not self.battery_moves:
            raise ValueError("control grids must not be empty")


def _battery_charge(model: PlantModel, state: PlantState, surplus: float | None) -> float:
    bp = model.params.battery
    room = (model.e_nom - state.battery_energy * (1.0 - bp.r_self_disch_hourly)) / bp.eta_ch
    amount = min(model.batt_cap, room)
    if surplus is not None:
        amount = min(amount, surplus)
    return amount if amount >= bp.min_flow else 0.0


def _discharge_budget(model: PlantModel, state: PlantState) -> float:
    """Largest DC output that keeps the battery at or above its floor."""
    bp = model.params.battery
    return max(0.0, (state.battery_energy * (1.0 - bp.r_self_disch_hourly) - model.soc_floor) * bp.eta_disch)


def _battery_discharge(
    model: PlantModel, state: PlantState, pem: float, ac_need: float | None
) -> tuple[float, float]:
    """Full-rate discharge: electrolyzer first (DC), remainder through the inverter.

    ``ac_need`` is None in grid mode (sell everything left) or the AC deficit
    in stand-alone mode, where only the missing power is drawn.
    """
    bp = model.params.battery
    budget = _discharge_budget(model, state)
    lo = bp.min_flow
    to_pem = min(pem, model.batt_cap, budget)
    if to_pem < lo:
        to_pem = 0.0
    rest_ac = (budget - to_pem) * bp.eta_dc_ac
    if ac_need is None:
        to_grid = min(model.batt_cap, rest_ac)
    else:
        need = max(0.0, ac_need - to_pem)
        to_grid = 0.0 if need <= 0 else min(model.batt_cap, rest_ac, max(need, lo))
    if to_grid < lo:
        to_grid = 0.0
    return to_pem, to_grid


def enumerate_hour(
    model: PlantModel,
    state: PlantState,
    value: float,
    grid: ControlGrid,
    flex: FlexPolicy,
):
    """Yield ``(control_index, decision)`` for every grid point of one hour."""
    design = model.design
    p_nom = model.params.electrolyzer.p_module_nom * design.n_mod
    nom = design.h2_meoh_nom
    standalone = model.mode is Mode.STANDALONE
    mp = model.params.meoh
    aux = model.params.electrolyzer.aux_frac
    for i, frac in enumerate(grid.pem_levels):
        pem = frac * p_nom
        h2 = model.h2_from_power(pem)
        if model.has_vessel:
            draws = (nom,) if flex.rl is None else tuple(f * nom for f in grid.draw_levels)
        else:
            draws = (h2,)
        for j, draw in enumerate(draws):
            if model.has_vessel:
                mass = state.vessel_mass + (h2 - draw) * 1000.0
                beta = max((model.p_floor + mass / model.vessel_slope_v) / design.p_pem, 1.0)
            else:
                beta = model.beta_direct
            loads = pem + aux * pem + model.compressor_power(h2, beta) + mp.ref_elec * draw / mp.ref_h2
            moves = grid.battery_moves if model.has_battery else (IDLE,)
            for k in moves:
                b_in = b_pem = b_grid = 0.0
                if k == CHARGE:
                    b_in = _battery_charge(model, state, value - loads if standalone else None)
                    if b_in <= 0:
                        continue
                elif k == DISCHARGE:
                    ac_need = max(0.0, loads - value) if standalone else None
                    if standalone and ac_need <= 0:
                        continue
                    b_pem, b_grid = _battery_discharge(model, state, pem, ac_need)
                    if b_pem <= 0 and b_grid <= 0:
                        continue
                yield (i, j, k), ScheduleDecision(
                    p_grid_to_pem=pem - b_pem,
                    x_pem_on=pem > 0,
                    p_batt_in=b_in,
                    x_batt_in=b_in > 0,
                    p_batt_to_pem=b_pem,
                    p_batt_to_grid=b_grid,
                    x_batt_out=(b_pem + b_grid) > 0,
                    h2_to_meoh=draw,
                )


def _better(obj: float, ctrl: tuple, best_obj: float, best_ctrl: tuple, tol: float) -> bool:
    gap = tol * max(1.0, abs(best_obj))
    if obj < best_obj - gap:
        return True
    return obj <= best_obj + gap and ctrl < best_ctrl


def schedule_oracle(
    design: PlantDesign,
    scenario: Scenario,
    flex: FlexPolicy = NO_FLEXIBILITY,
    control_grid: ControlGrid = ControlGrid(),
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    meoh_credit: float | None = None,
    startup_cost: float = 0.0,
    max_nodes: int = MAX_ORACLE_NODES,
    tolerance: float = 1e-9,
) -> ScheduleResult:
    """Best schedule on ``control_grid``; raises if the instance is too large or infeasible."""
    from .objective import ScheduleOptions

    if scenario.steps > MAX_ORACLE_STEPS:
        raise EnumerationBudgetError(f"oracle handles at most {MAX_ORACLE_STEPS} steps, got {scenario.steps}")
    model = PlantModel(design, scenario.mode, params)
    credit = ScheduleOptions(meoh_credit=meoh_credit).credit(scenario.mode)
    # key -> (objective, control vector, state, previous draw, decisions)
    layer = {None: (0.0, (), model.initial_state(), None, ())}
    nodes = 0
    for t, value in enumerate(scenario.values):
        nxt: dict = {}
        for obj, ctrl, state, prev_draw, decisions in layer.values():
            prev_on = decisions[-1].x_pem_on if decisions else True
            for idx, d in enumerate_hour(model, state, value, control_grid, flex):
                nodes += 1
                if nodes > max_nodes:
                    raise EnumerationBudgetError(f"enumeration exceeded {max_nodes} nodes")
                new_state, rec = model.step(state, d, value, t)
                if rec.violations or model.cross_hour_violations(t, d.h2_to_meoh, prev_draw, flex):
                    continue
                o = obj + hour_objective(rec, value, scenario.mode, econ, credit)
                if d.x_pem_on and not prev_on:
                    o += startup_cost
                c = ctrl + (idx,)
                key = (
                    round(new_state.battery_energy, 9),
                    round(new_state.vessel_mass, 6),
                    round(d.h2_to_meoh, 12),
                    d.x_pem_on,
                )
                cur = nxt.get(key)
                if cur is None or _better(o, c, cur[0], cur[1], tolerance):
                    nxt[key] = (o, c, new_state, d.h2_to_meoh, decisions + (d,))
        if not nxt:
            raise InfeasibleScheduleError(f"no feasible grid schedule reaches hour {t}")
        layer = nxt
    best = None
    for entry in layer.values():
        if best is None or _better(entry[0], entry[1], best[0], best[1], tolerance):
            best = entry
    schedule = list(best[4])
    trajectory = model.simulate(scenario, schedule, flex)
    return ScheduleResult(schedule, best[0], trajectory, credit, [best[0]], nodes)


def enumerate_schedules(
    design: PlantDesign,
    scenario: Scenario,
    flex: FlexPolicy = NO_FLEXIBILITY,
    control_grid: ControlGrid = ControlGrid(),
    params: PlantParams | None = None,
):
    """Every grid schedule, feasible or not, without state merging (for checking the oracle)."""
    model = PlantModel(design, scenario.mode, params)

    def rec(t: int, state: PlantState, prefix: tuple):
        if t == scenario.steps:
            yield list(prefix)
            return
        value = scenario.values[t]
        for _, d in enumerate_hour(model, state, value, control_grid, flex):
            new_state, _ = model.step(state, d, value, t)
            yield from rec(t + 1, new_state, prefix + (d,))

    yield from rec(0, model.initial_state(), ())


def evaluate_schedule(
    design: PlantDesign,
    scenario: Scenario,
    schedule: Sequence[ScheduleDecision],
    flex: FlexPolicy = NO_FLEXIBILITY,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    credit: float = 0.0,
    startup_cost: float = 0.0,
) -> tuple[float, bool]:
    """Objective and feasibility of a schedule under the oracle's conventions."""
    from .objective import schedule_objective

    trajectory = PlantModel(design, scenario.mode, params).simulate(scenario, schedule, flex)
    obj = schedule_objective(trajectory, scenario.values, schedule, econ, credit, startup_cost)
    return obj, trajectory.feasible
