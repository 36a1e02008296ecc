"""Test helpers: small designs and random schedules that respect every plant constraint."""

from __future__ import annotations

import numpy as np

from ptmeoh.plant import FlexPolicy, PlantDesign, PlantModel, ScheduleDecision, Topology
from ptmeoh.scenario import Mode, Scenario
from ptmeoh.units import power_for_h2


def small_design(topology: str, n_mod: int = 10, p_pem: float = 30.0, **kw) -> PlantDesign:
    topo = Topology.parse(topology)
    if topo.has_vessel:
        kw.setdefault("beta_max", 3.5)
        kw.setdefault("h2_meoh_nom", 0.4)
        kw.setdefault("volume", 1000.0)
    if topo.has_battery:
        kw.setdefault("e_batt_nom", 20.0)
    return PlantDesign.create(topo, n_mod, p_pem, **kw)


def random_design(rng: np.random.Generator, topology: Topology) -> PlantDesign:
    n_mod = int(rng.integers(10, 41))
    p_pem = float(rng.uniform(22.0, 40.0))
    kw = {}
    if topology.has_vessel:
        kw["beta_max"] = float(rng.uniform(max(1.88, 76.0 / p_pem), 3.5))
        kw["volume"] = float(rng.uniform(25.0, 2000.0))
        kw["h2_meoh_nom"] = float(rng.uniform(0.4, 2.0))
    if topology.has_battery:
        kw["e_batt_nom"] = float(rng.uniform(5.0, 400.0))
    return PlantDesign.create(topology, n_mod, p_pem, **kw)


def _battery_action(rng, model: PlantModel, energy: float, pem: float):
    """Random admissible (charge, to_pem, to_grid) for the current battery energy."""
    bp = model.params.battery
    cap, lo = model.batt_cap, bp.min_flow
    kept = energy * (1.0 - bp.r_self_disch_hourly)
    choice = rng.integers(3)
    if choice == 1:
        room = (model.e_nom - kept) / bp.eta_ch
        hi = min(cap, room)
        if hi >= lo:
            return float(rng.uniform(lo, hi)), 0.0, 0.0
    elif choice == 2:
        budget = (kept - model.soc_floor) * bp.eta_disch  # DC energy available above the floor
        to_pem = 0.0
        if pem >= lo and min(cap, budget) >= lo and rng.random() < 0.5:
            to_pem = float(rng.uniform(lo, min(cap, budget, pem)))
        rest = (budget - to_pem) * bp.eta_dc_ac
        to_grid = 0.0
        if min(cap, rest) >= lo and rng.random() < 0.7:
            to_grid = float(rng.uniform(lo, min(cap, rest)))
        if to_pem or to_grid:
            return 0.0, to_pem, to_grid
    return 0.0, 0.0, 0.0


def random_feasible_schedule(
    rng: np.random.Generator,
    model: PlantModel,
    scenario: Scenario,
    flex: FlexPolicy,
    tries: int = 50,
) -> list[ScheduleDecision] | None:
    """Build a random schedule hour by hour; None if the random walk gets stuck."""
    design = model.design
    nom = design.h2_meoh_nom
    el = model.params.electrolyzer
    state = model.initial_state()
    out = []
    prev = None
    for t, value in enumerate(scenario.values):
        for _ in range(tries):
            # hydrogen path
            if flex.rl is None:
                draw = nom
            else:
                lo = model.h2_meoh_min if prev is None else max(model.h2_meoh_min, prev - flex.rl * nom)
                hi = nom if prev is None else min(nom, prev + flex.rl * nom)
                draw = float(rng.uniform(lo, hi))
            if model.has_vessel:
                mass = state.vessel_mass
                h_lo = max(model.compressor_flow_min, draw - mass / 1000.0)
                h_hi = min(model.h2_max, draw + (model.vessel_capacity - mass) / 1000.0)
                options = []
                if h_lo <= h_hi:
                    options.append(float(rng.uniform(h_lo, h_hi)))
                if mass >= draw * 1000.0:
                    options.append(0.0)
                if not options:
                    continue
                h2 = options[rng.integers(len(options))]
            else:
                h2 = draw if flex.rl is None else float(rng.uniform(model.compressor_flow_min, model.h2_max))
                if flex.rl is not None:
                    if h2 < model.h2_meoh_min or h2 > nom:
                        continue
                    if prev is not None and abs(h2 - prev) > flex.rl * nom:
                        continue
                draw = h2
            pem = power_for_h2(h2, design.n_mod, design.p_pem, el) if h2 > 0 else 0.0
            b_in = b_pem = b_grid = 0.0
            if model.has_battery:
                b_in, b_pem, b_grid = _battery_action(rng, model, state.battery_energy, pem)
            d = ScheduleDecision(
                p_grid_to_pem=pem - b_pem,
                x_pem_on=pem > 0,
                p_batt_in=b_in,
                x_batt_in=b_in > 0,
                p_batt_to_pem=b_pem,
                p_batt_to_grid=b_grid,
                x_batt_out=(b_pem + b_grid) > 0,
                h2_to_meoh=draw,
            )
            new_state, rec = model.step(state, d, value, t)
            if rec.violations or model.cross_hour_violations(t, draw, prev, flex):
                continue
            out.append(d)
            state, prev = new_state, draw
            break
        else:
            return None
    return out


def random_scenario(rng: np.random.Generator, mode: Mode, steps: int) -> Scenario:
    if mode is Mode.GRID:
        return Scenario(mode, rng.uniform(-20.0, 300.0, size=steps).tolist())
    # plenty of renewable power so random schedules stay balanced
    return Scenario(mode, rng.uniform(400.0, 600.0, size=steps).tolist())
