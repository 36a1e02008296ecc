"""Constructive dispatch plus local search for the hourly schedule at fixed design.

A *plan* holds, per hour, a hydrogen production target, a methanol feed
(vessel topologies) and a battery action (grid mode). Production targets may
be numbers or one of two tokens resolved against the running state:

* ``FILL``: as much as the electrolyzer, the vessel's free room and (stand-alone)
  the available power allow;
* ``NEED``: just enough to keep the vessel from running dry, off otherwise;
* ``FILL_BATT``: like ``FILL`` but the stand-alone power limit includes what
  the battery can still deliver.

Plans are turned into concrete decisions hour by hour and replayed through
:class:`PlantModel`, so every accepted schedule has passed the same checks as
:func:`ptmeoh.plant.simulate`. Infeasible neighbours are discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..economics import EconParams
from ..plant import PlantDesign, PlantModel, PlantState, ScheduleDecision
from ..scenario import Mode, Scenario
from ..units import PlantParams, power_for_h2
from .objective import InfeasibleScheduleError, ScheduleOptions, ScheduleResult, hour_objective

FILL = "fill"
NEED = "need"
FILL_BATT = "fill_batt"

IDLE, CHARGE, DISCHARGE = 0, 1, 2

_PEM_FRACTIONS = (0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0, 1.125, 1.25)
_DRAW_FRACTIONS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
_QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)
_START_COUNT = 2


@dataclass
class Plan:
    h: list  # float or token per hour
    d: list  # methanol feed per hour (vessel topologies), else None entries
    b: list  # (action, fraction) per hour

    def copy(self) -> "Plan":
        return Plan(list(self.h), list(self.d), list(self.b))


@dataclass
class _Run:
    objective: float
    states: list  # state before each hour, plus final
    cum: list  # objective accumulated before each hour
    decisions: list
    failed_at: int | None = None

    @property
    def feasible(self) -> bool:
        return self.failed_at is None


class _Evaluator:
    def __init__(self, model: PlantModel, scenario: Scenario, options: ScheduleOptions, econ: EconParams):
        self.model = model
        self.values = scenario.values
        self.T = scenario.steps
        self.flex = options.flex
        self.econ = econ
        self.credit = options.credit(scenario.mode)
        self.startup_cost = options.startup_cost
        self.standalone = scenario.mode is Mode.STANDALONE
        self.mode = scenario.mode
        d = model.design
        el = model.params.electrolyzer
        self.p_nom = el.p_module_nom * d.n_mod
        self.h_max = model.h2_max
        self.h_on_min = max(model.h2_from_power(model.pem_min), model.compressor_flow_min)
        self.cap_t = model.vessel_capacity / 1000.0
        self.mp = model.params.meoh
        self.aux = el.aux_frac
        self._power = {}
        self.evaluations = 0

    # -- physics helpers -----------------------------------------------------

    def power(self, h: float) -> float:
        if h <= 0:
            return 0.0
        p = self._power.get(h)
        if p is None:
            d = self.model.design
            p = power_for_h2(h, d.n_mod, d.p_pem, self.model.params.electrolyzer)
            self._power[h] = p
        return p

    def beta(self, mass_kg: float) -> float:
        m = self.model
        if not m.has_vessel:
            return m.beta_direct
        return max((m.p_floor + mass_kg / m.vessel_slope_v) / m.design.p_pem, 1.0)

    def loads(self, h: float, draw: float, mass_after: float) -> float:
        p = self.power(h)
        return p * (1.0 + self.aux) + self.model.compressor_power(h, self.beta(mass_after)) + self.mp.ref_elec * draw / self.mp.ref_h2

    def discharge_budget(self, state: PlantState) -> float:
        m = self.model
        if not m.has_battery:
            return 0.0
        bp = m.params.battery
        kept = state.battery_energy * (1.0 - bp.r_self_disch_hourly)
        return max(0.0, (kept - m.soc_floor) * bp.eta_disch)

    def battery_cover(self, net: float, pem: float, budget: float) -> tuple[float, float]:
        """Battery flows (to electrolyzer, through inverter) that cover a stand-alone deficit ``net``."""
        m = self.model
        bp = m.params.battery
        lo = bp.min_flow
        b_pem = min(pem, m.batt_cap, budget, max(net, lo))
        if b_pem < lo:
            b_pem = 0.0
        b_grid = 0.0
        rest = net - b_pem
        if rest > 0:
            b_grid = min(m.batt_cap, (budget - b_pem) * bp.eta_dc_ac, max(rest, lo))
            if b_grid < lo:
                b_grid = 0.0
        return b_pem, b_grid

    def power_cap(self, draw: float, mass: float, avail: float, h_hi: float, budget: float = 0.0) -> float:
        """Largest production in [h_on_min, h_hi] whose loads the renewable supply, plus
        ``budget`` of battery output, can carry (0 if none)."""
        lo, hi = self.h_on_min, h_hi
        if hi < lo:
            return 0.0

        direct = not self.model.has_vessel

        def fits(h):
            feed = h if direct else draw
            net = self.loads(h, feed, mass + (h - feed) * 1000.0) - avail
            if net <= 0:
                return True
            if budget <= 0:
                return False
            b_pem, b_grid = self.battery_cover(net, self.power(h), budget)
            return b_pem + b_grid >= net

        if not fits(lo):
            return 0.0
        if fits(hi):
            return hi
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if fits(mid):
                lo = mid
            else:
                hi = mid
        return lo

    # -- plan realization ------------------------------------------------------

    def production(self, token, draw: float, state: PlantState, value: float) -> float:
        m = self.model
        mass = state.vessel_mass
        if not isinstance(token, str):
            return token
        if m.has_vessel:
            room = (m.vessel_capacity - mass) / 1000.0 + draw
            need = draw - mass / 1000.0
        else:
            room, need = self.h_max, 0.0
        if token == FILL or token == FILL_BATT:
            h = min(self.h_max, room)
            if self.standalone:
                budget = self.discharge_budget(state) if token == FILL_BATT else 0.0
                h = self.power_cap(draw, mass, value, h, budget)
            if h >= self.h_on_min:
                return h
            token = NEED
        if need <= 1e-12:
            return 0.0
        return min(max(need, self.h_on_min), self.h_max)

    def realize(self, plan: Plan, t: int, state: PlantState) -> ScheduleDecision:
        m = self.model
        value = self.values[t]
        if m.has_vessel:
            draw = plan.d[t]
            h = self.production(plan.h[t], draw, state, value)
        else:
            h = self.production(plan.h[t], 0.0, state, value)
            draw = h
        pem = self.power(h)
        b_in = b_pem = b_grid = 0.0
        if m.has_battery:
            bp = m.params.battery
            kept = state.battery_energy * (1.0 - bp.r_self_disch_hourly)
            room = (m.e_nom - kept) / bp.eta_ch
            budget = max(0.0, (kept - m.soc_floor) * bp.eta_disch)
            lo = bp.min_flow
            if self.standalone:
                mass_after = state.vessel_mass + (h - draw) * 1000.0 if m.has_vessel else 0.0
                net = self.loads(h, draw, mass_after) - value
                if net > 0:
                    b_pem, b_grid = self.battery_cover(net, pem, budget)
                else:
                    b_in = min(-net, m.batt_cap, room)
                    if b_in < lo:
                        b_in = 0.0
            else:
                action, frac = plan.b[t]
                if action == CHARGE:
                    b_in = min(frac * m.batt_cap, room)
                    if b_in < lo:
                        b_in = 0.0
                elif action == DISCHARGE:
                    rate = frac * m.batt_cap
                    b_pem = min(pem, rate, budget)
                    if b_pem < lo:
                        b_pem = 0.0
                    b_grid = min(rate, (budget - b_pem) * bp.eta_dc_ac)
                    if b_grid < lo:
                        b_grid = 0.0
        return ScheduleDecision(
            p_grid_to_pem=pem - b_pem,
            x_pem_on=pem > 0,
            p_batt_in=b_in,
            x_batt_in=b_in > 0,
            p_batt_to_pem=b_pem,
            p_batt_to_grid=b_grid,
            x_batt_out=(b_pem + b_grid) > 0,
            h2_to_meoh=draw,
        )

    def run(self, plan: Plan, base: _Run | None = None, t0: int = 0) -> _Run:
        self.evaluations += 1
        m = self.model
        if base is None or t0 == 0:
            states = [m.initial_state()]
            cum = [0.0]
            decisions = []
            t0 = 0
        else:
            states = base.states[: t0 + 1]
            cum = base.cum[: t0 + 1]
            decisions = base.decisions[:t0]
        state = states[-1]
        prev_draw = decisions[-1].h2_to_meoh if decisions else None
        prev_on = decisions[-1].x_pem_on if decisions else True
        for t in range(t0, self.T):
            d = self.realize(plan, t, state)
            value = self.values[t]
            state, rec = m.step(state, d, value, t)
            if rec.violations or m.cross_hour_violations(t, d.h2_to_meoh, prev_draw, self.flex):
                return _Run(math.inf, states, cum, decisions, failed_at=t)
            o = cum[-1] + hour_objective(rec, value, self.mode, self.econ, self.credit)
            if d.x_pem_on and not prev_on:
                o += self.startup_cost
            states.append(state)
            cum.append(o)
            decisions.append(d)
            prev_draw, prev_on = d.h2_to_meoh, d.x_pem_on
        return _Run(cum[-1], states, cum, decisions)


# --- constructive pass --------------------------------------------------------


def _ramp_clamp(series: list[float], step: float, lo: float, hi: float) -> list[float]:
    out = []
    prev = None
    for x in series:
        x = min(max(x, lo), hi)
        if prev is not None:
            x = min(max(x, prev - step), prev + step)
        out.append(x)
        prev = x
    return out


def _attractiveness(ev: _Evaluator) -> np.ndarray:
    """Lower is a better hour to produce in: price (grid) or negated availability (stand-alone)."""
    v = np.asarray(ev.values, dtype=float)
    return -v if ev.standalone else v


def _constructive_plans(ev: _Evaluator):
    m = ev.model
    T = ev.T
    nom = m.design.h2_meoh_nom
    rl = ev.flex.rl
    score = _attractiveness(ev)
    idle = [(IDLE, 1.0)] * T
    battery_variants = [idle]
    if m.has_battery and not ev.standalone:
        lo_q, hi_q = np.quantile(score, 0.25), np.quantile(score, 0.75)
        arb = [(CHARGE, 1.0) if s <= lo_q else (DISCHARGE, 1.0) if s >= hi_q else (IDLE, 1.0) for s in score]
        battery_variants.append(arb)

    h_lo = max(ev.h_on_min, m.h2_meoh_min)
    if m.has_vessel:
        d_hi = min(nom, ev.h_max)
        if rl is None:
            draws = [nom]
        else:
            draws = sorted(
                {d_hi, 0.5 * (d_hi + m.h2_meoh_min), max(m.h2_meoh_min, min(h_lo, d_hi)), m.h2_meoh_min},
                reverse=True,
            )
        fills = (FILL, FILL_BATT) if ev.standalone and m.has_battery else (FILL,)
        for draw in draws:
            for q in _QUANTILES:
                thr = np.quantile(score, q)
                for fill in fills:
                    h = [fill if s <= thr else NEED for s in score]
                    for b in battery_variants:
                        yield Plan(list(h), [draw] * T, list(b))
            # steady operation at the feed rate
            for b in battery_variants:
                yield Plan([NEED] * T, [draw] * T, list(b))
    else:
        d_hi = ev.h_max
        if rl is None:
            for b in battery_variants:
                yield Plan([nom] * T, [None] * T, list(b))
            return
        for level in (d_hi, 0.5 * (d_hi + h_lo), h_lo):
            for b in battery_variants:
                yield Plan([level] * T, [None] * T, list(b))
        if ev.standalone:
            for fill in (FILL, FILL_BATT) if m.has_battery else (FILL,):
                yield Plan([fill] * T, [None] * T, list(idle))
        step = rl * nom
        for q in _QUANTILES:
            thr = np.quantile(score, q)
            raw = [d_hi if s <= thr else h_lo for s in score]
            h = _ramp_clamp(raw, step, h_lo, d_hi)
            for b in battery_variants:
                yield Plan(h, [None] * T, list(b))


# --- local search ---------------------------------------------------------------


def _levels(ev: _Evaluator) -> list:
    out = []
    for f in _PEM_FRACTIONS:
        h = ev.model.h2_from_power(f * ev.p_nom)
        if ev.h_on_min - 1e-12 <= h <= ev.h_max + 1e-12:
            out.append(h)
    if ev.h_on_min not in out:
        out.append(ev.h_on_min)
    return [0.0] + sorted(set(out))


_BATTERY_ACTIONS = ((IDLE, 1.0), (CHARGE, 1.0), (CHARGE, 0.5), (DISCHARGE, 1.0), (DISCHARGE, 0.5))
_FULL_ACTIONS = ((IDLE, 1.0), (CHARGE, 1.0), (DISCHARGE, 1.0))


def _moves(ev: _Evaluator, plan: Plan, options: ScheduleOptions) -> list[tuple]:
    """Neighbourhood of ``plan`` as ``(first_changed_hour, kind, *args)`` descriptors."""
    m = ev.model
    T = ev.T
    nh = options.neighborhood
    nom = m.design.h2_meoh_nom
    levels = _levels(ev)
    out = []
    if "level" in nh:
        tokens = [FILL, NEED] if m.has_vessel else ([FILL] if ev.standalone else [])
        if ev.standalone and m.has_battery:
            tokens.append(FILL_BATT)
        for t in range(T):
            for h in tokens + levels:
                if h != plan.h[t] and (m.has_vessel or h != 0.0):
                    out.append((t, "h", t, h))
            if m.has_vessel and plan.h[t] != plan.d[t]:
                out.append((t, "h", t, plan.d[t]))
    if m.has_vessel and "draw" in nh and ev.flex.rl is not None:
        draws = [f * nom for f in _DRAW_FRACTIONS]
        for t in range(T):
            for dv in draws:
                if abs(dv - plan.d[t]) > 1e-12:
                    out.append((t, "d", t, dv))
            out.append((t, "d_match", t))
    if "ramp_shift" in nh and ev.flex.rl is not None:
        step = max(ev.flex.rl * nom, 0.05 * nom)
        for t in range(T):
            for delta in (step, 0.5 * step, -step, -0.5 * step):
                out.append((t, "shift", t, delta))
    order = [int(i) for i in np.argsort(_attractiveness(ev), kind="stable")]
    k = min(options.pair_candidates, T)
    good, bad = order[:k], order[::-1][:k]
    if m.has_vessel and "transfer" in nh:
        delta = levels[2] - levels[1] if len(levels) > 2 else 0.1 * ev.h_max
        for a in good:
            for b in bad:
                if a != b:
                    out.append((min(a, b), "transfer", a, b, delta))
                    out.append((min(a, b), "transfer", a, b, None))
    if m.has_battery and not ev.standalone and "battery" in nh:
        for t in range(T):
            for action in _BATTERY_ACTIONS:
                if action != plan.b[t]:
                    out.append((t, "b", t, action))
        for a in good:
            for b in bad:
                if a < b:
                    out.append((a, "arbitrage", a, b))
        # production and battery change together in one hour
        for t in range(T):
            for h in levels if m.has_vessel else levels[1:]:
                for action in _FULL_ACTIONS:
                    if h != plan.h[t] and action != plan.b[t]:
                        out.append((t, "hb", t, h, action))
    return out


def _apply(ev: _Evaluator, plan: Plan, run: _Run, move: tuple) -> Plan | None:
    m = ev.model
    kind = move[1]
    cand = plan.copy()
    if kind == "h":
        cand.h[move[2]] = move[3]
    elif kind == "d":
        cand.d[move[2]] = move[3]
    elif kind == "d_match":
        t = move[2]
        h = m.h2_from_power(run.decisions[t].pem_power)
        if abs(h - plan.d[t]) <= 1e-12 or not m.h2_meoh_min - 1e-12 <= h <= m.design.h2_meoh_nom + 1e-12:
            return None
        cand.d[t] = h
    elif kind == "shift":
        t, delta = move[2], move[3]
        if m.has_vessel:
            lo, hi = m.h2_meoh_min, m.design.h2_meoh_nom
            cand.d[t:] = [min(max(x + delta, lo), hi) for x in plan.d[t:]]
        else:
            realized = [m.h2_from_power(d.pem_power) for d in run.decisions[t:]]
            cand.h[t:] = [min(max(x + delta, ev.h_on_min), ev.h_max) for x in realized]
    elif kind == "transfer":
        a, b, size = move[2], move[3], move[4]
        ha0 = m.h2_from_power(run.decisions[a].pem_power)
        hb0 = m.h2_from_power(run.decisions[b].pem_power)
        size = hb0 if size is None else size
        if size <= 0:
            return None
        ha = min(ha0 + size, ev.h_max)
        moved = ha - ha0
        if moved <= 0:
            return None
        hb = hb0 - moved
        cand.h[a] = ha if ha >= ev.h_on_min else 0.0
        cand.h[b] = hb if hb >= ev.h_on_min else 0.0
    elif kind == "b":
        cand.b[move[2]] = move[3]
    elif kind == "arbitrage":
        cand.b[move[2]] = (CHARGE, 1.0)
        cand.b[move[3]] = (DISCHARGE, 1.0)
    elif kind == "hb":
        cand.h[move[2]] = move[3]
        cand.b[move[2]] = move[4]
    else:  # pragma: no cover
        raise ValueError(kind)
    return cand


def _improves(obj: float, best: float, tol: float) -> bool:
    return obj < best - tol * max(1.0, abs(best))


def _local_search(ev: _Evaluator, plan: Plan, run: _Run, options: ScheduleOptions, budget: int, history: list):
    """First-improvement descent. After an acceptance the neighbourhood is rebuilt
    around the new plan and the sweep resumes where it stopped; the search ends
    after a full pass without improvement or when ``budget`` moves were accepted."""
    used = 0
    moves = _moves(ev, plan, options)
    i = 0
    idle = 0
    while used < budget and moves and idle < len(moves):
        if i >= len(moves):
            i = 0
        move = moves[i]
        i += 1
        idle += 1
        cand = _apply(ev, plan, run, move)
        if cand is None:
            continue
        trial = ev.run(cand, run, move[0])
        if trial.feasible and _improves(trial.objective, run.objective, options.tolerance):
            plan, run = cand, trial
            history.append(run.objective)
            used += 1
            idle = 0
            moves = _moves(ev, plan, options)
    return plan, run, used


def schedule_heuristic(
    design: PlantDesign,
    scenario: Scenario,
    options: ScheduleOptions = ScheduleOptions(),
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
) -> ScheduleResult:
    """Feasible schedule of low objective; raises :class:`InfeasibleScheduleError` if none is found."""
    model = PlantModel(design, scenario.mode, params)
    ev = _Evaluator(model, scenario, options, econ)
    starts = []
    for plan in _constructive_plans(ev):
        run = ev.run(plan)
        if run.feasible:
            starts.append((run.objective, len(starts), plan, run))
    if not starts:
        raise InfeasibleScheduleError(
            f"no feasible schedule found for {design.topology.value} design on scenario {scenario.label!r}"
        )
    starts.sort(key=lambda s: (s[0], s[1]))
    history = [starts[0][0]]
    plan = run = None
    used = 0
    # polish the best constructive candidates; the incumbent only ever improves
    for _, _, p0, r0 in _distinct(starts, _START_COUNT):
        trace = []
        p1, r1, u1 = _local_search(ev, p0, r0, options, options.improvement_iters, trace)
        used = max(used, u1)
        history.extend(trace)
        if run is None or _improves(r1.objective, run.objective, options.tolerance):
            plan, run = p1, r1
    rng = np.random.default_rng(options.seed)
    for _ in range(options.restarts):
        if used >= options.improvement_iters:
            break
        start = _perturb(plan, ev, rng)
        trial = ev.run(start)
        if not trial.feasible:
            continue
        p2, r2, u2 = _local_search(ev, start, trial, options, options.improvement_iters - used, [])
        used += u2
        if _improves(r2.objective, run.objective, options.tolerance):
            plan, run = p2, r2
            history.append(run.objective)
    incumbent = [history[0]]
    for o in history[1:]:
        if o < incumbent[-1]:
            incumbent.append(o)
    history = incumbent
    trajectory = model.simulate(scenario, run.decisions, options.flex)
    if not trajectory.feasible:  # replay must agree with the incremental evaluation
        raise RuntimeError("heuristic produced a schedule the plant model rejects")
    return ScheduleResult(list(run.decisions), run.objective, trajectory, ev.credit, history, ev.evaluations)


def _distinct(starts, count):
    seen = []
    for entry in starts:
        if all(abs(entry[0] - o) > 1e-9 * max(1.0, abs(o)) for o, *_ in seen):
            seen.append(entry)
        if len(seen) == count:
            break
    return seen


def _perturb(plan: Plan, ev: _Evaluator, rng: np.random.Generator) -> Plan:
    cand = plan.copy()
    for t in rng.choice(ev.T, size=max(1, ev.T // 6), replace=False):
        cand.h[int(t)] = FILL if rng.random() < 0.5 else NEED if ev.model.has_vessel else cand.h[int(t)]
    return cand
