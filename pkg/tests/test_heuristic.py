import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pytest import approx

from builders import random_design, small_design
from ptmeoh.optimize import (
    InfeasibleScheduleError,
    ScheduleOptions,
    schedule_heuristic,
    schedule_oracle,
)
from ptmeoh.optimize.objective import schedule_objective
from ptmeoh.plant import ALL_TOPOLOGIES, NO_FLEXIBILITY, FlexPolicy, PlantDesign
from ptmeoh.scenario import Mode, Scenario, synth_price_scenario, synth_renewable_scenario


def test_constant_price_no_storage_converges_to_nominal():
    d = PlantDesign.create("none", 20, 35.0)
    sc = Scenario(Mode.GRID, [45.0] * 8)
    res = schedule_heuristic(d, sc, ScheduleOptions(flex=NO_FLEXIBILITY))
    assert all(x.pem_power == approx(50.0) for x in res.schedule)
    oracle = schedule_oracle(d, sc, NO_FLEXIBILITY)
    assert res.objective == approx(oracle.objective, rel=1e-9)


def test_two_level_price_vessel_close_to_oracle():
    d = small_design("vessel")
    sc = synth_price_scenario(6, 0.0, 300.0, 2)
    flex = FlexPolicy.ramp(0.5)
    h = schedule_heuristic(d, sc, ScheduleOptions(flex=flex))
    o = schedule_oracle(d, sc, flex)
    assert h.objective <= o.objective + 0.02 * abs(o.objective)


def test_zero_renewable_power_is_infeasible():
    d = small_design("both")
    sc = Scenario(Mode.STANDALONE, [0.0] * 6)
    with pytest.raises(InfeasibleScheduleError):
        schedule_heuristic(d, sc, ScheduleOptions(flex=FlexPolicy.ramp(0.1)))


def test_history_non_increasing_and_objective_replays():
    d = small_design("both")
    sc = synth_price_scenario(24, 0.0, 300.0, 8)
    opts = ScheduleOptions(flex=FlexPolicy.ramp(0.25), meoh_credit=800.0)
    res = schedule_heuristic(d, sc, opts)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))
    assert res.history[-1] == approx(res.objective)
    replay = schedule_objective(res.trajectory, sc.values, res.schedule, credit=800.0)
    assert replay == approx(res.objective, rel=1e-9)


def test_more_iterations_never_hurt():
    d = small_design("vessel")
    sc = synth_price_scenario(24, 0.0, 300.0, 6)
    flex = FlexPolicy.ramp(0.25)
    short = schedule_heuristic(d, sc, ScheduleOptions(flex=flex, improvement_iters=0))
    long = schedule_heuristic(d, sc, ScheduleOptions(flex=flex, improvement_iters=100))
    assert long.objective <= short.objective + 1e-9


def test_deterministic_given_seed():
    d = small_design("both")
    sc = synth_price_scenario(24, 0.0, 300.0, 6, seed=2, jitter=20.0)
    opts = ScheduleOptions(flex=FlexPolicy.ramp(0.1), restarts=2, seed=5)
    a = schedule_heuristic(d, sc, opts)
    b = schedule_heuristic(d, sc, opts)
    assert a.schedule == b.schedule and a.objective == b.objective


def test_restricted_neighborhood():
    d = small_design("both")
    sc = synth_price_scenario(12, 0.0, 300.0, 4)
    res = schedule_heuristic(d, sc, ScheduleOptions(flex=FlexPolicy.ramp(0.25), neighborhood=frozenset({"level"})))
    assert res.trajectory.feasible
    with pytest.raises(ValueError):
        ScheduleOptions(neighborhood=frozenset({"teleport"}))
    with pytest.raises(ValueError):
        ScheduleOptions(improvement_iters=-1)


def test_standalone_uses_renewable_power():
    d = PlantDesign.create("both", 20, 35.0, beta_max=3.5, h2_meoh_nom=0.6, volume=1500.0, e_batt_nom=50.0)
    sc = synth_renewable_scenario(24, pv_peak=60.0, wind_base=25.0)
    res = schedule_heuristic(d, sc, ScheduleOptions(flex=FlexPolicy.ramp(0.25), improvement_iters=50))
    assert res.trajectory.feasible
    assert res.meoh_total > 0
    for r, v in zip(res.trajectory.records, sc.values):
        assert r.electricity_drawn <= v + 1e-9


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    topo=st.sampled_from(ALL_TOPOLOGIES),
    rl=st.sampled_from([None, 0.05, 0.25]),
)
def test_heuristic_output_always_feasible(seed, topo, rl):
    rng = np.random.default_rng(seed)
    d = random_design(rng, topo)
    sc = Scenario(Mode.GRID, rng.uniform(-10.0, 300.0, size=12).tolist())
    flex = FlexPolicy(rl)
    try:
        res = schedule_heuristic(d, sc, ScheduleOptions(flex=flex, improvement_iters=10))
    except InfeasibleScheduleError:
        return
    assert res.trajectory.feasible
    assert res.trajectory.violations == []
