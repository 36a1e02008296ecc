import math

import pytest
from pytest import approx

from ptmeoh.optimize import (
    BUNDLE_FILES,
    DesignSearchOptions,
    NoFeasibleDesignError,
    ScheduleOptions,
    compare_topologies,
    design_variables,
    evaluate_design,
    optimize_design,
    write_bundle,
)
from ptmeoh.plant import NO_FLEXIBILITY, TABLE_BOUNDS, DesignBounds, FlexPolicy, PlantDesign, Topology
from ptmeoh.scenario import Mode, Scenario, synth_price_scenario, synth_renewable_scenario

FAST = ScheduleOptions(improvement_iters=5)


def quick(**kw):
    kw.setdefault("max_evals", 8)
    kw.setdefault("multistart_count", 1)
    kw.setdefault("schedule", FAST)
    kw.setdefault("polish_iters", 5)
    return DesignSearchOptions(**kw)


def test_design_variables_per_topology():
    assert design_variables(Topology.NONE) == ("n_mod", "p_pem")
    assert "e_batt_nom" in design_variables(Topology.BATTERY)
    assert set(design_variables(Topology.BOTH)) == {"n_mod", "p_pem", "e_batt_nom", "beta_max", "volume", "h2_meoh_nom"}


def test_search_options_validation():
    with pytest.raises(ValueError):
        DesignSearchOptions(bounds=DesignBounds(n_mod=(5, 40)))
    with pytest.raises(ValueError):
        DesignSearchOptions(multistart_count=0)
    with pytest.raises(ValueError):
        DesignSearchOptions(max_evals=0)
    with pytest.raises(ValueError):
        DesignSearchOptions(shrink=1.0)


def test_evaluate_design_reports_unusable_vessel():
    d = PlantDesign.create("vessel", 20, 30.0, beta_max=2.0, h2_meoh_nom=1.0, volume=100.0)
    ev = evaluate_design(d, synth_price_scenario(12, 50, 50, 12))
    assert not ev.feasible
    assert math.isinf(ev.c_meoh)
    assert "vessel unusable" in ev.reason


def test_dinkelbach_never_worse_than_fixed_credit():
    d = PlantDesign.create("vessel", 40, 40.0, beta_max=3.5, h2_meoh_nom=0.9, volume=2500.0)
    sc = synth_price_scenario(24, 0.0, 300.0, 12)
    ratio = evaluate_design(d, sc, FlexPolicy.ramp(0.25), options=FAST)
    fixed = evaluate_design(d, sc, FlexPolicy.ramp(0.25), options=ScheduleOptions(improvement_iters=5, meoh_credit=0.0))
    assert ratio.c_meoh <= fixed.c_meoh + 1e-12


def test_degenerate_bounds_return_single_design():
    bounds = DesignBounds(
        e_batt_nom=(50.0, 50.0), n_mod=(20, 20), p_pem=(30.0, 30.0),
        beta_max=(3.5, 3.5), volume=(500.0, 500.0), h2_meoh_nom=(0.6, 0.6),
    )
    sc = synth_price_scenario(12, 0.0, 200.0, 6)
    res = optimize_design(sc, quick(bounds=bounds), FlexPolicy.ramp(0.25), topology="both")
    d = res.design
    assert (d.n_mod, d.p_pem, d.beta_max, d.volume, d.h2_meoh_nom, d.e_batt_nom) == (20, 30.0, 3.5, 500.0, 0.6, 50.0)
    assert res.evals_used == 1


def test_result_soundness():
    sc = synth_price_scenario(24, 0.0, 300.0, 12)
    res = optimize_design(sc, quick(max_evals=12), FlexPolicy.ramp(0.1), topology=Topology.VESSEL)
    assert res.trajectory.feasible
    assert res.design.issues(bounds=TABLE_BOUNDS) == []
    h = res.best_objective_history
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert h[-1] == approx(res.c_meoh)
    assert res.evals_used <= 12
    assert len(res.search_log) == res.evals_used


def test_same_seed_same_result():
    sc = synth_price_scenario(12, 0.0, 300.0, 6)
    opts = quick(multistart_count=2, max_evals=10, seed=4)
    a = optimize_design(sc, opts, FlexPolicy.ramp(0.25), topology="battery")
    b = optimize_design(sc, opts, FlexPolicy.ramp(0.25), topology="battery")
    assert a.design == b.design and a.c_meoh == b.c_meoh


def test_single_start_independent_of_seed():
    sc = synth_price_scenario(12, 0.0, 300.0, 6)
    a = optimize_design(sc, quick(seed=1), NO_FLEXIBILITY, topology="none")
    b = optimize_design(sc, quick(seed=2), NO_FLEXIBILITY, topology="none")
    assert a.c_meoh == approx(b.c_meoh, rel=1e-9)


def test_no_feasible_design():
    sc = Scenario(Mode.STANDALONE, [0.0] * 6)
    with pytest.raises(NoFeasibleDesignError):
        optimize_design(sc, quick(max_evals=3), FlexPolicy.ramp(0.1), topology="both")


def test_standalone_compares_only_both():
    sc = synth_renewable_scenario(24, pv_peak=150.0, wind_base=60.0)
    out = compare_topologies(sc, quick(max_evals=3), FlexPolicy.ramp(0.25))
    assert [o.topology for o in out] == [Topology.BOTH]
    with pytest.raises(ValueError):
        compare_topologies(sc, quick(), topologies=(Topology.NONE,))


def test_compare_ranks_by_cost():
    sc = synth_price_scenario(12, 40.0, 60.0, 6)
    out = compare_topologies(sc, quick(max_evals=4))
    assert {o.topology for o in out} == set(Topology)
    costs = [o.c_meoh for o in out]
    assert costs == sorted(costs)


def test_bundle_files(tmp_path):
    sc = synth_price_scenario(12, 0.0, 300.0, 6)
    res = optimize_design(sc, quick(max_evals=3), FlexPolicy.ramp(0.25), topology="vessel")
    write_bundle(res, tmp_path / "run")
    for name in BUNDLE_FILES:
        assert (tmp_path / "run" / name).is_file()
    log = (tmp_path / "run" / "search_log.csv").read_text().splitlines()
    assert log[0].startswith("eval,objective,n_mod")
    assert len(log) == res.evals_used + 1
