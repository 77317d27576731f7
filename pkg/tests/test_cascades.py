import numpy as np
import pytest

import helpers as h
from euroem.cascades import (
    CascadeError,
    CascadeParams,
    Contingency,
    classify_branch,
    classify_branches,
    generate_contingencies,
    risk_curve,
    select_representative_hours,
    simulate_cascade,
)
from euroem.model import Bus
from euroem.redispatch import OperatingPoint


def make_point(system, thermal=None, storage=None, renewable=None, served=None):
    return OperatingPoint(
        thermal_out={u.id: (thermal or {}).get(u.id, 0.0) for u in system.thermal_units},
        storage_net={s.id: (storage or {}).get(s.id, 0.0) for s in system.storage_units},
        renewable_out={r.id: (renewable or {}).get(r.id, 0.0) for r in system.renewable_units},
        demand_served={d.id: (served if served is not None else {}).get(d.id, d.scheduled[0])
                       for d in system.demands},
    )


def parallel_feed_system():
    # generator bus feeds a load pocket over two parallel 100 MW branches
    model = h.system(
        horizon=1, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("lA", "b1", "b2", rating=100.0),
                  h.branch("lB", "b1", "b2", rating=100.0)],
        thermal_units=[h.thermal("g1", "b1", cost=10.0, p_max=150.0, horizon=1)],
        demands=[h.demand("d1", "b2", scheduled=150.0, horizon=1)],
    )
    return model


def test_parallel_branch_collapse_hand_case():
    model = parallel_feed_system()
    point = make_point(model, thermal={"g1": 150.0})
    res = simulate_cascade(point, model, Contingency("c0", ("lA",)))
    assert res.dns == pytest.approx(150.0, abs=1e-9)
    assert res.n_failures == 2
    assert res.failures[0] == ("lA", 0)
    assert res.failures[1] == ("lB", 1)
    assert not res.hit_iteration_cap


def test_low_loading_contingency_is_benign():
    model = parallel_feed_system()
    point = make_point(model, thermal={"g1": 20.0}, served={"d1": 20.0})
    res = simulate_cascade(point, model, Contingency("c0", ("lA",)))
    assert res.dns == 0.0
    assert res.n_failures == 1


def test_generation_island_curtails_without_dns():
    # three buses in a line; tripping the middle branch isolates the wind bus
    model = h.system(
        horizon=1, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1"), Bus("b3", "z1")],
        branches=[h.branch("l12", "b1", "b2", rating=200.0),
                  h.branch("l23", "b2", "b3", rating=200.0)],
        thermal_units=[h.thermal("g1", "b2", cost=10.0, p_max=200.0, horizon=1)],
        renewable_units=[h.renewable("w1", "b1", tech="wind", forecast=50.0, horizon=1)],
        demands=[h.demand("d1", "b3", scheduled=120.0, horizon=1)],
    )
    point = make_point(model, thermal={"g1": 70.0}, renewable={"w1": 50.0})
    res = simulate_cascade(point, model, Contingency("c0", ("l12",)))
    # wind island curtails 50 MW; load island is rebalanced by g1 headroom
    assert res.dns == pytest.approx(0.0, abs=1e-9)
    assert res.islands == 2


def test_island_without_headroom_sheds():
    model = h.system(
        horizon=1, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l12", "b1", "b2", rating=200.0)],
        thermal_units=[h.thermal("g1", "b1", cost=10.0, p_max=100.0, horizon=1),
                       h.thermal("g2", "b2", cost=10.0, p_max=50.0, horizon=1)],
        demands=[h.demand("d1", "b2", scheduled=120.0, horizon=1)],
    )
    point = make_point(model, thermal={"g1": 70.0, "g2": 50.0})
    res = simulate_cascade(point, model, Contingency("c0", ("l12",)))
    # pocket keeps its 50 MW local unit at max; 70 MW of imports are lost
    assert res.dns == pytest.approx(70.0, abs=1e-9)


def test_charging_storage_drops_before_demand():
    model = h.system(
        horizon=1, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l12", "b1", "b2", rating=200.0)],
        thermal_units=[h.thermal("g1", "b1", cost=10.0, p_max=100.0, horizon=1)],
        storage_units=[h.battery("s1", "b2", pd_max=30, pc_max=30, e_max=60, horizon=1)],
        demands=[h.demand("d1", "b2", scheduled=40.0, horizon=1)],
    )
    point = make_point(model, thermal={"g1": 70.0}, storage={"s1": -30.0})
    res = simulate_cascade(point, model, Contingency("c0", ("l12",)))
    # pocket loses 70 MW of import; dropping the 30 MW charge saves that much
    # demand: DNS = 70 - 30 = 40... but the pocket has no generation at all,
    # so everything served locally is lost after the charge drop
    assert res.dns == pytest.approx(40.0, abs=1e-9)


def test_classification_rules():
    model = h.system(
        horizon=1, zones=("z1", "z2"),
        buses=[Bus("b1", "z1"), Bus("b2", "z1"), Bus("b3", "z2"), Bus("b4", "z1")],
        branches=[h.branch("tie", "b2", "b3", rating=100.0),
                  h.branch("adj", "b1", "b2", rating=100.0),
                  h.branch("deep", "b1", "b4", rating=100.0)],
    )
    assert classify_branch(model, "tie") == "interconnector"
    assert classify_branch(model, "adj") == "adjacent"
    assert classify_branch(model, "deep") == "intra_zonal"
    classes = classify_branches(model)
    assert sorted(classes.values()).count("interconnector") == 1
    assert len(classes) == 3
    with pytest.raises(CascadeError, match="unknown branch"):
        classify_branch(model, "ghost")


def test_contingency_counts_largest_remainder():
    branches = [h.branch(f"l{k}", "a", "b") for k in range(20)]
    cons = generate_contingencies(branches, 1000, seed=3)
    sizes = np.array([len(c.branches) for c in cons])
    assert len(cons) == 1000
    assert (sizes == 1).sum() == 910
    assert (sizes == 2).sum() == 83
    assert (sizes == 3).sum() == 5
    assert (sizes >= 4).sum() == 2


def test_contingencies_deterministic_and_distinct_branches():
    branches = [h.branch(f"l{k}", "a", "b") for k in range(10)]
    a = generate_contingencies(branches, 50, seed=9)
    b = generate_contingencies(branches, 50, seed=9)
    assert [c.branches for c in a] == [c.branches for c in b]
    for c in a:
        assert len(set(c.branches)) == len(c.branches)
    assert generate_contingencies(branches, 0, seed=9) == []


def test_contingency_size_exceeding_branches_errors():
    branches = [h.branch("l0", "a", "b")]
    with pytest.raises(CascadeError, match="size 2"):
        generate_contingencies(branches, 10, mix={1: 0.5, 2: 0.5}, seed=0)


def test_representative_hours_span_min_to_max():
    rng = np.random.default_rng(12)
    load = rng.uniform(100, 500, 400)
    hours = select_representative_hours(load, 18)
    assert len(set(hours)) == 18
    assert int(np.argmin(load)) == hours[0]
    assert int(np.argmax(load)) == hours[-1]


def test_single_representative_hour_is_median():
    load = np.array([5.0, 1.0, 3.0, 9.0, 7.0])
    assert select_representative_hours(load, 1) == [0]  # 5 is the median value


def test_constant_load_ties_break_earliest():
    load = np.full(10, 42.0)
    hours = select_representative_hours(load, 3)
    assert len(set(hours)) == 3
    assert hours[0] == 0


def test_risk_curve_single_sample():
    res = [type("R", (), {"dns": 5.0})()]
    curve = risk_curve(res)
    assert curve.points == [(0.0, 1.0), (5.0, 0.0)]


def test_risk_curve_counting_oracle():
    samples = [0.0, 0.0, 10.0, 10.0]
    res = [type("R", (), {"dns": v})() for v in samples]
    curve = risk_curve(res)
    assert curve.points == [(0.0, 0.5), (10.0, 0.0)]
    probs = [p for _, p in curve.points]
    assert probs == sorted(probs, reverse=True)


def test_risk_curve_all_zero_collapses():
    res = [type("R", (), {"dns": 0.0})() for _ in range(4)]
    assert risk_curve(res).points == [(0.0, 0.0)]


def test_risk_curve_empty_errors():
    with pytest.raises(CascadeError):
        risk_curve([])


def test_cascade_deterministic():
    model = parallel_feed_system()
    point = make_point(model, thermal={"g1": 150.0})
    r1 = simulate_cascade(point, model, Contingency("c0", ("lA",)))
    point2 = make_point(model, thermal={"g1": 150.0})
    r2 = simulate_cascade(point2, model, Contingency("c0", ("lA",)))
    assert r1.failures == r2.failures and r1.dns == r2.dns


def test_dns_bounded_by_demand():
    model = parallel_feed_system()
    point = make_point(model, thermal={"g1": 150.0})
    res = simulate_cascade(point, model, Contingency("c0", ("lA", "lB")))
    total = float(model.total_scheduled_demand()[0])
    assert 0.0 <= res.dns <= total + 1e-9


def test_trip_factor_relaxes_tripping():
    model = parallel_feed_system()
    point = make_point(model, thermal={"g1": 150.0})
    res = simulate_cascade(point, model, Contingency("c0", ("lA",)),
                           CascadeParams(trip_factor=1.6))
    assert res.dns == 0.0 and res.n_failures == 1
