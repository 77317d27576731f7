import numpy as np
import pytest

import helpers as h
from euroem.dispatch import DispatchResult, economic_dispatch
from euroem.grid import build_ptdf
from euroem.model import Bus
from euroem.redispatch import (
    apply_redispatch,
    dump_redispatch_costs,
    operating_point,
    redispatch,
    solve_dc_opf,
)


def manual_dispatch(system, thermal_p, renewable_p=None, served=None):
    T = system.horizon
    res = DispatchResult(horizon=T)
    res.thermal_p = {k: np.asarray(v, dtype=float) for k, v in thermal_p.items()}
    res.storage_pd = {s.id: np.zeros(T) for s in system.storage_units}
    res.storage_pc = {s.id: np.zeros(T) for s in system.storage_units}
    res.storage_e = {s.id: np.zeros(T) for s in system.storage_units}
    res.storage_sw = {s.id: np.zeros(T) for s in system.storage_units}
    res.renewable_p = {k: np.asarray(v, dtype=float) for k, v in (renewable_p or {}).items()}
    for r in system.renewable_units:
        res.renewable_p.setdefault(r.id, np.zeros(T))
    res.demand_served = {k: np.asarray(v, dtype=float) for k, v in (served or {}).items()}
    for d in system.demands:
        res.demand_served.setdefault(d.id, d.scheduled.copy())
    return res


def corridor_system(rating=100.0, up_cost=50.0, with_wind=False):
    # two buses, one line; cheap unit at b1 exports to the load at b2,
    # an expensive local unit at b2 can replace corridor flow
    T = 1
    units = [h.thermal("far", "b1", cost=10.0, p_max=300.0, horizon=T),
             h.thermal("near", "b2", cost=up_cost, p_max=200.0, horizon=T)]
    renewables = [h.renewable("wind1", "b1", tech="wind", forecast=80.0, horizon=T)] if with_wind else []
    model = h.system(
        horizon=T, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l1", "b1", "b2", rating=rating)],
        thermal_units=units,
        renewable_units=renewables,
        demands=[h.demand("d1", "b2", scheduled=150.0, horizon=T)],
    )
    return model


def test_feasible_dispatch_is_identity():
    model = corridor_system(rating=200.0)
    disp = manual_dispatch(model, {"far": [150.0], "near": [0.0]})
    red = redispatch(disp, model)
    assert red.total_cost == 0.0
    assert all(v.max() == 0.0 for v in red.up.values())
    assert all(v.max() == 0.0 for v in red.down.values())
    assert np.abs(red.post_flows).max() <= 200.0 + 1e-6


def test_single_overload_shifted_at_hand_lp_cost():
    # hand LP: line carries 150 on rating 100 -> shift 50 MW from far to near,
    # cost = 50 MW * 50 €/MWh = 2500 €
    model = corridor_system(rating=100.0, up_cost=50.0)
    disp = manual_dispatch(model, {"far": [150.0], "near": [0.0]})
    red = redispatch(disp, model)
    assert red.up["near"][0] == pytest.approx(50.0, abs=1e-6)
    assert red.down["far"][0] == pytest.approx(50.0, abs=1e-6)
    assert red.cost[0] == pytest.approx(2500.0, abs=1e-6)
    assert np.abs(red.post_flows).max() <= 100.0 * (1 + 1e-6)


def test_half_sensitivity_overload_needs_double_shift():
    # 120 MW on a 100 MW branch, up/down units whose PTDF difference on that
    # branch is 0.5 -> shift 40 MW, cost 40 * 50 = 2000 € (one-constraint LP)
    T = 1
    model = h.system(
        horizon=T, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1"), Bus("b3", "z1")],
        branches=[h.branch("direct", "b1", "b2", x=1.0, rating=100.0),
                  h.branch("leg1", "b1", "b3", x=0.5, rating=500.0),
                  h.branch("leg2", "b3", "b2", x=0.5, rating=500.0)],
        thermal_units=[h.thermal("down_u", "b1", cost=10.0, p_max=300.0, horizon=T),
                       h.thermal("up_u", "b2", cost=50.0, p_max=200.0, horizon=T)],
        demands=[h.demand("d1", "b2", scheduled=240.0, horizon=T)],
    )
    ptdf = build_ptdf(model.buses, model.branches, slack="b2")
    sens = ptdf.matrix[ptdf.branch_index("direct"), ptdf.bus_index("b1")]
    assert sens == pytest.approx(0.5, abs=1e-12)

    disp = manual_dispatch(model, {"down_u": [240.0], "up_u": [0.0]})
    red = redispatch(disp, model)
    assert red.down["down_u"][0] == pytest.approx(40.0, abs=1e-6)
    assert red.up["up_u"][0] == pytest.approx(40.0, abs=1e-6)
    assert red.cost[0] == pytest.approx(2000.0, abs=1e-6)


def test_wind_curtailment_is_free():
    # overload resolvable only by curtailing wind: load pocket at b1 exports
    # wind across the line while the near unit is already at zero
    T = 1
    model = h.system(
        horizon=T, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l1", "b1", "b2", rating=50.0)],
        renewable_units=[h.renewable("wind1", "b1", tech="wind", forecast=80.0, horizon=T)],
        demands=[h.demand("d1", "b2", scheduled=80.0, horizon=T)],
    )
    disp = manual_dispatch(model, {}, renewable_p={"wind1": [80.0]})
    red = redispatch(disp, model, fix_zonal_positions=False)
    # shedding at b2 pairs with curtailment at b1 (30 MW each); both cost only
    # the shed price since curtailment itself is free
    assert red.curtailment["wind1"][0] == pytest.approx(30.0, abs=1e-6)
    assert red.shed["d1"][0] == pytest.approx(30.0, abs=1e-6)
    assert red.cost[0] == pytest.approx(30.0 * 3000.0, abs=1e-4)


def test_energy_neutral_per_zone():
    model = corridor_system(rating=100.0)
    disp = manual_dispatch(model, {"far": [150.0], "near": [0.0]})
    red = redispatch(disp, model)
    balance = (sum(v[0] for v in red.up.values()) - sum(v[0] for v in red.down.values())
               - sum(v[0] for v in red.curtailment.values()) + sum(v[0] for v in red.shed.values()))
    assert balance == pytest.approx(0.0, abs=1e-6)


def test_redispatch_of_opf_is_identity():
    model = corridor_system(rating=100.0, up_cost=50.0)
    opf = solve_dc_opf(model)
    red = redispatch(opf, model)
    assert red.total_cost == pytest.approx(0.0, abs=1e-9)
    assert all(v.max() <= 1e-9 for v in red.up.values())


def test_opf_respects_corridor_and_uses_local_unit():
    # binding 100 MW corridor toward a 150 MW load pocket: local unit covers 50
    model = corridor_system(rating=100.0, up_cost=60.0)
    opf = solve_dc_opf(model)
    assert opf.thermal_p["near"][0] == pytest.approx(50.0, abs=1e-6)
    assert opf.thermal_p["far"][0] == pytest.approx(100.0, abs=1e-6)


def test_opf_matches_single_hour_ed_when_ratings_relaxed():
    T = 1
    model = h.system(
        horizon=T, zones=("z1",),
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l1", "b1", "b2", rating=1e5)],
        thermal_units=[h.thermal("gA", "b1", cost=10.0, p_max=100.0, horizon=T),
                       h.thermal("gB", "b2", cost=30.0, p_max=100.0, horizon=T)],
        storage_units=[h.battery("s1", "b2", pd_max=10, pc_max=10, e_max=20,
                                 e_initial=10, eta_c=0.9, eta_d=0.9, horizon=T)],
        demands=[h.demand("d1", "b2", scheduled=150.0, horizon=T)],
    )
    ed = economic_dispatch(model)
    opf = solve_dc_opf(model)
    assert opf.total_cost == pytest.approx(ed.total_cost, abs=1e-6)


def test_opf_zero_demand_zero_cost():
    T = 1
    model = h.system(
        horizon=T,
        buses=[Bus("b1", "z1"), Bus("b2", "z1")],
        branches=[h.branch("l1", "b1", "b2", rating=100.0)],
        thermal_units=[h.thermal("g1", "b1", cost=10.0, p_max=50.0, horizon=T)],
        demands=[h.demand("d1", "b2", scheduled=0.0, horizon=T)],
    )
    opf = solve_dc_opf(model)
    assert opf.total_cost == pytest.approx(0.0, abs=1e-9)
    assert opf.thermal_p["g1"][0] == pytest.approx(0.0, abs=1e-9)


def test_apply_redispatch_gives_feasible_point():
    model = corridor_system(rating=100.0)
    disp = manual_dispatch(model, {"far": [150.0], "near": [0.0]})
    red = redispatch(disp, model)
    points = apply_redispatch(model, disp, red)
    ptdf = build_ptdf(model.buses, model.branches)
    flows = ptdf.matrix @ points[0].injections(model, ptdf)
    assert np.abs(flows).max() <= 100.0 * (1 + 1e-6)


def test_operating_point_handles_market_result():
    from euroem.dam import MarketResult

    model = corridor_system()
    mr = MarketResult(horizon=1)
    mr.thermal_p = {"far": np.array([100.0]), "near": np.array([0.0])}
    mr.thermal_p_neg = {"far": np.array([20.0]), "near": np.array([0.0])}
    mr.storage_pd = {}
    mr.storage_pd_neg = {}
    mr.storage_pc = {}
    mr.storage_pc_neg = {}
    mr.renewable_p = {}
    mr.demand_served = {"d1": np.array([120.0])}
    point = operating_point(model, mr, 0)
    assert point.thermal_out["far"] == pytest.approx(120.0)


def test_dump_costs_by_day(tmp_path):
    model = corridor_system(rating=100.0)
    disp = manual_dispatch(model, {"far": [150.0], "near": [0.0]})
    red = redispatch(disp, model)
    out = tmp_path / "redispatch_costs.csv"
    dump_redispatch_costs(red, out)
    text = out.read_text().splitlines()
    assert text[0] == "day,cost_eur"
    assert text[1].startswith("0,")
