import itertools

import numpy as np
import pytest

import helpers as h
from euroem.ltpo import LtpoError, dump_positions, optimize_positions


def run_single(unit, rho, horizon):
    kind = "thermal_units" if hasattr(unit, "speed_class") else "storage_units"
    model = h.system(horizon=horizon, **{kind: [unit]},
                     forecasts={unit.id: h.flat_forecast(unit.id, rho, horizon)})
    return optimize_positions(model)


def test_marginal_unit_runs_only_profitable_hours():
    # oracle: enumerate on/off x output grid per hour
    rho = np.array([10.0, 30.0])
    cost = 20.0
    best = 0.0
    for p0, p1 in itertools.product([0.0, 50.0, 100.0], repeat=2):
        best = max(best, p0 * (rho[0] - cost) + p1 * (rho[1] - cost))
    assert best == 1000.0

    unit = h.thermal("g1", p_min=0, p_max=100, cost=20.0, horizon=2)
    sched = run_single(unit, rho, 2)
    pos = sched.thermal["g1"]
    np.testing.assert_allclose(pos.p, [0.0, 100.0], atol=1e-6)
    assert pos.objective == pytest.approx(1000.0, abs=1e-6)


def test_startup_cost_paid_when_profitable():
    # stay off -> 0; start -> 2*100*(30-20) - 500 = 1500
    unit = h.thermal("g1", tech="hard_coal", speed="slow", p_min=50, p_max=100,
                     ru=100, rd=100, cost=20.0, b_on=500.0, status="off", horizon=2)
    sched = run_single(unit, [30.0, 30.0], 2)
    pos = sched.thermal["g1"]
    np.testing.assert_allclose(pos.p, [100.0, 100.0], atol=1e-6)
    assert pos.nu_on_init == 1
    assert pos.objective == pytest.approx(1500.0, abs=1e-6)


def test_battery_arbitrage_two_hours():
    # oracle: enumerate charge/discharge patterns on the 2-hour grid
    rho = [10.0, 50.0]
    best = max(
        -c0 * rho[0] + d1 * rho[1]
        for c0 in [0.0, 10.0]
        for d1 in [0.0, min(10.0, c0)]
    )
    assert best == 400.0
    unit = h.battery("s1", pd_max=10, pc_max=10, e_max=10, e_initial=0, horizon=2)
    sched = run_single(unit, rho, 2)
    pos = sched.storage["s1"]
    np.testing.assert_allclose(pos.pc, [10.0, 0.0], atol=1e-6)
    np.testing.assert_allclose(pos.pd, [0.0, 10.0], atol=1e-6)
    assert pos.objective == pytest.approx(400.0, abs=1e-6)


def test_zero_prices_zero_positions():
    unit = h.thermal("g1", cost=20.0, horizon=3)
    stor = h.battery("s1", vom=1.0, horizon=3)
    model = h.system(horizon=3, thermal_units=[unit], storage_units=[stor],
                     forecasts={"g1": h.flat_forecast("g1", 0.0, 3),
                                "s1": h.flat_forecast("s1", 0.0, 3)})
    sched = optimize_positions(model)
    np.testing.assert_allclose(sched.thermal["g1"].p, 0.0, atol=1e-6)
    np.testing.assert_allclose(sched.storage["s1"].pd, 0.0, atol=1e-6)
    np.testing.assert_allclose(sched.storage["s1"].pc, 0.0, atol=1e-6)
    assert sched.objective == pytest.approx(0.0, abs=1e-6)


def test_no_simultaneous_start_and_stop():
    rng = np.random.default_rng(11)
    rho = rng.uniform(0, 60, 24)
    unit = h.thermal("g1", tech="lignite", speed="slow", p_min=30, p_max=90,
                     ru=40, rd=40, cost=25.0, b_on=200.0, b_off=100.0,
                     status="on", horizon=24)
    sched = run_single(unit, rho, 24)
    pos = sched.thermal["g1"]
    assert np.all(pos.nu_on + pos.nu_off <= 1)
    assert pos.nu_on_init + pos.nu_off_init <= 1
    # transition identity between consecutive hours
    diff = np.diff(pos.nu_stat)
    np.testing.assert_array_equal(diff, pos.nu_on[:-1] - pos.nu_off[:-1])


def test_lossy_storage_never_charges_and_discharges_together():
    rng = np.random.default_rng(4)
    rho = rng.uniform(5.0, 80.0, 48)
    unit = h.battery("s1", pd_max=8, pc_max=8, e_max=20, e_initial=10,
                     eta_c=0.9, eta_d=0.9, horizon=48)
    sched = run_single(unit, rho, 48)
    pos = sched.storage["s1"]
    assert np.max(pos.pd * pos.pc) <= 1e-6


def test_storage_terminal_level_holds():
    rng = np.random.default_rng(8)
    rho = rng.uniform(10, 70, 24)
    unit = h.hydro_dam("s1", pd_max=40, e_max=300, e_initial=120, inflow=3.0, horizon=24)
    sched = run_single(unit, rho, 24)
    assert sched.storage["s1"].e[-1] >= 120 - 1e-6


def test_profit_monotone_in_prices():
    rng = np.random.default_rng(21)
    rho = rng.uniform(0, 50, 12)
    unit = h.thermal("g1", tech="gas", p_max=60, cost=30.0, b_on=50.0, horizon=12)
    base = run_single(unit, rho, 12).objective
    bumped = run_single(unit, rho + 5.0, 12).objective
    assert bumped >= base - 1e-9


def test_units_are_separable():
    horizon = 6
    rng = np.random.default_rng(2)
    rho = rng.uniform(10, 60, horizon)
    g = h.thermal("g1", p_max=70, cost=25.0, horizon=horizon)
    s = h.battery("s1", pd_max=5, pc_max=5, e_max=10, horizon=horizon)
    model = h.system(horizon=horizon, thermal_units=[g], storage_units=[s],
                     forecasts={"g1": h.flat_forecast("g1", rho, horizon),
                                "s1": h.flat_forecast("s1", rho, horizon)})
    joint = optimize_positions(model)
    only_g = optimize_positions(model, scope=["g1"])
    only_s = optimize_positions(model, scope=["s1"])
    assert joint.objective == pytest.approx(only_g.objective + only_s.objective, abs=1e-8)


def test_missing_forecast_is_an_error():
    model = h.system(horizon=2, thermal_units=[h.thermal("g1")])
    with pytest.raises(LtpoError, match="g1"):
        optimize_positions(model)


def test_dump_positions(tmp_path):
    unit = h.thermal("g1", p_max=10, cost=5.0, horizon=2)
    model = h.system(horizon=2, thermal_units=[unit],
                     forecasts={"g1": h.flat_forecast("g1", 20.0, 2)})
    sched = optimize_positions(model)
    out = tmp_path / "positions.csv"
    dump_positions(sched, out)
    text = out.read_text()
    assert text.startswith("unit,hour,")
    assert "g1" in text
