import numpy as np
import pytest

import helpers as h
from euroem.grid import GridError, build_ptdf, dc_power_flow
from euroem.model import Bus


def two_bus():
    buses = [Bus("b1", "z1"), Bus("b2", "z1")]
    branches = [h.branch("l1", "b2", "b1", x=0.1)]
    return buses, branches


def ring3():
    buses = [Bus("b1", "z1"), Bus("b2", "z1"), Bus("b3", "z1")]
    branches = [h.branch("l12", "b1", "b2", x=0.1),
                h.branch("l23", "b2", "b3", x=0.1),
                h.branch("l13", "b1", "b3", x=0.1)]
    return buses, branches


def test_two_bus_ptdf_is_identity():
    buses, branches = two_bus()
    ptdf = build_ptdf(buses, branches, slack="b1")
    assert ptdf.matrix[0, ptdf.bus_index("b2")] == pytest.approx(1.0, abs=1e-12)
    assert ptdf.matrix[0, ptdf.bus_index("b1")] == 0.0


def test_slack_column_is_zero():
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches, slack="b3")
    assert np.allclose(ptdf.matrix[:, ptdf.bus_index("b3")], 0.0)
    assert ptdf.slack_buses == ["b3"]


def test_ring_split_two_thirds_one_third():
    # hand solution of the 2x2 susceptance system: injection at b1 vs slack b3
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches, slack="b3")
    col = ptdf.matrix[:, ptdf.bus_index("b1")]
    assert col[ptdf.branch_index("l13")] == pytest.approx(2 / 3, abs=1e-12)
    assert col[ptdf.branch_index("l12")] == pytest.approx(1 / 3, abs=1e-12)
    assert col[ptdf.branch_index("l23")] == pytest.approx(1 / 3, abs=1e-12)


def test_ring_90mw_transfer_splits_60_30():
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches, slack="b3")
    flows = dc_power_flow(ptdf, {"b1": 90.0, "b3": -90.0})
    assert flows[ptdf.branch_index("l13")] == pytest.approx(60.0, abs=1e-9)
    assert flows[ptdf.branch_index("l12")] == pytest.approx(30.0, abs=1e-9)
    assert flows[ptdf.branch_index("l23")] == pytest.approx(30.0, abs=1e-9)


def test_injection_at_slack_only_gives_zero_flows():
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches, slack="b3")
    assert np.allclose(ptdf.matrix[:, ptdf.bus_index("b3")] * 50.0, 0.0)


def test_zero_injections_zero_flows():
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches)
    assert np.allclose(dc_power_flow(ptdf, {}), 0.0)


def test_two_bus_transfer():
    buses, branches = two_bus()
    ptdf = build_ptdf(buses, branches)
    flows = dc_power_flow(ptdf, {"b2": 50.0, "b1": -50.0})
    assert flows[0] == pytest.approx(50.0, abs=1e-12)


def test_unbalanced_injections_error():
    buses, branches = two_bus()
    ptdf = build_ptdf(buses, branches)
    with pytest.raises(GridError, match="unbalanced"):
        dc_power_flow(ptdf, {"b2": 10.0})


def test_islands_get_separate_slacks():
    buses = [Bus(f"b{k}", "z1") for k in range(1, 5)]
    branches = [h.branch("l12", "b1", "b2"), h.branch("l34", "b3", "b4")]
    ptdf = build_ptdf(buses, branches)
    assert sorted(ptdf.slack_buses) == ["b1", "b3"]
    # cross-island sensitivities are zero
    assert ptdf.matrix[ptdf.branch_index("l12"), ptdf.bus_index("b4")] == 0.0
    # per-island balance enforced separately
    with pytest.raises(GridError):
        dc_power_flow(ptdf, {"b2": 5.0, "b4": -5.0})


def test_nodal_conservation_on_meshed_grid():
    rng = np.random.default_rng(42)
    buses = [Bus(f"b{k}", "z1") for k in range(1, 7)]
    branches = [h.branch(f"l{k}", f"b{a}", f"b{b}", x=float(rng.uniform(0.05, 0.3)))
                for k, (a, b) in enumerate([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1), (2, 5), (3, 6)])]
    ptdf = build_ptdf(buses, branches)
    inj = rng.uniform(-100, 100, 6)
    inj -= inj.mean()
    flows = dc_power_flow(ptdf, dict(zip([b.id for b in buses], inj)))
    # KCL at every bus: net branch flow equals injection
    for k, bus in enumerate(buses):
        net = 0.0
        for j, br in enumerate(branches):
            if br.from_bus == bus.id:
                net += flows[j]
            if br.to_bus == bus.id:
                net -= flows[j]
        assert net == pytest.approx(inj[k], abs=1e-9)


def test_ptdf_linearity():
    buses, branches = ring3()
    ptdf = build_ptdf(buses, branches)
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = rng.uniform(-50, 50, 3)
        a -= a.mean()
        b = rng.uniform(-50, 50, 3)
        b -= b.mean()
        fa = ptdf.matrix @ a
        fb = ptdf.matrix @ b
        fab = ptdf.matrix @ (a + b)
        assert np.allclose(fab, fa + fb, atol=1e-9)
