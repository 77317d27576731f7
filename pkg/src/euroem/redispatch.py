"""Grid-feasibility restoration and the DC-OPF base scenario.

Redispatch takes any zonal dispatch (market or baseline), maps it to bus
injections, and solves one cost-minimal LP per hour that shifts thermal
output (up priced at marginal cost, down free), curtails renewables (free),
and sheds demand (at shed cost) until every branch flow is within rating.
Zonal net positions are held fixed by default, mirroring how a TSO cannot
rewrite the market outcome across borders.

DC-OPF dispatches each hour against the full grid directly (nodal injections
plus branch limits) and is the security base case; redispatching its output
is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from euroem.grid import build_ptdf
from euroem.solver import OptProblem, solve_lp

FLOW_TOL = 1e-6


class RedispatchError(RuntimeError):
    pass


@dataclass
class OperatingPoint:
    """Bus-mapped snapshot of one dispatched hour."""

    thermal_out: dict
    storage_net: dict
    renewable_out: dict
    demand_served: dict

    def injections(self, system, ptdf):
        vec = np.zeros(len(ptdf.bus_ids))
        for u in system.thermal_units:
            vec[ptdf.bus_index(u.bus)] += self.thermal_out[u.id]
        for s in system.storage_units:
            vec[ptdf.bus_index(s.bus)] += self.storage_net[s.id]
        for r in system.renewable_units:
            vec[ptdf.bus_index(r.bus)] += self.renewable_out[r.id]
        for d in system.demands:
            vec[ptdf.bus_index(d.bus)] -= self.demand_served[d.id]
        return vec


def operating_point(system, dispatch, t):
    """Extract hour ``t`` of a DispatchResult or MarketResult as an OperatingPoint."""
    p_neg = getattr(dispatch, "thermal_p_neg", {})
    pd_neg = getattr(dispatch, "storage_pd_neg", {})
    pc_neg = getattr(dispatch, "storage_pc_neg", {})
    thermal_out = {
        u.id: dispatch.thermal_p[u.id][t] + (p_neg[u.id][t] if u.id in p_neg else 0.0)
        for u in system.thermal_units
    }
    storage_net = {}
    for s in system.storage_units:
        net = dispatch.storage_pd[s.id][t] - dispatch.storage_pc[s.id][t]
        if s.id in pd_neg:
            net += pd_neg[s.id][t]
        if s.id in pc_neg:
            net -= pc_neg[s.id][t]
        storage_net[s.id] = net
    renewable_out = {r.id: dispatch.renewable_p[r.id][t] for r in system.renewable_units}
    demand_served = {d.id: dispatch.demand_served[d.id][t] for d in system.demands}
    return OperatingPoint(thermal_out, storage_net, renewable_out, demand_served)


@dataclass
class RedispatchResult:
    hours: list
    up: dict = field(default_factory=dict)
    down: dict = field(default_factory=dict)
    curtailment: dict = field(default_factory=dict)
    shed: dict = field(default_factory=dict)
    post_flows: np.ndarray | None = None
    branch_ids: list = field(default_factory=list)
    cost: np.ndarray | None = None

    @property
    def total_cost(self):
        return float(self.cost.sum()) if self.cost is not None else 0.0


def redispatch(dispatch, system, ptdf=None, hours=None, fix_zonal_positions=True):
    """Make a dispatch grid-feasible hour by hour; returns a RedispatchResult.

    Already-feasible hours produce zero adjustments at zero cost without a
    solve.  Branch-limit rows enter lazily (violated set first, re-screened
    after each solve) since most hours need none.
    """
    if ptdf is None:
        ptdf = build_ptdf(system.buses, system.branches)
    hours = list(range(_dispatch_horizon(dispatch))) if hours is None else list(hours)
    nH = len(hours)
    thermal = system.thermal_units
    renew = system.renewable_units
    demands = system.demands
    ratings = np.array([b.rating for b in system.branches])

    res = RedispatchResult(hours=hours, branch_ids=list(ptdf.branch_ids))
    res.up = {u.id: np.zeros(nH) for u in thermal}
    res.down = {u.id: np.zeros(nH) for u in thermal}
    res.curtailment = {r.id: np.zeros(nH) for r in renew}
    res.shed = {d.id: np.zeros(nH) for d in demands}
    res.post_flows = np.zeros((len(system.branches), nH))
    res.cost = np.zeros(nH)

    for col, t in enumerate(hours):
        point = operating_point(system, dispatch, t)
        base = point.injections(system, ptdf)
        flows = ptdf.matrix @ base
        if np.all(np.abs(flows) <= ratings * (1 + FLOW_TOL)):
            res.post_flows[:, col] = flows
            continue
        sol_values, sol_cost, post = _solve_hour(
            system, ptdf, ratings, point, base, t, fix_zonal_positions
        )
        up_v, down_v, curt_v, shed_v = sol_values
        for k, u in enumerate(thermal):
            res.up[u.id][col] = up_v[k]
            res.down[u.id][col] = down_v[k]
        for k, r in enumerate(renew):
            res.curtailment[r.id][col] = curt_v[k]
        for k, d in enumerate(demands):
            res.shed[d.id][col] = shed_v[k]
        res.post_flows[:, col] = post
        res.cost[col] = sol_cost
    return res


def _solve_hour(system, ptdf, ratings, point, base, t, fix_zonal_positions):
    thermal = system.thermal_units
    renew = system.renewable_units
    demands = system.demands
    nG, nR, nD = len(thermal), len(renew), len(demands)

    p = OptProblem(sense="min", name=f"redispatch[{t}]")
    up = p.add_vars(nG, lo=0.0,
                    hi=[max(u.p_max - point.thermal_out[u.id], 0.0) for u in thermal],
                    obj=[u.marginal_cost[t] for u in thermal])
    down = p.add_vars(nG, lo=0.0, hi=[max(point.thermal_out[u.id], 0.0) for u in thermal])
    curt = p.add_vars(nR, lo=0.0, hi=[max(point.renewable_out[r.id], 0.0) for r in renew])
    shed = p.add_vars(nD, lo=0.0, hi=[max(point.demand_served[d.id], 0.0) for d in demands],
                      obj=[d.shed_cost for d in demands])

    # delta-injection sensitivities per entity column
    cols = np.concatenate([up, down, curt, shed])
    bus_rows = np.array(
        [ptdf.bus_index(u.bus) for u in thermal] * 2
        + [ptdf.bus_index(r.bus) for r in renew]
        + [ptdf.bus_index(d.bus) for d in demands]
    ) if len(cols) else np.zeros(0, dtype=int)
    signs = np.concatenate([np.ones(nG), -np.ones(nG), -np.ones(nR), np.ones(nD)])

    # zonal (or global) energy neutrality of the adjustments
    bus_zone = system.bus_zone()
    if fix_zonal_positions:
        zones = system.zone_ids()
        z_index = {z: k for k, z in enumerate(zones)}
        ent_zone = np.array(
            [z_index[bus_zone[u.bus]] for u in thermal] * 2
            + [z_index[bus_zone[r.bus]] for r in renew]
            + [z_index[bus_zone[d.bus]] for d in demands]
        )
        p.add_rows(ent_zone, cols, signs, "==", np.zeros(len(zones)))
    else:
        p.add_rows(np.zeros(len(cols), dtype=int), cols, signs, "==", [0.0])

    # branch-limit rows enter lazily, seeded with the base-flow violations
    added = set()

    def add_limit(b):
        added.add(b)
        sens = ptdf.matrix[b, bus_rows] * signs
        keep = np.abs(sens) > 1e-12
        rhs_base = float(ptdf.matrix[b] @ base)
        p.add_constr(cols[keep], sens[keep], "<=", ratings[b] - rhs_base)
        p.add_constr(cols[keep], sens[keep], ">=", -ratings[b] - rhs_base)

    for b in np.flatnonzero(np.abs(ptdf.matrix @ base) > ratings * (1 + FLOW_TOL)):
        add_limit(int(b))
    for _ in range(30):
        sol = solve_lp(p)
        if sol.status != "optimal":
            raise RedispatchError(
                f"hour {t}: redispatch infeasible even with curtailment and shedding"
            )
        delta = np.zeros(len(ptdf.bus_ids))
        np.add.at(delta, bus_rows, signs * sol.values[cols])
        post = ptdf.matrix @ (base + delta)
        viol = np.flatnonzero(np.abs(post) > ratings * (1 + FLOW_TOL))
        new = [int(b) for b in viol if int(b) not in added]
        if not new:
            return (
                (sol.values[up], sol.values[down], sol.values[curt], sol.values[shed]),
                sol.objective,
                post,
            )
        for b in new:
            add_limit(b)
    raise RedispatchError(f"hour {t}: branch-limit generation failed to converge")


def solve_dc_opf(system, ptdf=None, hours=None, lp_dump_path=None):
    """Hourly cost-minimal nodal dispatch under branch ratings (DC base case).

    Returns a DispatchResult over the requested hours (all by default) whose
    ``flows`` carry the physical cross-border flows summed over each
    interconnector's member branches.
    """
    from euroem.dispatch import DispatchResult

    if ptdf is None:
        ptdf = build_ptdf(system.buses, system.branches)
    hours = list(range(system.horizon)) if hours is None else list(hours)
    nH = len(hours)
    thermal = system.thermal_units
    storage = system.storage_units
    renew = system.renewable_units
    demands = system.demands
    ratings = np.array([b.rating for b in system.branches])
    branch_map = system.branch_by_id()

    res = DispatchResult(horizon=nH)
    res.thermal_p = {u.id: np.zeros(nH) for u in thermal}
    res.storage_pd = {s.id: np.zeros(nH) for s in storage}
    res.storage_pc = {s.id: np.zeros(nH) for s in storage}
    res.storage_e = {s.id: np.zeros(nH) for s in storage}
    res.storage_sw = {s.id: np.zeros(nH) for s in storage}
    res.renewable_p = {r.id: np.zeros(nH) for r in renew}
    res.demand_served = {d.id: np.zeros(nH) for d in demands}
    res.flows = {
        ic.id: {"forward": np.zeros(nH), "backward": np.zeros(nH)}
        for ic in system.interconnectors
    }
    res.prices = None

    for col, t in enumerate(hours):
        values, cost, flows = _solve_opf_hour(system, ptdf, ratings, t, lp_dump_path)
        xp_v, pd_v, pc_v, e_v, sw_v, xr_v, served_v = values
        for k, u in enumerate(thermal):
            res.thermal_p[u.id][col] = xp_v[k]
        for k, s in enumerate(storage):
            res.storage_pd[s.id][col] = pd_v[k]
            res.storage_pc[s.id][col] = pc_v[k]
            res.storage_e[s.id][col] = e_v[k]
            res.storage_sw[s.id][col] = sw_v[k]
        for k, r in enumerate(renew):
            res.renewable_p[r.id][col] = xr_v[k]
        for k, d in enumerate(demands):
            res.demand_served[d.id][col] = served_v[k]
        res.total_cost += cost
        for ic in system.interconnectors:
            fwd = bwd = 0.0
            for bid in ic.member_branches:
                br = branch_map[bid]
                flow = flows[ptdf.branch_index(bid)]
                # orient member flow in the interconnector's forward direction
                same = system.bus_zone()[br.from_bus] == ic.from_zone
                directed = flow if same else -flow
                if directed >= 0:
                    fwd += directed
                else:
                    bwd -= directed
            res.flows[ic.id]["forward"][col] = fwd
            res.flows[ic.id]["backward"][col] = bwd
    return res


def _solve_opf_hour(system, ptdf, ratings, t, lp_dump_path=None):
    thermal = system.thermal_units
    storage = system.storage_units
    renew = system.renewable_units
    demands = system.demands
    nG, nS, nR, nD = len(thermal), len(storage), len(renew), len(demands)

    p = OptProblem(sense="min", name=f"dcopf[{t}]")
    xp = p.add_vars(nG, lo=[u.p_min for u in thermal], hi=[u.p_max for u in thermal],
                    obj=[u.marginal_cost[t] for u in thermal])
    xpd = p.add_vars(nS, lo=[s.pd_min for s in storage], hi=[s.pd_max for s in storage],
                     obj=[s.vom_cost for s in storage])
    xpc = p.add_vars(nS, lo=[s.pc_min for s in storage], hi=[s.pc_max for s in storage],
                     obj=[s.vom_cost for s in storage])
    xe = p.add_vars(nS, lo=[s.e_min for s in storage], hi=[s.e_max for s in storage])
    xsw = p.add_vars(nS, lo=0.0, hi=[s.sw_max for s in storage])
    xr = p.add_vars(nR, lo=0.0, hi=[r.forecast[t] for r in renew],
                    obj=[r.vom_cost for r in renew])
    shed = p.add_vars(nD, lo=0.0, hi=[d.scheduled[t] for d in demands],
                      obj=[d.shed_cost for d in demands])
    for k, s in enumerate(storage):
        keep = 1.0 - s.sd_rate
        p.add_constr([xe[k], xpc[k], xpd[k], xsw[k]],
                     [1.0, -s.eta_c, 1.0 / s.eta_d, 1.0], "==",
                     s.inflows[t] + keep * s.e_initial)
        p.add_constr([xe[k]], [1.0], ">=", s.e_initial)

    # per-island balance over nodal injections
    entities = (
        [(ptdf.bus_index(u.bus), i, 1.0) for i, u in zip(xp, thermal)]
        + [(ptdf.bus_index(s.bus), i, 1.0) for i, s in zip(xpd, storage)]
        + [(ptdf.bus_index(s.bus), i, -1.0) for i, s in zip(xpc, storage)]
        + [(ptdf.bus_index(r.bus), i, 1.0) for i, r in zip(xr, renew)]
        + [(ptdf.bus_index(d.bus), i, 1.0) for i, d in zip(shed, demands)]
    )
    n_islands = int(ptdf.island_of_bus.max()) + 1 if len(ptdf.bus_ids) else 0
    sched_by_island = np.zeros(n_islands)
    for d in demands:
        sched_by_island[ptdf.island_of_bus[ptdf.bus_index(d.bus)]] += d.scheduled[t]
    if entities:
        rows = np.array([ptdf.island_of_bus[b] for b, _, _ in entities])
        p.add_rows(rows, [i for _, i, _ in entities], [s for _, _, s in entities],
                   "==", sched_by_island)

    bus_rows = np.array([b for b, _, _ in entities], dtype=int)
    cols = np.array([i for _, i, _ in entities], dtype=int)
    signs = np.array([s for _, _, s in entities])
    base_load = np.zeros(len(ptdf.bus_ids))
    for d in demands:
        base_load[ptdf.bus_index(d.bus)] -= d.scheduled[t]

    added = set()
    for _ in range(40):
        sol = solve_lp(p, lp_dump_path=lp_dump_path)
        if sol.status != "optimal":
            raise RedispatchError(f"hour {t}: DC-OPF ended {sol.status}")
        inj = base_load.copy()
        np.add.at(inj, bus_rows, signs * sol.values[cols])
        flows = ptdf.matrix @ inj
        viol = np.flatnonzero(np.abs(flows) > ratings * (1 + FLOW_TOL))
        new = [int(b) for b in viol if int(b) not in added]
        if not new:
            values = (
                sol.values[xp], sol.values[xpd], sol.values[xpc], sol.values[xe],
                sol.values[xsw], sol.values[xr],
                np.array([d.scheduled[t] for d in demands]) - sol.values[shed],
            )
            return values, sol.objective, flows
        for b in new:
            added.add(b)
            sens = ptdf.matrix[b, bus_rows] * signs
            keep = np.abs(sens) > 1e-12
            rhs_base = float(ptdf.matrix[b] @ base_load)
            p.add_constr(cols[keep], sens[keep], "<=", ratings[b] - rhs_base)
            p.add_constr(cols[keep], sens[keep], ">=", -ratings[b] - rhs_base)
    raise RedispatchError(f"hour {t}: DC-OPF branch-limit generation failed to converge")


def apply_redispatch(system, dispatch, red):
    """Post-redispatch operating points per redispatched hour (for security runs)."""
    points = {}
    for col, t in enumerate(red.hours):
        point = operating_point(system, dispatch, t)
        for u in system.thermal_units:
            point.thermal_out[u.id] += red.up[u.id][col] - red.down[u.id][col]
        for r in system.renewable_units:
            point.renewable_out[r.id] -= red.curtailment[r.id][col]
        for d in system.demands:
            point.demand_served[d.id] -= red.shed[d.id][col]
        points[t] = point
    return points


def dump_redispatch_costs(red, path, hours_per_day=24, float_format="%.6f"):
    """Write ``redispatch_costs.csv`` with one total per day."""
    if red.cost is None or len(red.hours) == 0:
        pd.DataFrame(columns=["day", "cost_eur"]).to_csv(path, index=False)
        return
    days = np.array(red.hours) // hours_per_day
    frame = pd.DataFrame({"day": days, "cost_eur": red.cost})
    frame.groupby("day", as_index=False).sum().to_csv(
        path, index=False, float_format=float_format
    )


def _dispatch_horizon(dispatch):
    return dispatch.horizon
