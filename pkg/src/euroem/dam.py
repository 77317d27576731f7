"""Copper-plate day-ahead market clearing.

A social-welfare-maximizing LP over the submitted bid set: zonal balance per
hour, bid-bound limits, ramp coupling of each thermal unit's total cleared
volume (linked-block style), and NTC-limited directed flows between zones.
Zonal clearing prices are the duals of the balance rows.

The whole horizon clears as a single LP by default; ``block_hours`` switches
to sequential blocks (e.g. 24 h market sessions) with ramp linking across
block edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from euroem.solver import OptProblem, solve_lp


class MarketError(RuntimeError):
    pass


@dataclass
class MarketResult:
    horizon: int
    thermal_p: dict = field(default_factory=dict)
    thermal_p_neg: dict = field(default_factory=dict)
    storage_pd: dict = field(default_factory=dict)
    storage_pd_neg: dict = field(default_factory=dict)
    storage_pc: dict = field(default_factory=dict)
    storage_pc_neg: dict = field(default_factory=dict)
    renewable_p: dict = field(default_factory=dict)
    demand_served: dict = field(default_factory=dict)
    flows: dict = field(default_factory=dict)
    prices: dict | None = None
    ntc_duals: dict = field(default_factory=dict)
    objective: float = 0.0

    def thermal_total(self, uid):
        return self.thermal_p[uid] + self.thermal_p_neg[uid]

    def storage_discharge_total(self, uid):
        return self.storage_pd[uid] + self.storage_pd_neg[uid]

    def storage_charge_total(self, uid):
        return self.storage_pc[uid] + self.storage_pc_neg[uid]


def clear_market(bids, system, renewable_priority=False, block_hours=None, lp_dump_path=None):
    """Clear the day-ahead market over the bid set; returns a MarketResult.

    ``renewable_priority`` turns the renewable cap into an equality so their
    forecast always clears (may price negative, may be infeasible when forced
    generation cannot be absorbed; the error lists the binding hours).
    """
    T = system.horizon
    if bids.horizon != T:
        raise MarketError(f"bid horizon {bids.horizon} != system horizon {T}")
    result = MarketResult(horizon=T)
    if T == 0:
        result.prices = {z: np.zeros(0) for z in system.zone_ids()}
        return result

    if block_hours is None or block_hours >= T:
        chunks = [(0, T)]
    else:
        chunks = [(h, min(h + block_hours, T)) for h in range(0, T, block_hours)]

    merged = None
    prev_total = None
    for h0, h1 in chunks:
        part = _clear_block(bids, system, h0, h1, renewable_priority, prev_total, lp_dump_path)
        merged = part if merged is None else _concat_results(merged, part)
        prev_total = {uid: part.thermal_total(uid)[-1] for uid in part.thermal_p}
    merged.horizon = T
    return merged


def extract_prices(result):
    """Zonal clearing price series from the stored balance duals (€/MWh)."""
    if result.prices is None:
        raise MarketError("clearing prices unavailable: no duals were stored")
    return result.prices


def _clear_block(bids, system, h0, h1, renewable_priority, prev_total, lp_dump_path):
    Tb = h1 - h0
    zones = system.zone_ids()
    z_index = {z: k for k, z in enumerate(zones)}
    bus_zone = system.bus_zone()
    nZ = len(zones)

    thermal = system.thermal_units
    storage = system.storage_units
    renew = system.renewable_units
    demands = system.demands
    ics = system.interconnectors

    for u in thermal:
        if u.id not in bids.thermal:
            raise MarketError(f"unit {u.id}: no thermal bid covers it")
    for s in storage:
        if s.id not in bids.discharge or s.id not in bids.charge:
            raise MarketError(f"unit {s.id}: no storage bid covers it")

    p = OptProblem(sense="max", name=f"dam[{h0}:{h1}]")

    def block(units, qty, obj, lo=None):
        n = len(units)
        if n == 0:
            return np.zeros((0, Tb), dtype=int)
        hi = np.concatenate([qty(u)[h0:h1] for u in units])
        coef = np.concatenate([obj(u)[h0:h1] for u in units])
        lo_arr = 0.0 if lo is None else np.concatenate([lo(u)[h0:h1] for u in units])
        idx = p.add_vars(n * Tb, lo=lo_arr, hi=hi, obj=coef)
        return idx.reshape(n, Tb)

    const = lambda v: (lambda u: np.full(bids.horizon, v))  # noqa: E731

    xp = block(thermal, lambda u: bids.thermal[u.id].qty_pos,
               lambda u: -bids.thermal[u.id].price_pos)
    xpn = block(thermal, lambda u: bids.thermal[u.id].qty_neg,
                lambda u: -bids.thermal[u.id].price_neg)
    xpd = block(storage, lambda u: bids.discharge[u.id].qty_pos,
                lambda u: -bids.discharge[u.id].price_pos)
    xpdn = block(storage, lambda u: bids.discharge[u.id].qty_neg,
                 lambda u: -bids.discharge[u.id].price_neg)
    xpc = block(storage, lambda u: bids.charge[u.id].qty_pos,
                lambda u: bids.charge[u.id].price_pos)
    xpcn = block(storage, lambda u: bids.charge[u.id].qty_neg,
                 lambda u: bids.charge[u.id].price_neg)
    # under renewable priority the forecast clears exactly (lo = hi = forecast)
    xr = block(renew, lambda u: u.forecast, lambda u: const(-u.vom_cost)(u),
               lo=(lambda u: u.forecast) if renewable_priority else None)
    xd = block(demands, lambda u: u.scheduled, lambda u: const(u.bid_price)(u))

    # directed flow variables per interconnector
    nIC = len(ics)
    f_fwd = p.add_vars(nIC * Tb, lo=0.0).reshape(nIC, Tb) if nIC else np.zeros((0, Tb), dtype=int)
    f_bwd = p.add_vars(nIC * Tb, lo=0.0).reshape(nIC, Tb) if nIC else np.zeros((0, Tb), dtype=int)

    # zonal balance rows: supply + imports - consumption - exports = 0
    rows, cols, vals = [], [], []

    def add_balance(idx2d, units, sign):
        if idx2d.size == 0:
            return
        zidx = np.array([z_index[bus_zone[u.bus]] for u in units])
        rows.append((np.repeat(zidx, Tb) * Tb + np.tile(np.arange(Tb), len(units))))
        cols.append(idx2d.ravel())
        vals.append(np.full(idx2d.size, float(sign)))

    add_balance(xp, thermal, +1)
    add_balance(xpn, thermal, +1)
    add_balance(xpd, storage, +1)
    add_balance(xpdn, storage, +1)
    add_balance(xpc, storage, -1)
    add_balance(xpcn, storage, -1)
    add_balance(xr, renew, +1)
    add_balance(xd, demands, -1)
    for k, ic in enumerate(ics):
        za, zb = z_index[ic.from_zone], z_index[ic.to_zone]
        t = np.arange(Tb)
        rows += [za * Tb + t, zb * Tb + t, zb * Tb + t, za * Tb + t]
        cols += [f_fwd[k], f_fwd[k], f_bwd[k], f_bwd[k]]
        vals += [-np.ones(Tb), np.ones(Tb), -np.ones(Tb), np.ones(Tb)]

    bal_names = [("bal", z, h0 + t) for z in zones for t in range(Tb)]
    p.add_rows(np.concatenate(rows) if rows else [], np.concatenate(cols) if cols else [],
               np.concatenate(vals) if vals else [], "==", np.zeros(nZ * Tb), names=bal_names)

    # NTC caps as named rows so congestion duals are observable
    for k, ic in enumerate(ics):
        for dir_name, idx, cap in (("forward", f_fwd[k], ic.ntc_forward),
                                   ("backward", f_bwd[k], ic.ntc_backward)):
            p.add_rows(np.arange(Tb), idx, np.ones(Tb), "<=", np.full(Tb, cap),
                       names=[("ntc", ic.id, dir_name, h0 + t) for t in range(Tb)])

    # ramp coupling on each thermal unit's total cleared volume
    nG = len(thermal)
    if nG and Tb > 1:
        ru = np.repeat(np.array([u.ramp_up for u in thermal]), Tb - 1)
        rd = np.repeat(np.array([u.ramp_down for u in thermal]), Tb - 1)
        r = np.arange(nG * (Tb - 1))
        rows4 = np.repeat(r, 4)
        cols4 = np.column_stack([xp[:, 1:].ravel(), xpn[:, 1:].ravel(),
                                 xp[:, :-1].ravel(), xpn[:, :-1].ravel()]).ravel()
        vals4 = np.tile([1.0, 1.0, -1.0, -1.0], nG * (Tb - 1))
        p.add_rows(rows4, cols4, vals4, "<=", ru)
        p.add_rows(rows4, cols4, vals4, ">=", -rd)
    if nG and prev_total is not None:
        # link the block edge to the previous block's last cleared total
        for k, u in enumerate(thermal):
            prev = prev_total[u.id]
            p.add_constr([xp[k, 0], xpn[k, 0]], [1.0, 1.0], "<=", prev + u.ramp_up)
            p.add_constr([xp[k, 0], xpn[k, 0]], [1.0, 1.0], ">=", max(prev - u.ramp_down, 0.0))

    sol = solve_lp(p, lp_dump_path=lp_dump_path)
    if sol.status != "optimal":
        if renewable_priority:
            hours = _diagnose_priority_infeasibility(bids, system, h0, h1)
            raise MarketError(
                "market infeasible under renewable priority; binding hours: "
                + ", ".join(map(str, hours))
            )
        raise MarketError(f"market clearing ended {sol.status}")

    v = sol.values
    res = MarketResult(horizon=Tb)
    res.objective = sol.objective
    res.thermal_p = {u.id: v[xp[k]].copy() for k, u in enumerate(thermal)}
    res.thermal_p_neg = {u.id: v[xpn[k]].copy() for k, u in enumerate(thermal)}
    res.storage_pd = {u.id: v[xpd[k]].copy() for k, u in enumerate(storage)}
    res.storage_pd_neg = {u.id: v[xpdn[k]].copy() for k, u in enumerate(storage)}
    res.storage_pc = {u.id: v[xpc[k]].copy() for k, u in enumerate(storage)}
    res.storage_pc_neg = {u.id: v[xpcn[k]].copy() for k, u in enumerate(storage)}
    res.renewable_p = {u.id: v[xr[k]].copy() for k, u in enumerate(renew)}
    res.demand_served = {u.id: v[xd[k]].copy() for k, u in enumerate(demands)}
    res.flows = {
        ic.id: {"forward": v[f_fwd[k]].copy(), "backward": v[f_bwd[k]].copy()}
        for k, ic in enumerate(ics)
    }
    # balance row written supply-minus-consumption; for a max problem the
    # welfare value of one extra MW of demand is minus the row dual
    res.prices = {
        z: np.array([-sol.duals[("bal", z, h0 + t)] for t in range(Tb)]) for z in zones
    }
    res.ntc_duals = {
        (ic.id, d): np.array([sol.duals[("ntc", ic.id, d, h0 + t)] for t in range(Tb)])
        for ic in ics
        for d in ("forward", "backward")
    }
    return res


def _concat_results(a, b):
    def cat(da, db):
        return {k: np.concatenate([da[k], db[k]]) for k in da}

    a.thermal_p = cat(a.thermal_p, b.thermal_p)
    a.thermal_p_neg = cat(a.thermal_p_neg, b.thermal_p_neg)
    a.storage_pd = cat(a.storage_pd, b.storage_pd)
    a.storage_pd_neg = cat(a.storage_pd_neg, b.storage_pd_neg)
    a.storage_pc = cat(a.storage_pc, b.storage_pc)
    a.storage_pc_neg = cat(a.storage_pc_neg, b.storage_pc_neg)
    a.renewable_p = cat(a.renewable_p, b.renewable_p)
    a.demand_served = cat(a.demand_served, b.demand_served)
    a.flows = {
        k: {d: np.concatenate([a.flows[k][d], b.flows[k][d]]) for d in ("forward", "backward")}
        for k in a.flows
    }
    a.prices = cat(a.prices, b.prices)
    a.ntc_duals = cat(a.ntc_duals, b.ntc_duals)
    a.objective += b.objective
    return a


def _diagnose_priority_infeasibility(bids, system, h0, h1):
    """Hours where forced renewable generation exceeds what can be absorbed."""
    zones = system.zone_ids()
    bus_zone = system.bus_zone()
    hours = []
    for t in range(h0, h1):
        forced = {z: 0.0 for z in zones}
        absorb = {z: 0.0 for z in zones}
        export = {z: 0.0 for z in zones}
        for u in system.renewable_units:
            forced[bus_zone[u.bus]] += u.forecast[t]
        for d in system.demands:
            absorb[bus_zone[d.bus]] += d.scheduled[t]
        for s in system.storage_units:
            curve_c = bids.charge[s.id]
            absorb[bus_zone[s.bus]] += curve_c.qty_pos[t] + curve_c.qty_neg[t]
        for ic in system.interconnectors:
            export[ic.from_zone] += ic.ntc_forward
            export[ic.to_zone] += ic.ntc_backward
        system_gap = sum(forced.values()) - sum(absorb.values())
        zone_gap = max(forced[z] - absorb[z] - export[z] for z in zones)
        if system_gap > 1e-9 or zone_gap > 1e-9:
            hours.append(t)
    return hours


def dump_market_result(result, prefix, float_format="%.6f"):
    """Write market_result.csv / prices.csv / flows.csv under a path prefix."""
    records = []
    groups = [
        ("thermal_p", result.thermal_p),
        ("thermal_p_neg", result.thermal_p_neg),
        ("storage_pd", result.storage_pd),
        ("storage_pd_neg", result.storage_pd_neg),
        ("storage_pc", result.storage_pc),
        ("storage_pc_neg", result.storage_pc_neg),
        ("renewable_p", result.renewable_p),
        ("demand_served", result.demand_served),
    ]
    for var, group in groups:
        for uid, arr in group.items():
            for t in range(result.horizon):
                records.append((uid, t, var, arr[t]))
    pd.DataFrame.from_records(records, columns=["unit", "hour", "variable", "value"]).to_csv(
        f"{prefix}market_result.csv", index=False, float_format=float_format
    )
    dump_prices(result.prices, f"{prefix}prices.csv", float_format)
    flow_records = [
        (ic, t, d, arrs[d][t])
        for ic, arrs in result.flows.items()
        for d in ("forward", "backward")
        for t in range(result.horizon)
    ]
    pd.DataFrame.from_records(
        flow_records, columns=["interconnector", "hour", "direction", "mw"]
    ).to_csv(f"{prefix}flows.csv", index=False, float_format=float_format)


def dump_prices(prices, path, float_format="%.6f"):
    records = [
        (z, t, arr[t]) for z, arr in (prices or {}).items() for t in range(len(arr))
    ]
    pd.DataFrame.from_records(records, columns=["zone", "hour", "price_eur_mwh"]).to_csv(
        path, index=False, float_format=float_format
    )
