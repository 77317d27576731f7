"""Independent constraint re-evaluation for returned solutions.

Every function walks the stored arrays of a result object and measures the
worst violation of the originating model's constraints with plain
arithmetic, no solver involved.  A healthy solution never exceeds the 1e-6
feasibility tolerance.
"""

from __future__ import annotations

import numpy as np


def check_positions(schedule, system):
    """Max residual of the position-optimization constraints (per unit)."""
    worst = 0.0
    for u in system.thermal_units:
        if u.id not in schedule.thermal:
            continue
        pos = schedule.thermal[u.id]
        p, stat = pos.p, pos.nu_stat
        on, off = pos.nu_on, pos.nu_off
        worst = max(worst, float(np.max(u.p_min * stat - p, initial=0.0)))
        worst = max(worst, float(np.max(p - u.p_max * stat, initial=0.0)))
        if p.size > 1:
            worst = max(worst, float(np.max(np.diff(p) - u.ramp_up, initial=0.0)))
            worst = max(worst, float(np.max(-np.diff(p) - u.ramp_down, initial=0.0)))
            trans = stat[1:] - stat[:-1] - (on[:-1] - off[:-1])
            worst = max(worst, float(np.max(np.abs(trans), initial=0.0)))
        worst = max(worst, float(np.max(on + off - 1, initial=0.0)))
        init = 1 if u.initially_on else 0
        if p.size:
            worst = max(worst, abs(stat[0] - init - (pos.nu_on_init - pos.nu_off_init)))
            worst = max(worst, float(pos.nu_on_init + pos.nu_off_init - 1))
    for s in system.storage_units:
        if s.id not in schedule.storage:
            continue
        pos = schedule.storage[s.id]
        worst = max(worst, _storage_residual(s, pos.pd, pos.pc, pos.e, pos.sw))
    return worst


def _storage_residual(s, pd, pc, e, sw):
    worst = 0.0
    worst = max(worst, float(np.max(s.pd_min - pd, initial=0.0)))
    worst = max(worst, float(np.max(pd - s.pd_max, initial=0.0)))
    worst = max(worst, float(np.max(s.pc_min - pc, initial=0.0)))
    worst = max(worst, float(np.max(pc - s.pc_max, initial=0.0)))
    worst = max(worst, float(np.max(s.e_min - e, initial=0.0)))
    worst = max(worst, float(np.max(e - s.e_max, initial=0.0)))
    worst = max(worst, float(np.max(-sw, initial=0.0)))
    worst = max(worst, float(np.max(sw - s.sw_max, initial=0.0)))
    if e.size:
        keep = 1.0 - s.sd_rate
        prev = np.concatenate([[s.e_initial], e[:-1]])
        recon = keep * prev + s.eta_c * pc - pd / s.eta_d + s.inflows[: e.size] - sw
        worst = max(worst, float(np.max(np.abs(e - recon))))
        worst = max(worst, max(s.e_initial - e[-1], 0.0))
    return worst


def check_market(result, bids, system):
    """Max residual of the market-clearing constraints on a MarketResult."""
    worst = 0.0
    T = result.horizon

    def bound(arr, hi):
        return max(float(np.max(-arr, initial=0.0)), float(np.max(arr - hi, initial=0.0)))

    for uid, curve in bids.thermal.items():
        worst = max(worst, bound(result.thermal_p[uid], curve.qty_pos))
        worst = max(worst, bound(result.thermal_p_neg[uid], curve.qty_neg))
    for uid, curve in bids.discharge.items():
        worst = max(worst, bound(result.storage_pd[uid], curve.qty_pos))
        worst = max(worst, bound(result.storage_pd_neg[uid], curve.qty_neg))
    for uid, curve in bids.charge.items():
        worst = max(worst, bound(result.storage_pc[uid], curve.qty_pos))
        worst = max(worst, bound(result.storage_pc_neg[uid], curve.qty_neg))
    for r in system.renewable_units:
        worst = max(worst, bound(result.renewable_p[r.id], r.forecast[:T]))
    for d in system.demands:
        worst = max(worst, bound(result.demand_served[d.id], d.scheduled[:T]))
    for ic in system.interconnectors:
        worst = max(worst, bound(result.flows[ic.id]["forward"], ic.ntc_forward))
        worst = max(worst, bound(result.flows[ic.id]["backward"], ic.ntc_backward))
    for u in system.thermal_units:
        total = result.thermal_p[u.id] + result.thermal_p_neg[u.id]
        if total.size > 1:
            worst = max(worst, float(np.max(np.diff(total) - u.ramp_up, initial=0.0)))
            worst = max(worst, float(np.max(-np.diff(total) - u.ramp_down, initial=0.0)))
    worst = max(worst, _market_balance_residual(result, system))
    return worst


def _market_balance_residual(result, system):
    T = result.horizon
    bus_zone = system.bus_zone()
    residual = {z: np.zeros(T) for z in system.zone_ids()}
    for u in system.thermal_units:
        residual[bus_zone[u.bus]] += result.thermal_p[u.id] + result.thermal_p_neg[u.id]
    for s in system.storage_units:
        residual[bus_zone[s.bus]] += (
            result.storage_pd[s.id] + result.storage_pd_neg[s.id]
            - result.storage_pc[s.id] - result.storage_pc_neg[s.id]
        )
    for r in system.renewable_units:
        residual[bus_zone[r.bus]] += result.renewable_p[r.id]
    for d in system.demands:
        residual[bus_zone[d.bus]] -= result.demand_served[d.id]
    for ic in system.interconnectors:
        residual[ic.from_zone] -= result.flows[ic.id]["forward"]
        residual[ic.to_zone] += result.flows[ic.id]["forward"]
        residual[ic.from_zone] += result.flows[ic.id]["backward"]
        residual[ic.to_zone] -= result.flows[ic.id]["backward"]
    return max(float(np.max(np.abs(r), initial=0.0)) for r in residual.values())


def check_dispatch(result, system, commitment=None):
    """Max residual of the ED (or, with a commitment schedule, UC) constraints."""
    worst = 0.0
    T = result.horizon
    for u in system.thermal_units:
        p = result.thermal_p[u.id]
        if commitment is None:
            worst = max(worst, float(np.max(u.p_min - p, initial=0.0)))
            worst = max(worst, float(np.max(p - u.p_max, initial=0.0)))
        else:
            stat = commitment.nu_stat[u.id]
            on, off = commitment.nu_on[u.id], commitment.nu_off[u.id]
            worst = max(worst, float(np.max(u.p_min * stat - p, initial=0.0)))
            worst = max(worst, float(np.max(p - u.p_max * stat, initial=0.0)))
            if T > 1:
                trans = stat[1:] - stat[:-1] - (on[:-1] - off[:-1])
                worst = max(worst, float(np.max(np.abs(trans), initial=0.0)))
            worst = max(worst, float(np.max(on + off - 1, initial=0.0)))
        if T > 1:
            worst = max(worst, float(np.max(np.diff(p) - u.ramp_up, initial=0.0)))
            worst = max(worst, float(np.max(-np.diff(p) - u.ramp_down, initial=0.0)))
    for s in system.storage_units:
        worst = max(worst, _storage_residual(
            s, result.storage_pd[s.id], result.storage_pc[s.id],
            result.storage_e[s.id], result.storage_sw[s.id],
        ))
    for r in system.renewable_units:
        pr = result.renewable_p[r.id]
        worst = max(worst, float(np.max(-pr, initial=0.0)))
        worst = max(worst, float(np.max(pr - r.forecast[:T], initial=0.0)))
    for d in system.demands:
        served = result.demand_served[d.id]
        worst = max(worst, float(np.max(-served, initial=0.0)))
        worst = max(worst, float(np.max(served - d.scheduled[:T], initial=0.0)))
    for ic in system.interconnectors:
        for direction, cap in (("forward", ic.ntc_forward), ("backward", ic.ntc_backward)):
            f = result.flows[ic.id][direction]
            worst = max(worst, float(np.max(-f, initial=0.0)))
            worst = max(worst, float(np.max(f - cap, initial=0.0)))
    worst = max(worst, _dispatch_balance_residual(result, system))
    return worst


def _dispatch_balance_residual(result, system):
    T = result.horizon
    bus_zone = system.bus_zone()
    residual = {z: np.zeros(T) for z in system.zone_ids()}
    for u in system.thermal_units:
        residual[bus_zone[u.bus]] += result.thermal_p[u.id]
    for s in system.storage_units:
        residual[bus_zone[s.bus]] += result.storage_pd[s.id] - result.storage_pc[s.id]
    for r in system.renewable_units:
        residual[bus_zone[r.bus]] += result.renewable_p[r.id]
    for d in system.demands:
        residual[bus_zone[d.bus]] -= result.demand_served[d.id]
    for ic in system.interconnectors:
        residual[ic.from_zone] -= result.flows[ic.id]["forward"]
        residual[ic.to_zone] += result.flows[ic.id]["forward"]
        residual[ic.from_zone] += result.flows[ic.id]["backward"]
        residual[ic.to_zone] -= result.flows[ic.id]["backward"]
    return max(float(np.max(np.abs(r), initial=0.0)) for r in residual.values())
