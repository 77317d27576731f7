"""Cost-minimization baselines: economic dispatch and unit commitment.

Both models dispatch the full system against scheduled demand with
demand-shedding slack, zonal balance with NTC-limited exchange, thermal
ramps, and storage state-of-charge cycling (terminal level at least the
initial level).  Economic dispatch keeps every thermal unit within
``[p_min, p_max]`` with no off state; unit commitment scales those bounds
with on/off binaries and charges start/stop costs.

Zonal prices come from the balance-row duals of the dispatch LP, so they
exist for economic dispatch only; the binaries make them unavailable for
unit commitment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from euroem.solver import BINARY, OptProblem, solve_lp, solve_milp


class DispatchError(RuntimeError):
    pass


@dataclass
class DispatchResult:
    horizon: int
    thermal_p: dict = field(default_factory=dict)
    storage_pd: dict = field(default_factory=dict)
    storage_pc: dict = field(default_factory=dict)
    storage_e: dict = field(default_factory=dict)
    storage_sw: dict = field(default_factory=dict)
    renewable_p: dict = field(default_factory=dict)
    demand_served: dict = field(default_factory=dict)
    flows: dict = field(default_factory=dict)
    prices: dict | None = None
    total_cost: float = 0.0


@dataclass
class CommitmentSchedule:
    nu_stat: dict = field(default_factory=dict)
    nu_on: dict = field(default_factory=dict)
    nu_off: dict = field(default_factory=dict)
    nu_on_init: dict = field(default_factory=dict)
    nu_off_init: dict = field(default_factory=dict)


def economic_dispatch(system, block_hours=None, lp_dump_path=None):
    """Eq.-style cost-minimal LP dispatch; returns a DispatchResult with prices."""
    result, _ = _dispatch(system, commitment=False, block_hours=block_hours,
                          lp_dump_path=lp_dump_path)
    return result


def unit_commitment(system, rel_gap=1e-6, block_hours=None, lp_dump_path=None):
    """Cost-minimal MILP with start/stop binaries; returns (result, commitment)."""
    return _dispatch(system, commitment=True, rel_gap=rel_gap, block_hours=block_hours,
                     lp_dump_path=lp_dump_path)


def _dispatch(system, commitment, rel_gap=1e-6, block_hours=None, lp_dump_path=None):
    T = system.horizon
    result = DispatchResult(horizon=T)
    commit = CommitmentSchedule() if commitment else None
    if T == 0:
        result.prices = None if commitment else {z: np.zeros(0) for z in system.zone_ids()}
        return result, commit

    if block_hours is None or block_hours >= T:
        chunks = [(0, T)]
    else:
        chunks = [(h, min(h + block_hours, T)) for h in range(0, T, block_hours)]

    state = None
    parts = []
    for h0, h1 in chunks:
        part, part_commit, state = _solve_block(
            system, h0, h1, commitment, rel_gap, state, lp_dump_path
        )
        parts.append((part, part_commit))

    merged, merged_commit = parts[0]
    for part, part_commit in parts[1:]:
        _merge(merged, part)
        if commitment:
            _merge_commit(merged_commit, part_commit)
    merged.horizon = T
    return merged, merged_commit


def _solve_block(system, h0, h1, commitment, rel_gap, chain, lp_dump_path):
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
    nG, nS, nR, nD, nIC = len(thermal), len(storage), len(renew), len(demands), len(ics)

    p = OptProblem(sense="min", name=f"{'uc' if commitment else 'ed'}[{h0}:{h1}]")

    def grid2d(idx, n):
        return idx.reshape(n, Tb) if n else np.zeros((0, Tb), dtype=int)

    cost_g = np.concatenate([u.marginal_cost[h0:h1] for u in thermal]) if nG else np.zeros(0)
    if commitment:
        xp = grid2d(p.add_vars(nG * Tb, lo=0.0,
                               hi=np.repeat([u.p_max for u in thermal], Tb), obj=cost_g), nG)
        stat = grid2d(p.add_vars(nG * Tb, lo=0.0, hi=1.0, kind=BINARY), nG)
        on = grid2d(p.add_vars(nG * Tb, lo=0.0, hi=1.0, kind=BINARY,
                               obj=np.repeat([u.startup_cost for u in thermal], Tb)), nG)
        off = grid2d(p.add_vars(nG * Tb, lo=0.0, hi=1.0, kind=BINARY,
                                obj=np.repeat([u.shutdown_cost for u in thermal], Tb)), nG)
        on0 = p.add_vars(nG, lo=0.0, hi=1.0, kind=BINARY,
                         obj=[u.startup_cost for u in thermal])
        off0 = p.add_vars(nG, lo=0.0, hi=1.0, kind=BINARY,
                          obj=[u.shutdown_cost for u in thermal])
        # p_min*stat <= P <= p_max*stat
        if nG:
            r = np.repeat(np.arange(nG * Tb), 2)
            c = np.column_stack([xp.ravel(), stat.ravel()]).ravel()
            p.add_rows(r, c, np.column_stack(
                [np.ones(nG * Tb), -np.repeat([u.p_min for u in thermal], Tb)]).ravel(),
                ">=", np.zeros(nG * Tb))
            p.add_rows(r, c, np.column_stack(
                [np.ones(nG * Tb), -np.repeat([u.p_max for u in thermal], Tb)]).ravel(),
                "<=", np.zeros(nG * Tb))
    else:
        xp = grid2d(p.add_vars(nG * Tb,
                               lo=np.repeat([u.p_min for u in thermal], Tb),
                               hi=np.repeat([u.p_max for u in thermal], Tb),
                               obj=cost_g), nG)
        stat = on = off = on0 = off0 = None

    vom_s = np.repeat([s.vom_cost for s in storage], Tb)
    xpd = grid2d(p.add_vars(nS * Tb, lo=np.repeat([s.pd_min for s in storage], Tb),
                            hi=np.repeat([s.pd_max for s in storage], Tb), obj=vom_s), nS)
    xpc = grid2d(p.add_vars(nS * Tb, lo=np.repeat([s.pc_min for s in storage], Tb),
                            hi=np.repeat([s.pc_max for s in storage], Tb), obj=vom_s), nS)
    xe = grid2d(p.add_vars(nS * Tb, lo=np.repeat([s.e_min for s in storage], Tb),
                           hi=np.repeat([s.e_max for s in storage], Tb)), nS)
    # spillage is free in the dispatch LP and charged only under commitment
    xsw = grid2d(p.add_vars(nS * Tb, lo=0.0,
                            hi=np.repeat([s.sw_max for s in storage], Tb),
                            obj=vom_s if commitment else 0.0), nS)
    xr = grid2d(p.add_vars(nR * Tb, lo=0.0,
                           hi=np.concatenate([u.forecast[h0:h1] for u in renew]) if nR else 0.0,
                           obj=np.repeat([u.vom_cost for u in renew], Tb)), nR)
    shed = grid2d(p.add_vars(nD * Tb, lo=0.0,
                             hi=np.concatenate([d.scheduled[h0:h1] for d in demands]) if nD else 0.0,
                             obj=np.repeat([d.shed_cost for d in demands], Tb)), nD)
    f_fwd = grid2d(p.add_vars(nIC * Tb, lo=0.0,
                              hi=np.repeat([ic.ntc_forward for ic in ics], Tb)), nIC)
    f_bwd = grid2d(p.add_vars(nIC * Tb, lo=0.0,
                              hi=np.repeat([ic.ntc_backward for ic in ics], Tb)), nIC)

    # zonal balance: supply + shed + imports - exports = scheduled demand
    rows, cols, vals = [], [], []

    def balance(idx2d, entities, sign):
        if idx2d.size == 0:
            return
        zidx = np.array([z_index[bus_zone[e.bus]] for e in entities])
        rows.append(np.repeat(zidx, Tb) * Tb + np.tile(np.arange(Tb), len(entities)))
        cols.append(idx2d.ravel())
        vals.append(np.full(idx2d.size, float(sign)))

    balance(xp, thermal, +1)
    balance(xpd, storage, +1)
    balance(xpc, storage, -1)
    balance(xr, renew, +1)
    balance(shed, demands, +1)
    for k, ic in enumerate(ics):
        za, zb = z_index[ic.from_zone], z_index[ic.to_zone]
        t = np.arange(Tb)
        rows += [za * Tb + t, zb * Tb + t, zb * Tb + t, za * Tb + t]
        cols += [f_fwd[k], f_fwd[k], f_bwd[k], f_bwd[k]]
        vals += [-np.ones(Tb), np.ones(Tb), -np.ones(Tb), np.ones(Tb)]

    sched_by_zone = np.zeros((nZ, Tb))
    for d in demands:
        sched_by_zone[z_index[bus_zone[d.bus]]] += d.scheduled[h0:h1]
    bal_names = [("bal", z, h0 + t) for z in zones for t in range(Tb)]
    p.add_rows(np.concatenate(rows) if rows else [], np.concatenate(cols) if cols else [],
               np.concatenate(vals) if vals else [], "==", sched_by_zone.ravel(),
               names=bal_names)

    # thermal ramps (and, under commitment, status transitions)
    if nG and Tb > 1:
        r = np.repeat(np.arange(nG * (Tb - 1)), 2)
        c = np.column_stack([xp[:, 1:].ravel(), xp[:, :-1].ravel()]).ravel()
        v = np.tile([1.0, -1.0], nG * (Tb - 1))
        p.add_rows(r, c, v, "<=", np.repeat([u.ramp_up for u in thermal], Tb - 1))
        p.add_rows(r, c, v, ">=", -np.repeat([u.ramp_down for u in thermal], Tb - 1))
    if commitment and nG:
        if Tb > 1:
            r = np.repeat(np.arange(nG * (Tb - 1)), 4)
            c = np.column_stack([stat[:, 1:].ravel(), stat[:, :-1].ravel(),
                                 on[:, :-1].ravel(), off[:, :-1].ravel()]).ravel()
            p.add_rows(r, c, np.tile([1.0, -1.0, -1.0, 1.0], nG * (Tb - 1)),
                       "==", np.zeros(nG * (Tb - 1)))
        r = np.repeat(np.arange(nG * Tb), 2)
        p.add_rows(r, np.column_stack([on.ravel(), off.ravel()]).ravel(),
                   np.ones(2 * nG * Tb), "<=", np.ones(nG * Tb))
        init_stat = np.array(
            [1.0 if u.initially_on else 0.0 for u in thermal]
        ) if chain is None else chain["stat"]
        r = np.repeat(np.arange(nG), 3)
        c = np.column_stack([stat[:, 0], on0, off0]).ravel()
        p.add_rows(r, c, np.tile([1.0, -1.0, 1.0], nG), "==", init_stat)
        r = np.repeat(np.arange(nG), 2)
        p.add_rows(r, np.column_stack([on0, off0]).ravel(), np.ones(2 * nG),
                   "<=", np.ones(nG))
    if chain is not None and nG:
        for k, u in enumerate(thermal):
            prev = chain["p"][k]
            p.add_constr([xp[k, 0]], [1.0], "<=", prev + u.ramp_up)
            p.add_constr([xp[k, 0]], [1.0], ">=", max(prev - u.ramp_down, 0.0))

    # storage SoC recursion, chained across blocks; terminal >= block-start level
    e_start = np.array([s.e_initial for s in storage]) if chain is None else chain["e"]
    for k, s in enumerate(storage):
        keep = 1.0 - s.sd_rate
        inflow = s.inflows[h0:h1]
        p.add_constr([xe[k, 0], xpc[k, 0], xpd[k, 0], xsw[k, 0]],
                     [1.0, -s.eta_c, 1.0 / s.eta_d, 1.0], "==",
                     inflow[0] + keep * e_start[k])
        if Tb > 1:
            r = np.repeat(np.arange(Tb - 1), 5)
            c = np.column_stack([xe[k, 1:], xe[k, :-1], xpc[k, 1:], xpd[k, 1:], xsw[k, 1:]]).ravel()
            v = np.tile([1.0, -keep, -s.eta_c, 1.0 / s.eta_d, 1.0], Tb - 1)
            p.add_rows(r, c, v, "==", inflow[1:])
        p.add_constr([xe[k, Tb - 1]], [1.0], ">=", e_start[k])

    if commitment:
        sol = solve_milp(p, rel_gap=rel_gap, lp_dump_path=lp_dump_path)
    else:
        sol = solve_lp(p, lp_dump_path=lp_dump_path)
    if sol.status != "optimal":
        raise DispatchError(_diagnose(system, h0, h1, commitment, sol.status))

    v = sol.values
    res = DispatchResult(horizon=Tb)
    res.total_cost = sol.objective
    res.thermal_p = {u.id: v[xp[k]].copy() for k, u in enumerate(thermal)}
    res.storage_pd = {s.id: v[xpd[k]].copy() for k, s in enumerate(storage)}
    res.storage_pc = {s.id: v[xpc[k]].copy() for k, s in enumerate(storage)}
    res.storage_e = {s.id: v[xe[k]].copy() for k, s in enumerate(storage)}
    res.storage_sw = {s.id: v[xsw[k]].copy() for k, s in enumerate(storage)}
    res.renewable_p = {u.id: v[xr[k]].copy() for k, u in enumerate(renew)}
    res.demand_served = {
        d.id: d.scheduled[h0:h1] - v[shed[k]] for k, d in enumerate(demands)
    }
    res.flows = {
        ic.id: {"forward": v[f_fwd[k]].copy(), "backward": v[f_bwd[k]].copy()}
        for k, ic in enumerate(ics)
    }
    commit_part = None
    if commitment:
        res.prices = None
        commit_part = CommitmentSchedule(
            nu_stat={u.id: np.rint(v[stat[k]]).astype(int) for k, u in enumerate(thermal)},
            nu_on={u.id: np.rint(v[on[k]]).astype(int) for k, u in enumerate(thermal)},
            nu_off={u.id: np.rint(v[off[k]]).astype(int) for k, u in enumerate(thermal)},
            nu_on_init={u.id: int(round(v[on0[k]])) for k, u in enumerate(thermal)},
            nu_off_init={u.id: int(round(v[off0[k]])) for k, u in enumerate(thermal)},
        )
        state = {
            "p": np.array([res.thermal_p[u.id][-1] for u in thermal]),
            "stat": np.array([commit_part.nu_stat[u.id][-1] for u in thermal], dtype=float),
            "e": np.array([res.storage_e[s.id][-1] for s in storage]),
        }
    else:
        res.prices = {
            z: np.array([sol.duals[("bal", z, h0 + t)] for t in range(Tb)]) for z in zones
        }
        state = {
            "p": np.array([res.thermal_p[u.id][-1] for u in thermal]),
            "e": np.array([res.storage_e[s.id][-1] for s in storage]),
        }
    return res, commit_part, state


def _diagnose(system, h0, h1, commitment, status):
    """Human-readable infeasibility reason, e.g. a forced-minimum surplus."""
    head = f"{'unit commitment' if commitment else 'economic dispatch'} ended {status}"
    if commitment:
        return head
    worst = None
    for t in range(h0, h1):
        forced = sum(u.p_min for u in system.thermal_units) + sum(
            s.pd_min for s in system.storage_units
        )
        absorb = sum(d.scheduled[t] for d in system.demands) + sum(
            s.pc_max for s in system.storage_units
        )
        surplus = forced - absorb
        if surplus > 0 and (worst is None or surplus > worst[1]):
            worst = (t, surplus)
    if worst is not None:
        return (
            f"{head}: forced minimum generation exceeds demand plus charging by "
            f"{worst[1]:.3f} MW at hour {worst[0]}"
        )
    return head


def _merge(a, b):
    for attr in ("thermal_p", "storage_pd", "storage_pc", "storage_e", "storage_sw",
                 "renewable_p", "demand_served"):
        da, db = getattr(a, attr), getattr(b, attr)
        for k in da:
            da[k] = np.concatenate([da[k], db[k]])
    for k in a.flows:
        for d in ("forward", "backward"):
            a.flows[k][d] = np.concatenate([a.flows[k][d], b.flows[k][d]])
    if a.prices is not None and b.prices is not None:
        for z in a.prices:
            a.prices[z] = np.concatenate([a.prices[z], b.prices[z]])
    a.total_cost += b.total_cost


def _merge_commit(a, b):
    for attr in ("nu_stat", "nu_on", "nu_off"):
        da, db = getattr(a, attr), getattr(b, attr)
        for k in da:
            da[k] = np.concatenate([da[k], db[k]])
