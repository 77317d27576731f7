"""Long-term position optimization: per-participant profit-maximizing schedules.

Each thermal or storage unit independently maximizes forecast revenue minus
its own costs over the horizon (the problems couple no units, so they are
solved one MILP/LP per unit and merged).  The resulting preferred positions
feed bid formation.

Commitment signals follow the convention that ``nu_on[t]`` / ``nu_off[t]``
switch the unit between hours ``t`` and ``t+1``; the transition from the
initial status into hour 0 is carried by a separate pair of binaries per
unit (``nu_on_init`` / ``nu_off_init``) charged at the same start/stop cost.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from euroem.solver import BINARY, OptProblem, solve_lp, solve_milp


class LtpoError(RuntimeError):
    pass


@dataclass
class ThermalPosition:
    p: np.ndarray
    nu_stat: np.ndarray
    nu_on: np.ndarray
    nu_off: np.ndarray
    nu_on_init: int = 0
    nu_off_init: int = 0
    objective: float = 0.0


@dataclass
class StoragePosition:
    pd: np.ndarray
    pc: np.ndarray
    e: np.ndarray
    sw: np.ndarray
    objective: float = 0.0


@dataclass
class PositionSchedule:
    horizon: int
    thermal: dict = field(default_factory=dict)
    storage: dict = field(default_factory=dict)

    @property
    def objective(self):
        return sum(p.objective for p in self.thermal.values()) + sum(
            p.objective for p in self.storage.values()
        )


def optimize_positions(system, forecasts=None, scope=None, rel_gap=1e-6, workers=1):
    """Solve the position MILP/LP for every scoped thermal and storage unit.

    ``forecasts`` maps unit id to a PriceForecast whose ``rho`` already has
    noise applied; defaults to the system's bundled forecasts.  Renewables
    are never in scope (their bids follow the forecast directly).
    """
    forecasts = system.forecasts if forecasts is None else forecasts
    thermal = {u.id: u for u in system.thermal_units}
    storage = {u.id: u for u in system.storage_units}
    if scope is None:
        scope = list(thermal) + list(storage)
    jobs = []
    for uid in scope:
        if uid in thermal:
            unit = thermal[uid]
        elif uid in storage:
            unit = storage[uid]
        else:
            raise LtpoError(f"unit {uid}: not a thermal or storage unit")
        if uid not in forecasts:
            raise LtpoError(f"unit {uid}: no price forecast covers it")
        rho = np.asarray(forecasts[uid].rho, dtype=float)
        if rho.size != system.horizon:
            raise LtpoError(f"unit {uid}: forecast length {rho.size} != horizon {system.horizon}")
        jobs.append((unit, rho, rel_gap))

    schedule = PositionSchedule(horizon=system.horizon)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    else:
        results = [_solve_one(job) for job in jobs]
    for (unit, _, _), result in zip(jobs, results):
        if isinstance(result, ThermalPosition):
            schedule.thermal[unit.id] = result
        else:
            schedule.storage[unit.id] = result
    return schedule


def _solve_one(job):
    unit, rho, rel_gap = job
    if hasattr(unit, "speed_class"):
        return _solve_thermal(unit, rho, rel_gap)
    return _solve_storage(unit, rho)


def _build_thermal(unit, rho, relax):
    T = rho.size
    p = OptProblem(sense="max", name=f"ltpo-{unit.id}")
    kind = "continuous" if relax else BINARY
    xp = p.add_vars(T, lo=0.0, hi=unit.p_max, obj=rho - unit.marginal_cost)
    stat = p.add_vars(T, lo=0.0, hi=1.0, kind=kind)
    on = p.add_vars(T, lo=0.0, hi=1.0, obj=-unit.startup_cost, kind=kind)
    off = p.add_vars(T, lo=0.0, hi=1.0, obj=-unit.shutdown_cost, kind=kind)
    on0 = p.add_var(lo=0.0, hi=1.0, obj=-unit.startup_cost, kind=kind)
    off0 = p.add_var(lo=0.0, hi=1.0, obj=-unit.shutdown_cost, kind=kind)

    rows = np.repeat(np.arange(T), 2)
    # p_min * stat <= P  and  P <= p_max * stat
    p.add_rows(rows, np.column_stack([xp, stat]).ravel(),
               np.tile([1.0, -unit.p_min], T), ">=", np.zeros(T))
    p.add_rows(rows, np.column_stack([xp, stat]).ravel(),
               np.tile([1.0, -unit.p_max], T), "<=", np.zeros(T))
    if T > 1:
        ramp_rows = np.repeat(np.arange(T - 1), 2)
        pair = np.column_stack([xp[1:], xp[:-1]]).ravel()
        p.add_rows(ramp_rows, pair, np.tile([1.0, -1.0], T - 1), "<=",
                   np.full(T - 1, unit.ramp_up))
        p.add_rows(ramp_rows, pair, np.tile([1.0, -1.0], T - 1), ">=",
                   np.full(T - 1, -unit.ramp_down))
        # status transition between t and t+1 driven by the signals at t
        tr_rows = np.repeat(np.arange(T - 1), 4)
        tr_cols = np.column_stack([stat[1:], stat[:-1], on[:-1], off[:-1]]).ravel()
        p.add_rows(tr_rows, tr_cols, np.tile([1.0, -1.0, -1.0, 1.0], T - 1),
                   "==", np.zeros(T - 1))
    sig_rows = np.repeat(np.arange(T), 2)
    p.add_rows(sig_rows, np.column_stack([on, off]).ravel(),
               np.ones(2 * T), "<=", np.ones(T))
    init = 1.0 if unit.initially_on else 0.0
    p.add_constr([stat[0], on0, off0], [1.0, -1.0, 1.0], "==", init)
    p.add_constr([on0, off0], [1.0, 1.0], "<=", 1.0)
    return p, (xp, stat, on, off, on0, off0)


def _solve_thermal(unit, rho, rel_gap):
    T = rho.size
    if T == 0:
        z = np.zeros(0)
        return ThermalPosition(p=z, nu_stat=z.astype(int), nu_on=z.astype(int), nu_off=z.astype(int))
    # the LP relaxation of a single-unit problem is frequently integral; use
    # it when it is and fall back to the true MILP otherwise
    prob, cols = _build_thermal(unit, rho, relax=True)
    sol = solve_lp(prob)
    if sol.status == "optimal":
        binaries = np.concatenate([sol.values[cols[1]], sol.values[cols[2]], sol.values[cols[3]],
                                   sol.values[[cols[4], cols[5]]]])
        if np.abs(binaries - np.round(binaries)).max() > 1e-7:
            prob, cols = _build_thermal(unit, rho, relax=False)
            sol = solve_milp(prob, rel_gap=rel_gap)
    else:
        prob, cols = _build_thermal(unit, rho, relax=False)
        sol = solve_milp(prob, rel_gap=rel_gap)
    if sol.status != "optimal":
        raise LtpoError(f"unit {unit.id}: position optimization {sol.status}")
    xp, stat, on, off, on0, off0 = cols
    v = sol.values
    return ThermalPosition(
        p=v[xp].copy(),
        nu_stat=np.rint(v[stat]).astype(int),
        nu_on=np.rint(v[on]).astype(int),
        nu_off=np.rint(v[off]).astype(int),
        nu_on_init=int(round(v[on0])),
        nu_off_init=int(round(v[off0])),
        objective=sol.objective,
    )


def _solve_storage(unit, rho):
    T = rho.size
    if T == 0:
        z = np.zeros(0)
        return StoragePosition(pd=z, pc=z, e=z, sw=z)
    p = OptProblem(sense="max", name=f"ltpo-{unit.id}")
    pd_ = p.add_vars(T, lo=unit.pd_min, hi=unit.pd_max, obj=rho - unit.vom_cost)
    pc = p.add_vars(T, lo=unit.pc_min, hi=unit.pc_max, obj=-rho - unit.vom_cost)
    e = p.add_vars(T, lo=unit.e_min, hi=unit.e_max)
    sw = p.add_vars(T, lo=0.0, hi=unit.sw_max)
    _add_soc_rows(p, unit, pd_, pc, e, sw)
    sol = solve_lp(p)
    if sol.status != "optimal":
        raise LtpoError(f"unit {unit.id}: position optimization {sol.status}")
    v = sol.values
    return StoragePosition(pd=v[pd_].copy(), pc=v[pc].copy(), e=v[e].copy(),
                           sw=v[sw].copy(), objective=sol.objective)


def _add_soc_rows(p, unit, pd_, pc, e, sw):
    """State-of-charge recursion plus the terminal-level constraint."""
    T = len(e)
    keep = 1.0 - unit.sd_rate
    # E_t - keep*E_{t-1} - eta_c*PC_t + PD_t/eta_d + SW_t = SI_t
    rows0 = [0, 0, 0, 0]
    cols0 = [e[0], pc[0], pd_[0], sw[0]]
    vals0 = [1.0, -unit.eta_c, 1.0 / unit.eta_d, 1.0]
    p.add_rows(rows0, cols0, vals0, "==", [unit.inflows[0] + keep * unit.e_initial])
    if T > 1:
        rows = np.repeat(np.arange(T - 1), 5)
        cols = np.column_stack([e[1:], e[:-1], pc[1:], pd_[1:], sw[1:]]).ravel()
        vals = np.tile([1.0, -keep, -unit.eta_c, 1.0 / unit.eta_d, 1.0], T - 1)
        p.add_rows(rows, cols, vals, "==", unit.inflows[1:])
    p.add_constr([e[T - 1]], [1.0], ">=", unit.e_initial)


def dump_positions(schedule, path, float_format="%.6f"):
    """Write the schedule as ``positions.csv`` (unit, hour, fields, status)."""
    records = []
    for uid, pos in schedule.thermal.items():
        for t in range(schedule.horizon):
            records.append((uid, t, pos.p[t], "", "", "", "",
                            pos.nu_stat[t], pos.nu_on[t], pos.nu_off[t]))
    for uid, pos in schedule.storage.items():
        for t in range(schedule.horizon):
            records.append((uid, t, "", pos.pd[t], pos.pc[t], pos.e[t], pos.sw[t], "", "", ""))
    df = pd.DataFrame.from_records(
        records,
        columns=["unit", "hour", "p", "pd", "pc", "e", "sw", "nu_stat", "nu_on", "nu_off"],
    )
    df.to_csv(path, index=False, float_format=float_format)
