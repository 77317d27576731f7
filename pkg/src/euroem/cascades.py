"""Quasi-steady-state cascading-failure simulation.

Starting from a grid-feasible operating point, a contingency removes
branches; each iteration detects islands, rebalances them with the reserve
headroom/footroom of dispatchable units (proportional to available margin,
then charge-drop / renewable curtailment / pro-rata demand shedding), runs a
DC power flow, and trips every branch loaded beyond ``trip_factor`` times
its rating.  The loop ends when no further branch trips; demand not served
(DNS) accumulates from all shedding along the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from euroem.grid import build_ptdf


class CascadeError(ValueError):
    pass


@dataclass(frozen=True)
class Contingency:
    id: str
    branches: tuple

    def __post_init__(self):
        if not self.branches:
            raise CascadeError(f"contingency {self.id}: empty branch set")


@dataclass
class CascadeParams:
    trip_factor: float = 1.0
    max_iterations: int = 100
    tol: float = 1e-6


@dataclass
class CascadeResult:
    failures: list  # (branch_id, iteration)
    failure_classes: dict  # branch_id -> class of every failed branch
    dns: float
    islands: int
    hit_iteration_cap: bool = False

    @property
    def n_failures(self):
        return len(self.failures)


@dataclass
class RiskCurve:
    points: list  # (dns_level, exceedance_probability), dns ascending


BRANCH_CLASSES = ("interconnector", "adjacent", "intra_zonal")


def classify_branch(system, branch_id):
    """interconnector / adjacent (touches an interconnector bus) / intra-zonal."""
    table = classify_branches(system)
    if branch_id not in table:
        raise CascadeError(f"unknown branch id {branch_id!r}")
    return table[branch_id]


def classify_branches(system):
    bus_zone = system.bus_zone()
    inter_buses = set()
    classes = {}
    for br in system.branches:
        if bus_zone[br.from_bus] != bus_zone[br.to_bus]:
            classes[br.id] = "interconnector"
            inter_buses.update((br.from_bus, br.to_bus))
    for br in system.branches:
        if br.id in classes:
            continue
        if br.from_bus in inter_buses or br.to_bus in inter_buses:
            classes[br.id] = "adjacent"
        else:
            classes[br.id] = "intra_zonal"
    return classes


def generate_contingencies(branches, n, mix=None, seed=0):
    """Sample ``n`` contingencies with a size distribution, deterministically.

    ``mix`` maps outage size to probability (default the single/double/triple
    split 0.91 / 0.083 / 0.005 with the remainder at size 4); counts follow
    the largest-remainder rule so they are exact for any ``n``.
    """
    if n < 0:
        raise CascadeError("contingency count must be >= 0")
    mix = {1: 0.91, 2: 0.083, 3: 0.005, 4: 0.002} if mix is None else dict(mix)
    total = sum(mix.values())
    if abs(total - 1.0) > 1e-9:
        raise CascadeError(f"contingency mix sums to {total}, expected 1")
    branch_ids = [b.id for b in branches]
    for size in mix:
        if size > len(branch_ids) and n > 0 and mix[size] > 0:
            raise CascadeError(f"contingency size {size} exceeds branch count {len(branch_ids)}")

    sizes = sorted(mix)
    quotas = {s: n * mix[s] for s in sizes}
    counts = {s: int(np.floor(quotas[s])) for s in sizes}
    leftover = n - sum(counts.values())
    by_remainder = sorted(sizes, key=lambda s: (-(quotas[s] - counts[s]), s))
    for s in by_remainder[:leftover]:
        counts[s] += 1

    rng = np.random.default_rng(seed)
    out = []
    k = 0
    for s in sizes:
        for _ in range(counts[s]):
            picked = rng.choice(len(branch_ids), size=s, replace=False)
            out.append(Contingency(id=f"c{k:05d}", branches=tuple(branch_ids[i] for i in sorted(picked))))
            k += 1
    return out


def select_representative_hours(load, k):
    """k distinct hours at evenly spaced quantiles of the load duration curve.

    Includes the minimum- and maximum-load hours (k >= 2); k = 1 picks the
    median-load hour.  Ties are broken toward earlier hours.
    """
    load = np.asarray(load, dtype=float)
    horizon = load.size
    if not 1 <= k <= horizon:
        raise CascadeError(f"need 1 <= k <= horizon, got k={k}, horizon={horizon}")
    order = np.lexsort((np.arange(horizon), load))  # by load then hour
    if k == 1:
        qs = np.array([0.5])
    else:
        qs = np.arange(k) / (k - 1)
    positions = np.rint(qs * (horizon - 1)).astype(int)
    return [int(order[p]) for p in positions]


def simulate_cascade(point, system, contingency, params=None):
    """Run one cascade from a bus-mapped operating point.

    ``point`` is an :class:`euroem.redispatch.OperatingPoint` (post-redispatch);
    the result is deterministic in (point, contingency, params).
    """
    params = params or CascadeParams()
    branch_map = system.branch_by_id()
    for bid in contingency.branches:
        if bid not in branch_map:
            raise CascadeError(f"contingency {contingency.id}: unknown branch {bid!r}")

    state = _BusState.from_point(system, point)
    in_service = [b for b in system.branches if b.id not in set(contingency.branches)]
    failures = [(bid, 0) for bid in contingency.branches]
    classes = classify_branches(system)

    hit_cap = True
    n_islands = 1
    for iteration in range(1, params.max_iterations + 1):
        ptdf = build_ptdf(system.buses, in_service)
        n_islands = int(ptdf.island_of_bus.max()) + 1 if len(ptdf.bus_ids) else 0
        for island in range(n_islands):
            members = np.flatnonzero(ptdf.island_of_bus == island)
            state.rebalance(members, params.tol)
        flows = ptdf.matrix @ state.injections()
        ratings = np.array([b.rating for b in in_service])
        tripped = np.flatnonzero(np.abs(flows) > params.trip_factor * ratings + params.tol)
        if tripped.size == 0:
            hit_cap = False
            break
        for idx in tripped:
            failures.append((in_service[idx].id, iteration))
        keep = set(range(len(in_service))) - set(int(i) for i in tripped)
        in_service = [in_service[i] for i in sorted(keep)]

    return CascadeResult(
        failures=failures,
        failure_classes={bid: classes[bid] for bid, _ in failures},
        dns=state.dns,
        islands=n_islands,
        hit_iteration_cap=hit_cap,
    )


class _BusState:
    """Mutable per-bus aggregates driving island rebalancing."""

    def __init__(self, disp, head, foot, ren, load, charge):
        self.disp = disp
        self.head = head
        self.foot = foot
        self.ren = ren
        self.load = load
        self.charge = charge
        self.dns = 0.0

    @classmethod
    def from_point(cls, system, point):
        n = len(system.buses)
        pos = {b.id: k for k, b in enumerate(system.buses)}
        disp = np.zeros(n)
        head = np.zeros(n)
        foot = np.zeros(n)
        ren = np.zeros(n)
        load = np.zeros(n)
        charge = np.zeros(n)
        for u in system.thermal_units:
            out = point.thermal_out[u.id]
            k = pos[u.bus]
            disp[k] += out
            head[k] += max(u.p_max - out, 0.0)
            foot[k] += out - u.p_min if out >= u.p_min else out
        for s in system.storage_units:
            net = point.storage_net[s.id]
            k = pos[s.bus]
            if net >= 0:
                disp[k] += net
                head[k] += max(s.pd_max - net, 0.0)
                foot[k] += net
            else:
                charge[k] += -net
        for r in system.renewable_units:
            ren[pos[r.bus]] += point.renewable_out[r.id]
        for d in system.demands:
            load[pos[d.bus]] += point.demand_served[d.id]
        return cls(disp, head, foot, ren, load, charge)

    def injections(self):
        return self.disp + self.ren - self.load - self.charge

    def rebalance(self, members, tol):
        imb = float(self.injections()[members].sum())
        if imb < -tol:
            self._cover_deficit(members, -imb)
        elif imb > tol:
            self._absorb_surplus(members, imb)
        residual = float(self.injections()[members].sum())
        if abs(residual) > 1e-6:
            raise CascadeError(f"island rebalancing left {residual:.3e} MW imbalance")

    def _scale(self, arr, members, amount):
        """Reduce arr over members by `amount` in proportion to current values."""
        total = float(arr[members].sum())
        if total <= 0:
            return 0.0
        take = min(amount, total)
        arr[members] -= arr[members] * (take / total)
        return take

    def _cover_deficit(self, members, need):
        total_head = float(self.head[members].sum())
        if total_head > 0:
            use = min(need, total_head)
            frac = use / total_head
            self.disp[members] += self.head[members] * frac
            self.head[members] *= 1.0 - frac
            self.foot[members] += 0.0  # footroom of the added output is not reused
            need -= use
        if need > 1e-12:
            need -= self._scale(self.charge, members, need)
        if need > 1e-12:
            shed = self._scale(self.load, members, need)
            self.dns += shed
            need -= shed

    def _absorb_surplus(self, members, surplus):
        total_foot = float(self.foot[members].sum())
        if total_foot > 0:
            use = min(surplus, total_foot)
            frac = use / total_foot
            self.disp[members] -= self.foot[members] * frac
            self.foot[members] *= 1.0 - frac
            surplus -= use
        if surplus > 1e-12:
            surplus -= self._scale(self.ren, members, surplus)
        if surplus > 1e-12:
            # below-minimum trimming: units in the island force off
            surplus -= self._scale(self.disp, members, surplus)


def risk_curve(results):
    """Empirical CCDF of DNS over a cascade suite: P(DNS > x) per level x."""
    if not results:
        raise CascadeError("risk curve needs at least one cascade result")
    dns = np.array([r.dns for r in results], dtype=float)
    levels = np.unique(np.concatenate([[0.0], dns]))
    pts = [(float(x), float(np.mean(dns > x))) for x in levels]
    return RiskCurve(points=pts)


def dump_cascade_results(tagged_results, path, float_format="%.6f"):
    """Write ``cascade_results.csv`` rows (hour, contingency, dns, failures, classes)."""
    records = []
    for hour, cid, res in tagged_results:
        by_class = {c: 0 for c in BRANCH_CLASSES}
        for bid, _ in res.failures:
            by_class[res.failure_classes[bid]] += 1
        records.append((hour, cid, res.dns, res.n_failures,
                        by_class["interconnector"], by_class["adjacent"],
                        by_class["intra_zonal"]))
    pd.DataFrame.from_records(
        records,
        columns=["hour", "contingency", "dns_mw", "n_failures",
                 "n_interconnector", "n_adjacent", "n_intra_zonal"],
    ).to_csv(path, index=False, float_format=float_format)


def dump_risk_curve(curve, path, float_format="%.9f"):
    pd.DataFrame(curve.points, columns=["dns", "exceedance_prob"]).to_csv(
        path, index=False, float_format=float_format
    )
