"""Run-level aggregates: generation shares, storage charging, costs and
profits, price statistics, interconnector utilization, redispatch cost
statistics, and cascade failure counts."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from euroem.cascades import BRANCH_CLASSES

CHARGING_TECHNOLOGIES = ("hydro_pumped", "hydro_pumped_daily", "battery")


class MetricsError(ValueError):
    pass


@dataclass
class MetricsReport:
    model: str
    generation_mwh: dict = field(default_factory=dict)
    generation_share_pct: dict = field(default_factory=dict)
    activation_fraction: dict = field(default_factory=dict)
    storage_charging_mwh: dict = field(default_factory=dict)
    cost_eur: dict = field(default_factory=dict)
    revenue_eur: dict | None = None
    profit_eur: dict | None = None
    price_mean: float | None = None
    price_max: float | None = None
    high_price_hours: int | None = None
    high_price_threshold: float = 100.0
    interconnector_utilization: dict = field(default_factory=dict)
    redispatch_total_eur: float = 0.0
    redispatch_daily_avg_eur: float = 0.0
    redispatch_daily_min_eur: float = 0.0
    redispatch_daily_max_eur: float = 0.0
    redispatch_daily_p95_eur: float = 0.0
    failure_counts: dict = field(default_factory=dict)
    cumulative_dns_mwh: float = 0.0
    unserved_mwh: float = 0.0

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def compute_metrics(system, dispatch, model_name, redispatch_result=None,
                    cascade_results=None, high_price_threshold=100.0,
                    hours_per_day=24):
    """Aggregate one coherent run into a MetricsReport (identities re-checked)."""
    T = dispatch.horizon
    if T != system.horizon:
        raise MetricsError(f"dispatch horizon {T} != system horizon {system.horizon}")
    report = MetricsReport(model=model_name, high_price_threshold=high_price_threshold)

    p_neg = getattr(dispatch, "thermal_p_neg", {})
    pd_neg = getattr(dispatch, "storage_pd_neg", {})
    pc_neg = getattr(dispatch, "storage_pc_neg", {})

    bus_zone = system.bus_zone()
    prices = dispatch.prices

    gen = {}
    act_hours = {}
    cost = {}
    revenue = {} if prices is not None else None

    def add(tech, series, cost_series, unit_zone):
        gen[tech] = gen.get(tech, 0.0) + float(series.sum())
        act_hours.setdefault(tech, np.zeros(T, dtype=bool))
        act_hours[tech] |= series > 1e-6
        cost[tech] = cost.get(tech, 0.0) + float(cost_series.sum())
        if revenue is not None:
            revenue[tech] = revenue.get(tech, 0.0) + float(
                (series * prices[unit_zone]).sum()
            )

    for u in system.thermal_units:
        out = dispatch.thermal_p[u.id] + (p_neg[u.id] if u.id in p_neg else 0.0)
        add(u.technology, out, out * u.marginal_cost[:T], bus_zone[u.bus])
    for s in system.storage_units:
        out = dispatch.storage_pd[s.id] + (pd_neg[s.id] if s.id in pd_neg else 0.0)
        charge = dispatch.storage_pc[s.id] + (pc_neg[s.id] if s.id in pc_neg else 0.0)
        add(s.technology, out, (out + charge) * s.vom_cost, bus_zone[s.bus])
        if revenue is not None:
            revenue[s.technology] -= float((charge * prices[bus_zone[s.bus]]).sum())
        report.storage_charging_mwh[s.technology] = (
            report.storage_charging_mwh.get(s.technology, 0.0) + float(charge.sum())
        )
    for r in system.renewable_units:
        out = dispatch.renewable_p[r.id]
        add(r.technology, out, out * r.vom_cost, bus_zone[r.bus])

    total_gen = sum(gen.values())
    report.generation_mwh = {k: round(v, 6) for k, v in sorted(gen.items())}
    if total_gen > 0:
        report.generation_share_pct = {
            k: round(100.0 * v / total_gen, 6) for k, v in sorted(gen.items())
        }
        share_sum = sum(report.generation_share_pct.values())
        if abs(share_sum - 100.0) > 0.01:
            raise MetricsError(f"generation shares sum to {share_sum}, expected 100")
    report.activation_fraction = {
        k: round(float(v.mean()), 6) for k, v in sorted(act_hours.items())
    }
    report.storage_charging_mwh["total"] = round(
        sum(report.storage_charging_mwh.values()), 6
    )
    report.cost_eur = {k: round(v, 2) for k, v in sorted(cost.items())}
    if revenue is not None:
        report.revenue_eur = {k: round(v, 2) for k, v in sorted(revenue.items())}
        report.profit_eur = {
            k: round(revenue[k] - cost[k], 2) for k in sorted(cost)
        }
        for k in cost:
            identity = report.revenue_eur[k] - report.cost_eur[k]
            if abs(identity - report.profit_eur[k]) > 0.02:
                raise MetricsError(f"profit identity broken for {k}")

    if prices is not None:
        zone_demand = {z: np.zeros(T) for z in system.zone_ids()}
        for d in system.demands:
            zone_demand[bus_zone[d.bus]] += d.scheduled[:T]
        total_demand = sum(zone_demand.values())
        weighted = np.zeros(T)
        for z in system.zone_ids():
            weighted += prices[z] * np.divide(
                zone_demand[z], total_demand,
                out=np.full(T, 1.0 / max(len(system.zones), 1)), where=total_demand > 0,
            )
        report.price_mean = round(float(weighted.mean()), 6) if T else None
        report.price_max = round(
            float(max(prices[z].max() for z in prices)), 6
        ) if T else None
        report.high_price_hours = int((weighted >= high_price_threshold).sum())

    for ic in system.interconnectors:
        for direction, cap in (("forward", ic.ntc_forward), ("backward", ic.ntc_backward)):
            flow = dispatch.flows[ic.id][direction]
            util = float(flow.mean() / cap) if cap > 0 else 0.0
            report.interconnector_utilization[f"{ic.id}:{direction}"] = round(util, 6)

    served = sum(float(v.sum()) for v in dispatch.demand_served.values())
    scheduled = float(system.total_scheduled_demand().sum())
    report.unserved_mwh = round(scheduled - served, 6)

    if redispatch_result is not None and redispatch_result.cost is not None \
            and len(redispatch_result.hours):
        days = np.array(redispatch_result.hours) // hours_per_day
        daily = np.zeros(int(days.max()) + 1)
        np.add.at(daily, days, redispatch_result.cost)
        report.redispatch_total_eur = round(float(daily.sum()), 2)
        report.redispatch_daily_avg_eur = round(float(daily.mean()), 2)
        report.redispatch_daily_min_eur = round(float(daily.min()), 2)
        report.redispatch_daily_max_eur = round(float(daily.max()), 2)
        report.redispatch_daily_p95_eur = round(float(np.quantile(daily, 0.95)), 2)

    counts = {c: 0 for c in BRANCH_CLASSES}
    dns = 0.0
    if cascade_results:
        for res in cascade_results:
            dns += res.dns
            for bid, _ in res.failures:
                counts[res.failure_classes[bid]] += 1
    report.failure_counts = {**counts, "total": sum(counts.values())}
    report.cumulative_dns_mwh = round(dns, 6)
    return report
