"""End-to-end orchestration: dispatch model -> redispatch -> security -> metrics.

``run_pipeline`` executes one dispatch model over a dataset and writes every
artifact (dispatch CSVs, redispatch costs, cascade results, risk curve,
metrics) into a run directory.  ``run_compare`` runs all four models with
shared seeds, representative hours, and contingency list, adding the
cross-model comparison files.

All randomness stems from one root seed (manifest or override), split per
stage and participant with a stable hash, so identical configurations yield
byte-identical artifact directories.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from euroem import bidding, cascades, dam, dispatch, ltpo, metrics, redispatch
from euroem.dataset import _stable_seed, apply_forecast_noise, load_system
from euroem.grid import build_ptdf
from euroem.model import PriceForecast, ValidationError

MODELS = ("dam", "ed", "uc", "opf")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dataset: str
    model: str = "dam"
    out_dir: str = "run-out"
    renewable_priority: bool = False
    seed: int | None = None
    representative_hours: int = 6
    contingencies: int = 100
    contingency_mix: dict | None = None
    block_hours: int | None = None
    uc_block_hours: int | None = 24
    uc_rel_gap: float = 1e-6
    trip_factor: float = 1.0
    high_price_threshold: float = 100.0
    ltpo_workers: int = 1

    def validated(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.representative_hours < 0 or self.contingencies < 0:
            raise ConfigError("representative_hours and contingencies must be >= 0")
        return self

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as fh:
            raw = json.load(fh)
        raw.update({k: v for k, v in overrides.items() if v is not None})
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "contingency_mix" in raw and raw["contingency_mix"] is not None:
            raw["contingency_mix"] = {int(k): float(v) for k, v in raw["contingency_mix"].items()}
        return cls(**raw).validated()


def run_pipeline(config, system=None, shared=None, log=print):
    """Execute one model run; returns (out_dir, MetricsReport)."""
    config.validated()
    t_start = time.time()
    if system is None:
        system = load_system(config.dataset)
    root_seed = system.config.seed if config.seed is None else config.seed
    out = os.path.abspath(config.out_dir)
    os.makedirs(out, exist_ok=True)

    def stage(name, fn):
        t0 = time.time()
        result = fn()
        log(f"[{config.model}] {name}: {time.time() - t0:.1f}s")
        return result

    ptdf = (shared or {}).get("ptdf")
    if ptdf is None:
        ptdf = build_ptdf(system.buses, system.branches)

    dispatch_result, positions, bid_set = stage(
        "dispatch", lambda: _run_dispatch(config, system, root_seed, log)
    )
    red = stage("redispatch", lambda: redispatch.redispatch(dispatch_result, system, ptdf))

    total_load = system.total_scheduled_demand()
    if shared and "rep_hours" in shared:
        rep_hours = shared["rep_hours"]
        contingency_list = shared["contingencies"]
    else:
        rep_hours = (cascades.select_representative_hours(total_load, config.representative_hours)
                     if config.representative_hours else [])
        contingency_list = cascades.generate_contingencies(
            system.branches, config.contingencies, config.contingency_mix,
            seed=_stable_seed(root_seed, "contingencies"),
        )

    def run_security():
        points = redispatch.apply_redispatch(system, dispatch_result, red)
        params = cascades.CascadeParams(trip_factor=config.trip_factor)
        tagged = []
        for hour in rep_hours:
            for con in contingency_list:
                res = cascades.simulate_cascade(points[hour], system, con, params)
                tagged.append((hour, con.id, res))
        return tagged

    tagged_results = stage("cascades", run_security)

    report = metrics.compute_metrics(
        system, dispatch_result, config.model,
        redispatch_result=red,
        cascade_results=[r for _, _, r in tagged_results],
        high_price_threshold=config.high_price_threshold,
    )

    def write_artifacts():
        cfg = asdict(config)
        cfg["resolved_seed"] = root_seed
        with open(os.path.join(out, "config.json"), "w") as fh:
            json.dump(cfg, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if positions is not None:
            ltpo.dump_positions(positions, os.path.join(out, "positions.csv"))
        if bid_set is not None:
            bidding.dump_bids(bid_set, os.path.join(out, "bids.csv"))
        _dump_dispatch(dispatch_result, system, out)
        redispatch.dump_redispatch_costs(red, os.path.join(out, "redispatch_costs.csv"))
        cascades.dump_cascade_results(tagged_results, os.path.join(out, "cascade_results.csv"))
        if tagged_results:
            curve = cascades.risk_curve([r for _, _, r in tagged_results])
            cascades.dump_risk_curve(curve, os.path.join(out, "risk_curve.csv"))
        report.to_json(os.path.join(out, "metrics.json"))

    stage("artifacts", write_artifacts)
    log(f"[{config.model}] total: {time.time() - t_start:.1f}s -> {out}")
    return out, report


def _run_dispatch(config, system, root_seed, log):
    """Dispatch stage: returns (result, positions-or-None, bids-or-None)."""
    if config.model == "ed":
        return dispatch.economic_dispatch(system, block_hours=config.block_hours), None, None
    if config.model == "uc":
        result, _ = dispatch.unit_commitment(
            system, rel_gap=config.uc_rel_gap, block_hours=config.uc_block_hours
        )
        return result, None, None
    if config.model == "opf":
        ptdf = build_ptdf(system.buses, system.branches)
        return redispatch.solve_dc_opf(system, ptdf), None, None

    # day-ahead market: competitive storage forecasts come from a quick
    # baseline clearing, thermal forecasts from the bundled wholesale series
    t0 = time.time()
    baseline = dispatch.economic_dispatch(system, block_hours=24)
    log(f"[dam] forecast baseline: {time.time() - t0:.1f}s")
    bus_zone = system.bus_zone()
    forecasts = {}
    for u in system.thermal_units:
        base = system.forecasts[u.id].rho
        sigma = system.forecasts[u.id].noise_sigma
        forecasts[u.id] = PriceForecast(
            owner=u.id,
            rho=apply_forecast_noise(base, sigma, _stable_seed(root_seed, "fc-thermal", u.id)),
        )
    for s in system.storage_units:
        base = baseline.prices[bus_zone[s.bus]]
        sigma = system.config.noise_sigma
        forecasts[s.id] = PriceForecast(
            owner=s.id,
            rho=apply_forecast_noise(base, sigma, _stable_seed(root_seed, "fc-storage", s.id)),
        )
    positions = ltpo.optimize_positions(system, forecasts=forecasts,
                                        workers=config.ltpo_workers)
    bid_set = bidding.form_bids(positions, system)
    market = dam.clear_market(bid_set, system,
                              renewable_priority=config.renewable_priority,
                              block_hours=config.block_hours)
    return market, positions, bid_set


def _dump_dispatch(result, system, out):
    prefix = os.path.join(out, "")
    if hasattr(result, "thermal_p_neg"):
        dam.dump_market_result(result, prefix)
        return
    # baseline results share the market CSV schema
    import pandas as pd

    records = []
    groups = [
        ("thermal_p", result.thermal_p),
        ("storage_pd", result.storage_pd),
        ("storage_pc", result.storage_pc),
        ("storage_e", result.storage_e),
        ("storage_sw", result.storage_sw),
        ("renewable_p", result.renewable_p),
        ("demand_served", result.demand_served),
    ]
    for var, group in groups:
        for uid, arr in group.items():
            for t in range(result.horizon):
                records.append((uid, t, var, arr[t]))
    pd.DataFrame.from_records(records, columns=["unit", "hour", "variable", "value"]).to_csv(
        prefix + "market_result.csv", index=False, float_format="%.6f"
    )
    if result.prices is not None:
        dam.dump_prices(result.prices, prefix + "prices.csv")
    flow_records = [
        (ic, t, d, arrs[d][t])
        for ic, arrs in result.flows.items()
        for d in ("forward", "backward")
        for t in range(result.horizon)
    ]
    pd.DataFrame.from_records(
        flow_records, columns=["interconnector", "hour", "direction", "mw"]
    ).to_csv(prefix + "flows.csv", index=False, float_format="%.6f")


def run_compare(config, log=print):
    """Run dam/ed/uc/opf with shared seeds, hours, and contingencies."""
    config.validated()
    system = load_system(config.dataset)
    root_seed = system.config.seed if config.seed is None else config.seed
    out = os.path.abspath(config.out_dir)
    os.makedirs(out, exist_ok=True)

    shared = {
        "ptdf": build_ptdf(system.buses, system.branches),
        "rep_hours": (cascades.select_representative_hours(
            system.total_scheduled_demand(), config.representative_hours)
            if config.representative_hours else []),
        "contingencies": cascades.generate_contingencies(
            system.branches, config.contingencies, config.contingency_mix,
            seed=_stable_seed(root_seed, "contingencies"),
        ),
    }

    reports = {}
    for model in MODELS:
        sub = RunConfig(**{**asdict(config), "model": model,
                           "out_dir": os.path.join(out, model)})
        _, reports[model] = run_pipeline(sub, system=system, shared=shared, log=log)

    _write_comparison(out, reports)
    return out, reports


def _write_comparison(out, reports):
    import pandas as pd

    rows = []
    for model, rep in sorted(reports.items()):
        rows.append({
            "model": model,
            "price_mean": rep.price_mean,
            "high_price_hours": rep.high_price_hours,
            "price_max": rep.price_max,
            "fast_gas_activation": rep.activation_fraction.get("gas", 0.0),
            "storage_charging_total_mwh": rep.storage_charging_mwh.get("total", 0.0),
            "redispatch_total_eur": rep.redispatch_total_eur,
            "redispatch_daily_max_eur": rep.redispatch_daily_max_eur,
            "redispatch_daily_p95_eur": rep.redispatch_daily_p95_eur,
            "failures_total": rep.failure_counts.get("total", 0),
            "failures_interconnector": rep.failure_counts.get("interconnector", 0),
            "failures_adjacent": rep.failure_counts.get("adjacent", 0),
            "failures_intra_zonal": rep.failure_counts.get("intra_zonal", 0),
            "cumulative_dns_mwh": rep.cumulative_dns_mwh,
            "unserved_mwh": rep.unserved_mwh,
        })
    pd.DataFrame(rows).to_csv(os.path.join(out, "comparison.csv"),
                              index=False, float_format="%.6f")


def validate_dataset(path):
    """Load + validate a dataset; raises ValidationError on any violation."""
    model = load_system(path)
    return {
        "name": model.config.name,
        "horizon": model.horizon,
        "zones": len(model.zones),
        "buses": len(model.buses),
        "branches": len(model.branches),
        "transformers": sum(b.is_transformer for b in model.branches),
        "thermal_units": len(model.thermal_units),
        "fast_units": sum(u.speed_class == "fast" for u in model.thermal_units),
        "storage_units": len(model.storage_units),
        "renewable_units": len(model.renewable_units),
        "demands": len(model.demands),
        "interconnectors": {
            ic.id: [ic.ntc_forward, ic.ntc_backward] for ic in model.interconnectors
        },
    }
