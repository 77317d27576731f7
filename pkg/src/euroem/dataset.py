"""Dataset loading, NTC derivation, and forecast-noise utilities.

A dataset directory holds one CSV per entity class, a ``timeseries/``
subdirectory (one column per entity id, one row per hour, 0-based hour
index), and a ``manifest.json`` with the horizon and run defaults::

    zones.csv  buses.csv  branches.csv  thermal.csv  storage.csv
    renewable.csv  demand.csv  manifest.json
    timeseries/{thermal_cost,inflows,renewable_forecast,demand,price_forecast}.csv
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np
import pandas as pd

from euroem.model import (
    Branch,
    Bus,
    DatasetConfig,
    Demand,
    Interconnector,
    PriceForecast,
    RenewableUnit,
    StorageUnit,
    SystemModel,
    ThermalUnit,
    ValidationError,
    Zone,
)

ENTITY_FILES = (
    "zones.csv",
    "buses.csv",
    "branches.csv",
    "thermal.csv",
    "storage.csv",
    "renewable.csv",
    "demand.csv",
    "manifest.json",
)

DEFAULT_NTC_FRACTION = 0.40
DEFAULT_NOISE_SIGMA = 0.025


def derive_ntc(branches, usable_fraction=DEFAULT_NTC_FRACTION):
    """Directed trade capacity of a zone border: fraction of the summed ratings.

    Returns ``(ntc_forward, ntc_backward)`` in MW; an empty branch set gives
    ``(0.0, 0.0)``.
    """
    if not 0 < usable_fraction <= 1:
        raise ValueError(f"usable_fraction must lie in (0, 1], got {usable_fraction}")
    total = float(sum(b.rating for b in branches))
    cap = usable_fraction * total
    return cap, cap


def apply_forecast_noise(series, sigma, seed):
    """Multiplicative Gaussian noise ``x * (1 + eps)``, deterministic per seed."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    series = np.asarray(series, dtype=float)
    if sigma == 0:
        return series.copy()
    eps = np.random.default_rng(seed).normal(0.0, sigma, size=series.shape)
    return series * (1.0 + eps)


def load_system(dataset_root):
    """Load and validate a dataset directory into a :class:`SystemModel`."""
    root = str(dataset_root)
    for fname in ENTITY_FILES:
        if not os.path.exists(os.path.join(root, fname)):
            raise ValidationError(f"dataset {root}: missing required file {fname}")

    with open(os.path.join(root, "manifest.json")) as fh:
        manifest = json.load(fh)
    horizon = int(manifest["horizon"])
    config = DatasetConfig(
        name=manifest.get("name", os.path.basename(os.path.normpath(root))),
        noise_sigma=float(manifest.get("noise_sigma", DEFAULT_NOISE_SIGMA)),
        ntc_fraction=float(manifest.get("ntc_fraction", DEFAULT_NTC_FRACTION)),
        seed=int(manifest.get("seed", 0)),
        sigma_pd=float(manifest.get("sigma_pd", 0.0)),
        sigma_pc=(None if manifest.get("sigma_pc") is None else float(manifest["sigma_pc"])),
        extras={k: v for k, v in manifest.items() if k not in (
            "name", "horizon", "noise_sigma", "ntc_fraction", "seed", "sigma_pd", "sigma_pc")},
    )

    def table(fname, str_cols):
        df = pd.read_csv(os.path.join(root, fname), dtype={c: str for c in str_cols})
        return df

    def series_file(fname):
        path = os.path.join(root, "timeseries", fname)
        if not os.path.exists(path):
            return pd.DataFrame(index=range(horizon))
        try:
            df = pd.read_csv(path)
        except pd.errors.EmptyDataError:
            return pd.DataFrame(index=range(horizon))
        if len(df) != horizon:
            raise ValidationError(
                f"timeseries/{fname}: {len(df)} rows, expected horizon {horizon}"
            )
        return df

    def column(df, owner, fname, default=None):
        if owner in df.columns:
            return df[owner].to_numpy(dtype=float)
        if default is not None:
            return np.full(horizon, float(default))
        raise ValidationError(f"timeseries/{fname}: missing column for {owner}")

    zones = [Zone(id=r.id, name=getattr(r, "name", r.id)) for r in table("zones.csv", ["id", "name"]).itertuples()]
    buses = [Bus(id=r.id, zone=r.zone) for r in table("buses.csv", ["id", "zone"]).itertuples()]
    branches = [
        Branch(
            id=r.id,
            from_bus=r.from_bus,
            to_bus=r.to_bus,
            reactance=float(r.reactance),
            rating=float(r.rating),
            is_transformer=bool(r.is_transformer),
        )
        for r in table("branches.csv", ["id", "from_bus", "to_bus"]).itertuples()
    ]

    cost_ts = series_file("thermal_cost.csv")
    thermal = [
        ThermalUnit(
            id=r.id,
            bus=r.bus,
            technology=r.technology,
            speed_class=r.speed_class,
            p_min=float(r.p_min),
            p_max=float(r.p_max),
            ramp_up=float(r.ramp_up),
            ramp_down=float(r.ramp_down),
            marginal_cost=column(cost_ts, r.id, "thermal_cost.csv"),
            startup_cost=float(r.startup_cost),
            shutdown_cost=float(r.shutdown_cost),
            initial_status=r.initial_status,
        )
        for r in table("thermal.csv", ["id", "bus", "technology", "speed_class", "initial_status"]).itertuples()
    ]

    inflow_ts = series_file("inflows.csv")
    storage = [
        StorageUnit(
            id=r.id,
            bus=r.bus,
            technology=r.technology,
            pd_min=float(r.pd_min),
            pd_max=float(r.pd_max),
            pc_min=float(r.pc_min),
            pc_max=float(r.pc_max),
            e_min=float(r.e_min),
            e_max=float(r.e_max),
            e_initial=float(r.e_initial),
            eta_c=float(r.eta_c),
            eta_d=float(r.eta_d),
            sd_rate=float(r.sd_rate),
            inflows=column(inflow_ts, r.id, "inflows.csv", default=0.0),
            sw_max=float(r.sw_max),
            vom_cost=float(r.vom_cost),
        )
        for r in table("storage.csv", ["id", "bus", "technology"]).itertuples()
    ]

    ren_ts = series_file("renewable_forecast.csv")
    renewable = [
        RenewableUnit(
            id=r.id,
            bus=r.bus,
            technology=r.technology,
            forecast=column(ren_ts, r.id, "renewable_forecast.csv"),
            vom_cost=float(r.vom_cost),
        )
        for r in table("renewable.csv", ["id", "bus", "technology"]).itertuples()
    ]

    dem_ts = series_file("demand.csv")
    demands = [
        Demand(
            id=r.id,
            bus=r.bus,
            scheduled=column(dem_ts, r.id, "demand.csv"),
            bid_price=float(r.bid_price),
            shed_cost=float(r.shed_cost),
        )
        for r in table("demand.csv", ["id", "bus"]).itertuples()
    ]

    model = SystemModel(
        horizon=horizon,
        zones=zones,
        buses=buses,
        branches=branches,
        thermal_units=thermal,
        storage_units=storage,
        renewable_units=renewable,
        demands=demands,
        interconnectors=[],
        forecasts={},
        config=config,
    )
    model.interconnectors = derive_interconnectors(model, config.ntc_fraction)
    model.forecasts = _materialize_forecasts(model, series_file("price_forecast.csv"))
    model.validate()
    return model


def derive_interconnectors(model, usable_fraction=DEFAULT_NTC_FRACTION):
    """Group cross-zonal branches per zone pair and derive NTC limits."""
    bus_zone = model.bus_zone()
    groups = {}
    for br in model.branches:
        z1, z2 = bus_zone[br.from_bus], bus_zone[br.to_bus]
        if z1 == z2:
            continue
        key = tuple(sorted((z1, z2)))
        groups.setdefault(key, []).append(br)
    interconnectors = []
    for (za, zb), members in sorted(groups.items()):
        fwd, bwd = derive_ntc(members, usable_fraction)
        interconnectors.append(
            Interconnector(
                id=f"{za}-{zb}",
                from_zone=za,
                to_zone=zb,
                ntc_forward=fwd,
                ntc_backward=bwd,
                member_branches=tuple(b.id for b in members),
            )
        )
    return interconnectors


def _materialize_forecasts(model, price_ts):
    """Per-unit price forecasts from the zonal series (noise applied downstream).

    Thermal and storage units inherit their zone's series; per-unit noise
    seeds are derived from the manifest seed so that two loads of the same
    dataset agree bit-for-bit.
    """
    if price_ts.shape[1] == 0:
        return {}
    bus_zone = model.bus_zone()
    forecasts = {}
    owners = [(u.id, u.bus) for u in model.thermal_units] + [
        (u.id, u.bus) for u in model.storage_units
    ]
    for k, (uid, bus) in enumerate(owners):
        zone = bus_zone[bus]
        if zone not in price_ts.columns:
            raise ValidationError(f"timeseries/price_forecast.csv: missing column for zone {zone}")
        forecasts[uid] = PriceForecast(
            owner=uid,
            rho=price_ts[zone].to_numpy(dtype=float),
            noise_sigma=model.config.noise_sigma,
            seed=_stable_seed(model.config.seed, "price-forecast", uid),
        )
    return forecasts


def _stable_seed(root_seed, *tokens):
    """Deterministic 32-bit child seed from a root seed and string tokens."""
    key = "/".join((str(root_seed),) + tuple(map(str, tokens)))
    digest = hashlib.sha256(key.encode()).digest()
    return int.from_bytes(digest[:4], "little")


def save_system(model, dataset_root, float_format="%.6g"):
    """Write a SystemModel back out as a dataset directory (inverse of load)."""
    root = str(dataset_root)
    os.makedirs(os.path.join(root, "timeseries"), exist_ok=True)

    def write(fname, records, columns):
        pd.DataFrame.from_records(records, columns=columns).to_csv(
            os.path.join(root, fname), index=False, float_format=float_format
        )

    def write_ts(fname, mapping):
        df = pd.DataFrame({k: np.asarray(v, dtype=float) for k, v in mapping.items()})
        df.to_csv(os.path.join(root, "timeseries", fname), index=False, float_format=float_format)

    write("zones.csv", [(z.id, z.name) for z in model.zones], ["id", "name"])
    write("buses.csv", [(b.id, b.zone) for b in model.buses], ["id", "zone"])
    write(
        "branches.csv",
        [
            (b.id, b.from_bus, b.to_bus, b.reactance, b.rating, int(b.is_transformer))
            for b in model.branches
        ],
        ["id", "from_bus", "to_bus", "reactance", "rating", "is_transformer"],
    )
    write(
        "thermal.csv",
        [
            (
                u.id, u.bus, u.technology, u.speed_class, u.p_min, u.p_max,
                u.ramp_up, u.ramp_down, u.startup_cost, u.shutdown_cost, u.initial_status,
            )
            for u in model.thermal_units
        ],
        [
            "id", "bus", "technology", "speed_class", "p_min", "p_max",
            "ramp_up", "ramp_down", "startup_cost", "shutdown_cost", "initial_status",
        ],
    )
    write(
        "storage.csv",
        [
            (
                s.id, s.bus, s.technology, s.pd_min, s.pd_max, s.pc_min, s.pc_max,
                s.e_min, s.e_max, s.e_initial, s.eta_c, s.eta_d, s.sd_rate, s.sw_max, s.vom_cost,
            )
            for s in model.storage_units
        ],
        [
            "id", "bus", "technology", "pd_min", "pd_max", "pc_min", "pc_max",
            "e_min", "e_max", "e_initial", "eta_c", "eta_d", "sd_rate", "sw_max", "vom_cost",
        ],
    )
    write(
        "renewable.csv",
        [(r.id, r.bus, r.technology, r.vom_cost) for r in model.renewable_units],
        ["id", "bus", "technology", "vom_cost"],
    )
    write(
        "demand.csv",
        [(d.id, d.bus, d.bid_price, d.shed_cost) for d in model.demands],
        ["id", "bus", "bid_price", "shed_cost"],
    )

    write_ts("thermal_cost.csv", {u.id: u.marginal_cost for u in model.thermal_units})
    inflow_cols = {s.id: s.inflows for s in model.storage_units if np.any(s.inflows != 0)}
    write_ts("inflows.csv", inflow_cols)
    write_ts("renewable_forecast.csv", {r.id: r.forecast for r in model.renewable_units})
    write_ts("demand.csv", {d.id: d.scheduled for d in model.demands})

    zone_prices = {}
    seen_zone = {}
    bus_zone = model.bus_zone()
    for uid, fc in model.forecasts.items():
        zone = bus_zone[_owner_bus(model, uid)]
        if zone not in seen_zone:
            zone_prices[zone] = fc.rho
            seen_zone[zone] = uid
    if zone_prices:
        write_ts("price_forecast.csv", zone_prices)

    manifest = {
        "name": model.config.name,
        "horizon": model.horizon,
        "noise_sigma": model.config.noise_sigma,
        "ntc_fraction": model.config.ntc_fraction,
        "seed": model.config.seed,
        "sigma_pd": model.config.sigma_pd,
        "sigma_pc": model.config.sigma_pc,
    }
    manifest.update(model.config.extras)
    with open(os.path.join(root, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _owner_bus(model, uid):
    for group in (model.thermal_units, model.storage_units):
        for u in group:
            if u.id == uid:
                return u.bus
    raise KeyError(uid)
