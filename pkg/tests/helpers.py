"""Small programmatic system builders shared across test modules."""

import numpy as np

from euroem.model import (
    Branch,
    Bus,
    DatasetConfig,
    Demand,
    PriceForecast,
    RenewableUnit,
    StorageUnit,
    SystemModel,
    ThermalUnit,
    Zone,
)
from euroem.dataset import derive_interconnectors


def series(values, horizon=None):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(horizon, float(arr))
    return arr


def thermal(uid="g1", bus="b1", tech="gas", speed="fast", p_min=0.0, p_max=100.0,
            ru=None, rd=None, cost=20.0, b_on=0.0, b_off=0.0, status="off", horizon=2):
    return ThermalUnit(
        id=uid, bus=bus, technology=tech, speed_class=speed,
        p_min=p_min, p_max=p_max,
        ramp_up=p_max if ru is None else ru,
        ramp_down=p_max if rd is None else rd,
        marginal_cost=series(cost, horizon),
        startup_cost=b_on, shutdown_cost=b_off, initial_status=status,
    )


def battery(uid="s1", bus="b1", pd_max=10.0, pc_max=10.0, e_max=10.0, e_initial=0.0,
            eta_c=1.0, eta_d=1.0, sd_rate=0.0, vom=0.0, horizon=2):
    return StorageUnit(
        id=uid, bus=bus, technology="battery",
        pd_min=0.0, pd_max=pd_max, pc_min=0.0, pc_max=pc_max,
        e_min=0.0, e_max=e_max, e_initial=e_initial,
        eta_c=eta_c, eta_d=eta_d, sd_rate=sd_rate,
        inflows=series(0.0, horizon), sw_max=0.0, vom_cost=vom,
    )


def hydro_dam(uid="s1", bus="b1", pd_max=50.0, e_max=500.0, e_initial=250.0,
              inflow=5.0, sw_max=50.0, vom=1.0, horizon=2):
    return StorageUnit(
        id=uid, bus=bus, technology="hydro_dam",
        pd_min=0.0, pd_max=pd_max, pc_min=0.0, pc_max=0.0,
        e_min=0.0, e_max=e_max, e_initial=e_initial,
        eta_c=1.0, eta_d=1.0, sd_rate=0.0,
        inflows=series(inflow, horizon), sw_max=sw_max, vom_cost=vom,
    )


def renewable(uid="r1", bus="b1", tech="wind", forecast=0.0, vom=0.0, horizon=2):
    return RenewableUnit(id=uid, bus=bus, technology=tech,
                         forecast=series(forecast, horizon), vom_cost=vom)


def demand(uid="d1", bus="b1", scheduled=100.0, b_d=3000.0, b_ds=3000.0, horizon=2):
    return Demand(id=uid, bus=bus, scheduled=series(scheduled, horizon),
                  bid_price=b_d, shed_cost=b_ds)


def system(horizon=2, zones=("z1",), buses=None, branches=(), thermal_units=(),
           storage_units=(), renewable_units=(), demands=(), forecasts=None,
           ntc_fraction=0.40, validate=True):
    """Assemble a SystemModel; buses default to one per zone named b<k>."""
    if buses is None:
        buses = [Bus(id=f"b{k + 1}", zone=z) for k, z in enumerate(zones)]
    model = SystemModel(
        horizon=horizon,
        zones=[Zone(id=z, name=z) for z in zones],
        buses=list(buses),
        branches=list(branches),
        thermal_units=list(thermal_units),
        storage_units=list(storage_units),
        renewable_units=list(renewable_units),
        demands=list(demands),
        interconnectors=[],
        forecasts=dict(forecasts or {}),
        config=DatasetConfig(name="toy", seed=1),
    )
    model.interconnectors = derive_interconnectors(model, ntc_fraction)
    if validate:
        model.validate()
    return model


def flat_forecast(owner, rho, horizon, sigma=0.0, seed=0):
    return PriceForecast(owner=owner, rho=series(rho, horizon), noise_sigma=sigma, seed=seed)


def branch(bid, from_bus, to_bus, x=0.1, rating=1000.0, transformer=False):
    return Branch(id=bid, from_bus=from_bus, to_bus=to_bus, reactance=x,
                  rating=rating, is_transformer=transformer)
