#!/usr/bin/env python3
"""Build the bundled ieee118-3z dataset.

Topology follows the standard 118-bus test network (118 buses, 186 branches,
nine transformers).  Everything else is synthesized deterministically from
the seed in this file: a three-zone partition with ties only between zones
1-2 and 2-3, 162 generating units (21 fast thermal, 33 slow thermal, 54
storage, 54 renewable), a year (8760 h) of demand / renewable / inflow / fuel
series, fuel-indexed thermal marginal costs, and branch ratings calibrated
against a zonal dispatch so the grid is realistic but not trivially slack.
Cross-zone rating sums are fixed at 1875 MW (zones 1-2) and 900 MW (zones
2-3), which the 40 % usable-fraction rule turns into 750 / 360 MW NTC.

Run from the repo root:  python3 tools/build_ieee118_3z.py [--out DIR]
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from euroem.dataset import save_system  # noqa: E402
from euroem.dispatch import economic_dispatch  # noqa: E402
from euroem.grid import build_ptdf  # noqa: E402
from euroem.model import (  # noqa: E402
    Branch,
    Bus,
    DatasetConfig,
    Demand,
    RenewableUnit,
    StorageUnit,
    SystemModel,
    ThermalUnit,
    Zone,
)
from euroem.redispatch import operating_point  # noqa: E402

SEED = 118
HORIZON = 8760
MEAN_DEMAND = 3733.07
VOLL = 3000.0
FORECAST_PREMIUM = 1.15

# standard 118-bus branch list (from_bus, to_bus); transformers marked below
BRANCHES = [
    (1, 2), (1, 3), (4, 5), (3, 5), (5, 6), (6, 7), (8, 9), (8, 5), (9, 10),
    (4, 11), (5, 11), (11, 12), (2, 12), (3, 12), (7, 12), (11, 13), (12, 14),
    (13, 15), (14, 15), (12, 16), (15, 17), (16, 17), (17, 18), (18, 19),
    (19, 20), (15, 19), (20, 21), (21, 22), (22, 23), (23, 24), (23, 25),
    (26, 25), (25, 27), (27, 28), (28, 29), (30, 17), (8, 30), (26, 30),
    (17, 31), (29, 31), (23, 32), (31, 32), (27, 32), (15, 33), (19, 34),
    (35, 36), (35, 37), (33, 37), (34, 36), (34, 37), (38, 37), (37, 39),
    (37, 40), (30, 38), (39, 40), (40, 41), (40, 42), (41, 42), (43, 44),
    (34, 43), (44, 45), (45, 46), (46, 47), (46, 48), (47, 49), (42, 49),
    (42, 49), (45, 49), (48, 49), (49, 50), (49, 51), (51, 52), (52, 53),
    (53, 54), (49, 54), (49, 54), (54, 55), (54, 56), (55, 56), (56, 57),
    (50, 57), (56, 58), (51, 58), (54, 59), (56, 59), (56, 59), (55, 59),
    (59, 60), (59, 61), (60, 61), (60, 62), (61, 62), (63, 59), (63, 64),
    (64, 61), (38, 65), (64, 65), (49, 66), (49, 66), (62, 66), (62, 67),
    (65, 66), (66, 67), (65, 68), (47, 69), (49, 69), (68, 69), (69, 70),
    (24, 70), (70, 71), (24, 72), (71, 72), (71, 73), (70, 74), (70, 75),
    (69, 75), (74, 75), (76, 77), (69, 77), (75, 77), (77, 78), (78, 79),
    (77, 80), (77, 80), (79, 80), (68, 81), (81, 80), (77, 82), (82, 83),
    (83, 84), (83, 85), (84, 85), (85, 86), (86, 87), (85, 88), (85, 89),
    (88, 89), (89, 90), (89, 90), (90, 91), (89, 92), (89, 92), (91, 92),
    (92, 93), (92, 94), (93, 94), (94, 95), (80, 96), (82, 96), (94, 96),
    (80, 97), (80, 98), (80, 99), (92, 100), (94, 100), (95, 96), (96, 97),
    (98, 100), (99, 100), (100, 101), (92, 102), (101, 102), (100, 103),
    (100, 104), (103, 104), (103, 105), (100, 106), (104, 105), (105, 106),
    (105, 107), (105, 108), (106, 107), (108, 109), (103, 110), (109, 110),
    (110, 111), (110, 112), (17, 113), (32, 113), (32, 114), (27, 115),
    (114, 115), (68, 116), (12, 117), (75, 118), (76, 118),
]
TRANSFORMERS = {(8, 5), (26, 25), (30, 17), (38, 37), (63, 59), (64, 61),
                (65, 66), (68, 69), (81, 80)}

GEN_BUSES = [1, 4, 6, 8, 10, 12, 15, 18, 19, 24, 25, 26, 27, 31, 32, 34, 36,
             40, 42, 46, 49, 54, 55, 56, 59, 61, 62, 65, 66, 69, 70, 72, 73,
             74, 76, 77, 80, 85, 87, 89, 90, 91, 92, 99, 100, 103, 104, 105,
             107, 110, 111, 112, 113, 116]

# cross-zone branch ratings: zone 1-2 cut sums to 1875 MW, zone 2-3 to 900 MW
TIE_RATINGS = {
    (15, 33): 475.0, (19, 34): 400.0, (30, 38): 600.0, (23, 24): 400.0,
    (69, 70): 200.0, (24, 70): 75.0, (24, 72): 75.0, (69, 75): 150.0,
    (69, 77): 150.0, (68, 81): 250.0,
}

# per-zone thermal technology mix at the zone's generator buses (in order)
THERMAL_PLAN = {
    "z1": ["hard_coal", "gas", "lignite", "gas", "hard_coal", "nuclear",
           "hard_coal", "oil", "gas", "lignite", "hard_coal", "gas",
           "lignite", "oil", "hard_coal"],
    "z2": ["lignite", "nuclear", "lignite", "gas", "lignite", "nuclear",
           "lignite", "hard_coal", "lignite", "nuclear", "lignite",
           "hard_coal", "lignite", "nuclear", "lignite", "gas", "hard_coal"],
    "z3": ["gas", "lignite", "oil", "gas", "hard_coal", "gas", "lignite",
           "oil", "gas", "hard_coal", "oil", "gas", "hard_coal", "gas",
           "oil", "lignite", "gas", "hard_coal", "oil", "gas", "nuclear",
           "hard_coal"],
}
STORAGE_PLAN = {
    "z1": ["hydro_pumped", "battery", "hydro_pumped_daily", "battery",
           "hydro_pumped", "hydro_dam", "hydro_pumped_daily", "battery",
           "hydro_pumped", "hydro_dam", "battery", "hydro_pumped_daily",
           "hydro_pumped", "battery", "hydro_dam"],
    "z2": ["hydro_dam", "hydro_pumped", "hydro_dam", "battery", "hydro_dam",
           "hydro_pumped", "hydro_dam", "hydro_pumped_daily", "hydro_dam",
           "battery", "hydro_pumped", "hydro_pumped_daily", "hydro_dam",
           "battery", "hydro_pumped", "hydro_pumped_daily", "battery"],
    "z3": ["battery", "hydro_pumped", "hydro_pumped_daily", "battery",
           "hydro_pumped", "battery", "hydro_pumped_daily", "hydro_pumped",
           "battery", "hydro_pumped_daily", "hydro_pumped", "battery",
           "hydro_dam", "hydro_pumped", "hydro_pumped_daily", "battery",
           "hydro_pumped", "hydro_dam", "hydro_pumped_daily", "battery",
           "hydro_pumped", "hydro_pumped_daily"],
}
RENEWABLE_PLAN = {
    "z1": ["wind", "solar", "run_of_river"] * 5,
    "z2": ["run_of_river", "wind", "solar"] * 5 + ["run_of_river", "wind"],
    "z3": ["solar", "wind", "run_of_river"] * 7 + ["solar"],
}

TECH_CAPACITY = {"gas": 800.0, "oil": 310.0, "nuclear": 1300.0,
                 "lignite": 2627.5, "hard_coal": 1000.0}
STORAGE_CAPACITY = {"hydro_dam": 200.0, "hydro_pumped": 150.0,
                    "hydro_pumped_daily": 80.0, "battery": 73.1}
RENEWABLE_CAPACITY = {"solar": 400.0, "wind": 350.0, "run_of_river": 256.25}
ZONE_DEMAND_SHARE = {"z1": 0.35, "z2": 0.29, "z3": 0.36}

FAST_TECHS = ("gas", "oil")
P_MIN_FRACTION = {"nuclear": 0.45, "lignite": 0.45, "hard_coal": 0.38,
                  "gas": 0.0, "oil": 0.0}
RAMP_HOURS = {"nuclear": 8.0, "lignite": 4.0, "hard_coal": 4.0, "gas": 1.0, "oil": 1.0}
START_COST_PER_MW = {"nuclear": 480.0, "lignite": 110.0, "hard_coal": 80.0,
                     "gas": 25.0, "oil": 20.0}
EFFICIENCY = {"gas": 0.55, "oil": 0.38, "hard_coal": 0.42, "lignite": 0.40,
              "nuclear": 0.33}
EMISSION_T_PER_MWH = {"gas": 0.37, "oil": 0.65, "hard_coal": 0.82,
                      "lignite": 1.05, "nuclear": 0.0}
THERMAL_VOM = {"gas": 2.5, "oil": 3.0, "hard_coal": 3.5, "lignite": 3.8, "nuclear": 4.0}
STORAGE_VOM = {"hydro_dam": 1.2, "hydro_pumped": 2.6, "hydro_pumped_daily": 2.6,
               "battery": 1.5}


def zone_of_bus(n):
    if n == 24:
        return "z2"
    if n <= 32 or n in (113, 114, 115, 117):
        return "z1"
    if 33 <= n <= 69 or n == 116:
        return "z2"
    return "z3"


def bus_id(n):
    return f"b{n:03d}"


# ----------------------------------------------------------------- profiles
def hour_of_day(t):
    return t % 24


def day_of_year(t):
    return t // 24


def demand_shape(rng, phase=0.0):
    t = np.arange(HORIZON)
    day = day_of_year(t)
    hod = hour_of_day(t)
    seasonal = 1.0 + 0.19 * np.cos(2 * np.pi * (day - 15) / 365.0)
    daily = (1.0
             + 0.13 * np.exp(-0.5 * ((hod - 11.0 + phase) / 2.6) ** 2)
             + 0.16 * np.exp(-0.5 * ((hod - 19.0 + phase) / 2.2) ** 2)
             - 0.13 * np.exp(-0.5 * ((hod - 3.5) / 2.8) ** 2))
    weekday = np.where((day % 7) >= 5, 0.93, 1.02)
    noise = _ar1(rng, 0.92, 0.012)
    shape = seasonal * daily * weekday * (1.0 + noise)
    return shape / shape.mean()


def _ar1(rng, phi, sigma):
    eps = rng.normal(0.0, sigma, HORIZON)
    out = np.empty(HORIZON)
    acc = 0.0
    for t in range(HORIZON):
        acc = phi * acc + eps[t]
        out[t] = acc
    return out


def solar_cf(rng):
    t = np.arange(HORIZON)
    day = day_of_year(t)
    hod = hour_of_day(t)
    daylight = np.clip(np.cos(np.pi * (hod - 12.5) / 7.5), 0.0, None) ** 1.4
    seasonal = 0.55 + 0.45 * np.cos(2 * np.pi * (day - 172) / 365.0)
    weather = np.clip(1.0 + _ar1(rng, 0.65, 0.25), 0.15, 1.0)
    cf = daylight * seasonal * weather
    return cf * (0.105 / max(cf.mean(), 1e-9))


def wind_cf(rng):
    raw = _ar1(rng, 0.975, 0.065)
    day = day_of_year(np.arange(HORIZON))
    seasonal = 1.0 + 0.25 * np.cos(2 * np.pi * (day - 20) / 365.0)
    cf = np.clip(0.28 * seasonal * np.exp(raw), 0.0, 0.95)
    return cf * (0.078 / max(cf.mean(), 1e-9))


def ror_cf(rng):
    day = day_of_year(np.arange(HORIZON))
    seasonal = 1.0 + 0.55 * np.cos(2 * np.pi * (day - 120) / 365.0)
    noise = np.clip(1.0 + _ar1(rng, 0.995, 0.01), 0.4, 1.8)
    cf = np.clip(0.26 * seasonal * noise, 0.02, 0.95)
    return cf * (0.26 / max(cf.mean(), 1e-9))


def inflow_profile(rng):
    day = day_of_year(np.arange(HORIZON))
    seasonal = 1.0 + 0.6 * np.cos(2 * np.pi * (day - 135) / 365.0)
    noise = np.clip(1.0 + _ar1(rng, 0.995, 0.008), 0.4, 1.8)
    prof = seasonal * noise
    return prof / prof.mean()


def fuel_indices(rng):
    # index levels chosen so the all-in merit order runs
    # nuclear ~9 < lignite ~45 < hard coal ~50 < gas ~67 < oil ~145 €/MWh
    day = day_of_year(np.arange(HORIZON))
    winter = 1.0 + 0.18 * np.cos(2 * np.pi * (day - 10) / 365.0)
    gas = 28.0 * winter * np.exp(_ar1(rng, 0.997, 0.006))
    coal = 7.5 * (1.0 + 0.10 * np.cos(2 * np.pi * (day - 20) / 365.0)) \
        * np.exp(_ar1(rng, 0.998, 0.004))
    uranium = np.full(HORIZON, 1.7) * np.exp(_ar1(rng, 0.999, 0.001))
    co2 = 35.0 * (1.0 + 0.06 * np.sin(2 * np.pi * day / 365.0)) \
        * np.exp(_ar1(rng, 0.998, 0.004))
    return {"gas": gas, "oil": 1.6 * gas, "hard_coal": coal,
            "lignite": 0.2 * coal, "nuclear": uranium, "co2": co2}


def thermal_cost(tech, fuels):
    return (fuels[tech] / EFFICIENCY[tech]
            + fuels["co2"] * EMISSION_T_PER_MWH[tech]
            + THERMAL_VOM[tech])


# ------------------------------------------------------------------- build
def sized(rng, total, n, spread=0.25):
    """n unit sizes with moderate spread summing exactly to total."""
    w = rng.uniform(1.0 - spread, 1.0 + spread, n)
    return total * w / w.sum()


def build_system():
    rng = np.random.default_rng(SEED)
    zones = [Zone("z1", "zone 1"), Zone("z2", "zone 2"), Zone("z3", "zone 3")]
    buses = [Bus(bus_id(n), zone_of_bus(n)) for n in range(1, 119)]

    branches = []
    for k, (a, b) in enumerate(BRANCHES):
        is_tr = (a, b) in TRANSFORMERS
        x = float(rng.uniform(0.025, 0.035)) if is_tr else float(rng.uniform(0.04, 0.22))
        branches.append(Branch(
            id=f"l{k + 1:03d}_{a}_{b}", from_bus=bus_id(a), to_bus=bus_id(b),
            reactance=x, rating=1e5, is_transformer=is_tr,
        ))

    gen_by_zone = {"z1": [], "z2": [], "z3": []}
    for n in GEN_BUSES:
        gen_by_zone[zone_of_bus(n)].append(n)

    fuels = fuel_indices(rng)

    tech_units = {}
    for zone in ("z1", "z2", "z3"):
        for n, tech in zip(gen_by_zone[zone], THERMAL_PLAN[zone]):
            tech_units.setdefault(tech, []).append(n)
    thermal = []
    for tech in ("nuclear", "lignite", "hard_coal", "gas", "oil"):
        buses_t = tech_units[tech]
        sizes = sized(rng, TECH_CAPACITY[tech], len(buses_t))
        for n, p_max in zip(buses_t, sizes):
            p_max = round(float(p_max), 2)
            fast = tech in FAST_TECHS
            p_min = round(P_MIN_FRACTION[tech] * p_max, 2)
            ramp = max(round(p_max / RAMP_HOURS[tech], 2), 1.0)
            thermal.append(ThermalUnit(
                id=f"t_{tech}_{n:03d}", bus=bus_id(n), technology=tech,
                speed_class="fast" if fast else "slow",
                p_min=0.0 if fast else p_min, p_max=p_max,
                ramp_up=ramp, ramp_down=ramp,
                marginal_cost=np.round(thermal_cost(tech, fuels), 4),
                startup_cost=round(START_COST_PER_MW[tech] * p_max, 2),
                shutdown_cost=round(0.1 * START_COST_PER_MW[tech] * p_max, 2),
                initial_status="off" if fast else "on",
            ))

    stor_units = {}
    for zone in ("z1", "z2", "z3"):
        for n, tech in zip(gen_by_zone[zone], STORAGE_PLAN[zone]):
            stor_units.setdefault(tech, []).append(n)
    inflow_base = inflow_profile(rng)
    storage = []
    for tech in ("hydro_dam", "hydro_pumped", "hydro_pumped_daily", "battery"):
        buses_s = stor_units[tech]
        sizes = sized(rng, STORAGE_CAPACITY[tech], len(buses_s))
        for n, pd_max in zip(buses_s, sizes):
            pd_max = round(float(pd_max), 2)
            if tech == "hydro_dam":
                e_max, pc_max, eta, sd = 150.0 * pd_max, 0.0, 1.0, 0.0
                inflow = np.round(0.52 * pd_max * inflow_base
                                  * float(rng.uniform(0.9, 1.1)), 4)
                sw = pd_max
            elif tech == "hydro_pumped":
                e_max, pc_max, eta, sd = 8.0 * pd_max, pd_max, 0.87, 0.0
                inflow = np.round(0.05 * pd_max * inflow_base
                                  * float(rng.uniform(0.8, 1.2)), 4)
                sw = 0.5 * pd_max
            elif tech == "hydro_pumped_daily":
                e_max, pc_max, eta, sd = 6.0 * pd_max, pd_max, 0.85, 0.0
                inflow = np.zeros(HORIZON)
                sw = 0.25 * pd_max
            else:
                e_max, pc_max, eta, sd = 2.5 * pd_max, pd_max, 0.95, 0.0002
                inflow = np.zeros(HORIZON)
                sw = 0.0
            storage.append(StorageUnit(
                id=f"s_{tech}_{n:03d}", bus=bus_id(n), technology=tech,
                pd_min=0.0, pd_max=pd_max, pc_min=0.0, pc_max=round(pc_max, 2),
                e_min=0.0, e_max=round(e_max, 2),
                e_initial=round(0.55 * e_max, 2),
                eta_c=eta, eta_d=eta, sd_rate=sd,
                inflows=inflow, sw_max=round(sw, 2),
                vom_cost=STORAGE_VOM[tech],
            ))

    ren_units = {}
    for zone in ("z1", "z2", "z3"):
        for n, tech in zip(gen_by_zone[zone], RENEWABLE_PLAN[zone]):
            ren_units.setdefault(tech, []).append(n)
    renewable = []
    # one weather profile per technology; units vary around it so the fleet
    # stays spatially correlated
    base_cf = {"solar": solar_cf(rng), "wind": wind_cf(rng), "run_of_river": ror_cf(rng)}
    for tech in ("solar", "wind", "run_of_river"):
        buses_r = ren_units[tech]
        sizes = sized(rng, RENEWABLE_CAPACITY[tech], len(buses_r))
        for n, cap in zip(buses_r, sizes):
            cap = round(float(cap), 2)
            local = np.clip(1.0 + rng.normal(0.0, 0.07, HORIZON), 0.0, None)
            cf = np.clip(base_cf[tech] * local, 0.0, 1.0)
            renewable.append(RenewableUnit(
                id=f"r_{tech}_{n:03d}", bus=bus_id(n), technology=tech,
                forecast=np.round(cap * cf, 4), vom_cost=0.0,
            ))

    # demand at the 99 heaviest-weighted buses, split by zone share
    weights = {}
    for zone in ("z1", "z2", "z3"):
        members = [n for n in range(1, 119) if zone_of_bus(n) == zone]
        w = rng.lognormal(0.0, 0.75, len(members))
        for n, wn in zip(members, w):
            weights[n] = wn
    drop = sorted(weights, key=lambda n: weights[n])[: 118 - 99]
    for n in drop:
        weights[n] = 0.0
    demands = []
    for zone in ("z1", "z2", "z3"):
        members = [n for n in range(1, 119) if zone_of_bus(n) == zone and weights[n] > 0]
        wsum = sum(weights[n] for n in members)
        shape = demand_shape(rng, phase={"z1": 0.0, "z2": 0.6, "z3": -0.5}[zone])
        zone_series = MEAN_DEMAND * ZONE_DEMAND_SHARE[zone] * shape
        for n in members:
            demands.append(Demand(
                id=f"d{n:03d}", bus=bus_id(n),
                scheduled=np.round(zone_series * (weights[n] / wsum), 4),
                bid_price=VOLL, shed_cost=VOLL,
            ))

    model = SystemModel(
        horizon=HORIZON, zones=zones, buses=buses, branches=branches,
        thermal_units=thermal, storage_units=storage,
        renewable_units=renewable, demands=demands, interconnectors=[],
        forecasts={},
        config=DatasetConfig(name="ieee118-3z", noise_sigma=0.025,
                             ntc_fraction=0.40, seed=SEED, sigma_pd=0.0,
                             sigma_pc=VOLL),
    )
    return model


def calibrate(model):
    """Derive branch ratings and the bundled price forecast from a zonal run."""
    from euroem.dataset import derive_interconnectors

    # ties get their fixed ratings first so NTC derivation sees final values
    for br in model.branches:
        a = int(br.from_bus[1:])
        b = int(br.to_bus[1:])
        if (a, b) in TIE_RATINGS:
            br_rating = TIE_RATINGS[(a, b)]
            object.__setattr__(br, "rating", br_rating)
    model.interconnectors = derive_interconnectors(model, model.config.ntc_fraction)
    model.validate()

    print("running calibration dispatch (block mode)...")
    ed = economic_dispatch(model, block_hours=24)

    shed_total = sum(
        float((d.scheduled - ed.demand_served[d.id]).sum()) for d in model.demands
    )
    print(f"calibration dispatch: cost {ed.total_cost/1e6:.1f} M€, "
          f"shed {shed_total:.1f} MWh")

    print("computing DC flows for rating calibration...")
    ptdf = build_ptdf(model.buses, model.branches)
    inj = np.zeros((len(model.buses), HORIZON))
    for t in range(HORIZON):
        point = operating_point(model, ed, t)
        inj[:, t] = point.injections(model, ptdf)
    flows = ptdf.matrix @ inj

    q90 = np.quantile(np.abs(flows), 0.90, axis=1)
    for k, br in enumerate(model.branches):
        a, b = int(br.from_bus[1:]), int(br.to_bus[1:])
        if (a, b) in TIE_RATINGS:
            continue
        rating = max(1.08 * q90[k], 45.0)
        object.__setattr__(br, "rating", round(float(rating), 1))

    # the bundled wholesale-price forecast follows the calibration run's
    # zonal prices with a 15 % premium: market price expectations sit above
    # pure short-run marginal cost, and an at-cost forecast would leave the
    # profit-maximizing schedules indifferent (and the bid stack empty)
    prices = {z: FORECAST_PREMIUM * p for z, p in ed.prices.items()}
    for z, p in ed.prices.items():
        print(f"  calibration price {z}: mean {p.mean():.1f} min {p.min():.1f} "
              f"max {p.max():.1f} €/MWh")
    return prices


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "src", "euroem", "data", "ieee118-3z"))
    args = parser.parse_args()

    model = build_system()
    prices = calibrate(model)

    # attach one forecast per thermal/storage unit so save_system writes the
    # zonal price series; per-unit noise is applied at run time
    from euroem.model import PriceForecast
    bus_zone = model.bus_zone()
    for u in model.thermal_units + model.storage_units:
        model.forecasts[u.id] = PriceForecast(
            owner=u.id, rho=np.round(prices[bus_zone[u.bus]], 4),
            noise_sigma=model.config.noise_sigma, seed=0,
        )
    model.validate()

    out = os.path.abspath(args.out)
    save_system(model, out, float_format="%.4f")
    print(f"dataset written to {out}")

    # quick summary
    fast = sum(1 for u in model.thermal_units if u.speed_class == "fast")
    slow = len(model.thermal_units) - fast
    print(f"buses={len(model.buses)} branches={len(model.branches)} "
          f"transformers={sum(b.is_transformer for b in model.branches)}")
    print(f"thermal={len(model.thermal_units)} (fast={fast}, slow={slow}) "
          f"storage={len(model.storage_units)} renewable={len(model.renewable_units)} "
          f"demands={len(model.demands)}")
    for ic in model.interconnectors:
        print(f"  {ic.id}: ntc={ic.ntc_forward:.0f}/{ic.ntc_backward:.0f} "
              f"members={len(ic.member_branches)}")


if __name__ == "__main__":
    main()
