"""Domain entities and the validated system model.

A :class:`SystemModel` is the single source of truth consumed by every
dispatch, redispatch, and security module.  It is immutable by convention
after :func:`euroem.dataset.load_system` returns it and safe to share
read-only across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

THERMAL_TECHNOLOGIES = ("gas", "oil", "hard_coal", "lignite", "nuclear")
STORAGE_TECHNOLOGIES = ("hydro_dam", "hydro_pumped", "hydro_pumped_daily", "battery")
RENEWABLE_TECHNOLOGIES = ("solar", "wind", "run_of_river")
SPEED_CLASSES = ("fast", "slow")

#: storage fields that must be exactly zero per operating technology
STORAGE_ZERO_FIELDS = {
    "hydro_dam": ("pc_min", "pc_max", "sd_rate"),
    "hydro_pumped": ("sd_rate",),
    "hydro_pumped_daily": ("inflows", "sd_rate"),
    "battery": ("inflows", "sw_max"),
}


class ValidationError(ValueError):
    """Dataset or model invariant violation, naming the offending entity."""


@dataclass(frozen=True)
class Zone:
    id: str
    name: str = ""


@dataclass(frozen=True)
class Bus:
    id: str
    zone: str


@dataclass(frozen=True)
class Branch:
    id: str
    from_bus: str
    to_bus: str
    reactance: float
    rating: float
    is_transformer: bool = False


@dataclass
class ThermalUnit:
    id: str
    bus: str
    technology: str
    speed_class: str
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    marginal_cost: np.ndarray
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    initial_status: str = "off"

    @property
    def initially_on(self):
        return self.initial_status == "on"


@dataclass
class StorageUnit:
    id: str
    bus: str
    technology: str
    pd_min: float
    pd_max: float
    pc_min: float
    pc_max: float
    e_min: float
    e_max: float
    e_initial: float
    eta_c: float
    eta_d: float
    sd_rate: float
    inflows: np.ndarray
    sw_max: float
    vom_cost: float = 0.0


@dataclass
class RenewableUnit:
    id: str
    bus: str
    technology: str
    forecast: np.ndarray
    vom_cost: float = 0.0


@dataclass
class Demand:
    id: str
    bus: str
    scheduled: np.ndarray
    bid_price: float
    shed_cost: float


@dataclass
class Interconnector:
    id: str
    from_zone: str
    to_zone: str
    ntc_forward: float
    ntc_backward: float
    member_branches: tuple = ()


@dataclass
class PriceForecast:
    owner: str
    rho: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0


@dataclass
class DatasetConfig:
    """Manifest-level run defaults carried alongside the entities."""

    name: str = ""
    noise_sigma: float = 0.025
    ntc_fraction: float = 0.40
    seed: int = 0
    sigma_pd: float = 0.0
    sigma_pc: float | None = None
    extras: dict = field(default_factory=dict)


@dataclass
class SystemModel:
    horizon: int
    zones: list
    buses: list
    branches: list
    thermal_units: list
    storage_units: list
    renewable_units: list
    demands: list
    interconnectors: list
    forecasts: dict = field(default_factory=dict)
    config: DatasetConfig = field(default_factory=DatasetConfig)

    # -------------------------------------------------------------- lookups
    def zone_ids(self):
        return [z.id for z in self.zones]

    def bus_zone(self):
        return {b.id: b.zone for b in self.buses}

    def unit_zone(self, unit):
        return self.bus_zone()[unit.bus]

    def thermal_by_id(self):
        return {u.id: u for u in self.thermal_units}

    def storage_by_id(self):
        return {u.id: u for u in self.storage_units}

    def renewable_by_id(self):
        return {u.id: u for u in self.renewable_units}

    def demand_by_id(self):
        return {d.id: d for d in self.demands}

    def branch_by_id(self):
        return {b.id: b for b in self.branches}

    def total_scheduled_demand(self):
        """System-wide scheduled demand per hour, MW."""
        if not self.demands:
            return np.zeros(self.horizon)
        return np.sum([d.scheduled for d in self.demands], axis=0)

    def max_marginal_cost(self):
        costs = [0.0]
        costs += [float(np.max(u.marginal_cost)) for u in self.thermal_units if u.marginal_cost.size]
        costs += [u.vom_cost for u in self.storage_units]
        costs += [u.vom_cost for u in self.renewable_units]
        return max(costs)

    def validate(self):
        """Check every structural invariant; raises ValidationError on the first hit."""
        _validate(self)
        return self


def _check_series(name, owner, series, horizon):
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1 or arr.size != horizon:
        raise ValidationError(
            f"{owner}: {name} time series has length {arr.size}, expected horizon {horizon}"
        )
    return arr


def _validate(m: SystemModel):
    zone_ids = [z.id for z in m.zones]
    if len(set(zone_ids)) != len(zone_ids):
        raise ValidationError("duplicate zone ids")
    zone_set = set(zone_ids)

    bus_ids = [b.id for b in m.buses]
    if len(set(bus_ids)) != len(bus_ids):
        raise ValidationError("duplicate bus ids")
    bus_set = set(bus_ids)
    for b in m.buses:
        if b.zone not in zone_set:
            raise ValidationError(f"bus {b.id}: zone {b.zone!r} not defined")
    buses_per_zone = {z: 0 for z in zone_set}
    for b in m.buses:
        buses_per_zone[b.zone] += 1
    for z, count in buses_per_zone.items():
        if count == 0:
            raise ValidationError(f"zone {z}: no bus maps to it")

    seen = set()
    for br in m.branches:
        if br.id in seen:
            raise ValidationError(f"duplicate branch id {br.id}")
        seen.add(br.id)
        if br.from_bus == br.to_bus:
            raise ValidationError(f"branch {br.id}: from_bus equals to_bus")
        for end in (br.from_bus, br.to_bus):
            if end not in bus_set:
                raise ValidationError(f"branch {br.id}: bus {end!r} not defined")
        if not br.reactance > 0:
            raise ValidationError(f"branch {br.id}: reactance must be > 0")
        if not br.rating > 0:
            raise ValidationError(f"branch {br.id}: rating must be > 0")

    max_cost = m.max_marginal_cost()

    unit_ids = set()
    for u in m.thermal_units:
        if u.id in unit_ids:
            raise ValidationError(f"duplicate unit id {u.id}")
        unit_ids.add(u.id)
        if u.bus not in bus_set:
            raise ValidationError(f"thermal {u.id}: bus {u.bus!r} not defined")
        if u.technology not in THERMAL_TECHNOLOGIES:
            raise ValidationError(f"thermal {u.id}: unknown technology {u.technology!r}")
        if u.speed_class not in SPEED_CLASSES:
            raise ValidationError(f"thermal {u.id}: unknown speed class {u.speed_class!r}")
        if not 0 <= u.p_min <= u.p_max:
            raise ValidationError(f"thermal {u.id}: need 0 <= p_min <= p_max")
        if u.speed_class == "fast" and u.p_min != 0:
            raise ValidationError(f"thermal {u.id}: fast units must have p_min = 0")
        if not (u.ramp_up > 0 and u.ramp_down > 0):
            raise ValidationError(f"thermal {u.id}: ramp limits must be > 0")
        if u.initial_status not in ("on", "off"):
            raise ValidationError(f"thermal {u.id}: initial_status must be 'on' or 'off'")
        u.marginal_cost = _check_series("marginal_cost", f"thermal {u.id}", u.marginal_cost, m.horizon)

    for s in m.storage_units:
        if s.id in unit_ids:
            raise ValidationError(f"duplicate unit id {s.id}")
        unit_ids.add(s.id)
        if s.bus not in bus_set:
            raise ValidationError(f"storage {s.id}: bus {s.bus!r} not defined")
        if s.technology not in STORAGE_TECHNOLOGIES:
            raise ValidationError(f"storage {s.id}: unknown technology {s.technology!r}")
        if not (0 <= s.pd_min <= s.pd_max and 0 <= s.pc_min <= s.pc_max):
            raise ValidationError(f"storage {s.id}: discharge/charge bounds out of order")
        if not s.e_min <= s.e_initial <= s.e_max:
            raise ValidationError(f"storage {s.id}: need e_min <= e_initial <= e_max")
        if not (0 < s.eta_c <= 1 and 0 < s.eta_d <= 1):
            raise ValidationError(f"storage {s.id}: efficiencies must lie in (0, 1]")
        if s.sd_rate < 0 or s.sw_max < 0:
            raise ValidationError(f"storage {s.id}: sd_rate/sw_max must be >= 0")
        s.inflows = _check_series("inflows", f"storage {s.id}", s.inflows, m.horizon)
        for fname in STORAGE_ZERO_FIELDS[s.technology]:
            value = getattr(s, fname)
            nonzero = np.any(value != 0) if fname == "inflows" else value != 0
            if nonzero:
                raise ValidationError(
                    f"storage {s.id}: technology {s.technology} requires zero {fname}"
                )

    for r in m.renewable_units:
        if r.id in unit_ids:
            raise ValidationError(f"duplicate unit id {r.id}")
        unit_ids.add(r.id)
        if r.bus not in bus_set:
            raise ValidationError(f"renewable {r.id}: bus {r.bus!r} not defined")
        if r.technology not in RENEWABLE_TECHNOLOGIES:
            raise ValidationError(f"renewable {r.id}: unknown technology {r.technology!r}")
        r.forecast = _check_series("forecast", f"renewable {r.id}", r.forecast, m.horizon)
        if np.any(r.forecast < 0):
            raise ValidationError(f"renewable {r.id}: forecast must be >= 0 elementwise")

    for d in m.demands:
        if d.id in unit_ids:
            raise ValidationError(f"duplicate entity id {d.id}")
        unit_ids.add(d.id)
        if d.bus not in bus_set:
            raise ValidationError(f"demand {d.id}: bus {d.bus!r} not defined")
        d.scheduled = _check_series("scheduled", f"demand {d.id}", d.scheduled, m.horizon)
        if np.any(d.scheduled < 0):
            raise ValidationError(f"demand {d.id}: scheduled demand must be >= 0")
        if not d.shed_cost >= d.bid_price:
            raise ValidationError(f"demand {d.id}: shed_cost must be >= bid_price")
        if not d.bid_price > max_cost:
            raise ValidationError(
                f"demand {d.id}: bid_price {d.bid_price} must exceed the highest "
                f"unit marginal cost {max_cost}"
            )

    bus_zone = m.bus_zone()
    for ic in m.interconnectors:
        if ic.from_zone == ic.to_zone:
            raise ValidationError(f"interconnector {ic.id}: endpoints in the same zone")
        for z in (ic.from_zone, ic.to_zone):
            if z not in zone_set:
                raise ValidationError(f"interconnector {ic.id}: zone {z!r} not defined")
        if ic.ntc_forward < 0 or ic.ntc_backward < 0:
            raise ValidationError(f"interconnector {ic.id}: NTC values must be >= 0")
        branch_map = m.branch_by_id()
        for bid in ic.member_branches:
            if bid not in branch_map:
                raise ValidationError(f"interconnector {ic.id}: member branch {bid!r} not defined")
            br = branch_map[bid]
            ends = {bus_zone[br.from_bus], bus_zone[br.to_bus]}
            if ends != {ic.from_zone, ic.to_zone}:
                raise ValidationError(
                    f"interconnector {ic.id}: branch {bid} does not cross its zone pair"
                )

    for owner, fc in m.forecasts.items():
        fc.rho = _check_series("price forecast", f"forecast for {owner}", fc.rho, m.horizon)
        if fc.noise_sigma < 0:
            raise ValidationError(f"forecast for {owner}: noise_sigma must be >= 0")
