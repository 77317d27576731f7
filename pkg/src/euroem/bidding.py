"""Final day-ahead bid construction from preferred positions.

Slow thermal units offer their scheduled volume above the minimum operating
limit and push the minimum-run volume itself as a negatively priced bid so
it clears ahead of the stack.  Fast thermal units always offer all available
capacity.  Storage offers cleared price-taker style: discharge at
``sigma_pd`` (default 0) and charge at ``sigma_pc`` (default the demand-shed
cost), with the minimum-bound volumes on the negative side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd


class BiddingError(ValueError):
    pass


@dataclass
class BidCurve:
    """One unit-side bid ladder: positive and negative quantity/price arrays."""

    qty_pos: np.ndarray
    price_pos: np.ndarray
    qty_neg: np.ndarray
    price_neg: np.ndarray


@dataclass
class BidSet:
    horizon: int
    thermal: dict = field(default_factory=dict)
    discharge: dict = field(default_factory=dict)
    charge: dict = field(default_factory=dict)
    sigma_pd: float = 0.0
    sigma_pc: float = 0.0


def system_voll(system, default=3000.0):
    """Highest demand shed cost, used as the price of charge-side bids."""
    if not system.demands:
        return default
    return max(d.shed_cost for d in system.demands)


def form_bids(positions, system, sigma_pd=None, sigma_pc=None):
    """Turn a PositionSchedule into the final BidSet for market clearing."""
    sigma_pd = system.config.sigma_pd if sigma_pd is None else sigma_pd
    if sigma_pc is None:
        sigma_pc = system.config.sigma_pc
    if sigma_pc is None:
        sigma_pc = system_voll(system)
    T = system.horizon
    bids = BidSet(horizon=T, sigma_pd=sigma_pd, sigma_pc=sigma_pc)

    for unit in system.thermal_units:
        if unit.id not in positions.thermal:
            raise BiddingError(f"unit {unit.id}: no position covers it")
        pos = positions.thermal[unit.id]
        if unit.speed_class == "fast":
            qty_pos = np.full(T, unit.p_max - unit.p_min)
            qty_neg = np.zeros(T)
        else:
            stat = pos.nu_stat.astype(float)
            qty_pos = (pos.p - unit.p_min) * stat
            qty_neg = unit.p_min * stat
        _reject_negative(qty_pos, unit.id, "positive thermal")
        bids.thermal[unit.id] = BidCurve(
            qty_pos=qty_pos,
            price_pos=unit.marginal_cost.copy(),
            qty_neg=qty_neg,
            price_neg=-unit.marginal_cost,
        )

    voll = system_voll(system)
    for unit in system.storage_units:
        if unit.id not in positions.storage:
            raise BiddingError(f"unit {unit.id}: no position covers it")
        pos = positions.storage[unit.id]
        qty_d = pos.pd - unit.pd_min
        qty_c = pos.pc - unit.pc_min
        _reject_negative(qty_d, unit.id, "discharge")
        _reject_negative(qty_c, unit.id, "charge")
        bids.discharge[unit.id] = BidCurve(
            qty_pos=qty_d,
            price_pos=np.full(T, sigma_pd),
            qty_neg=np.full(T, unit.pd_min),
            price_neg=np.full(T, sigma_pd),
        )
        bids.charge[unit.id] = BidCurve(
            qty_pos=qty_c,
            price_pos=np.full(T, sigma_pc),
            qty_neg=np.full(T, unit.pc_min),
            price_neg=np.full(T, voll),
        )
    return bids


def _reject_negative(qty, uid, label, tol=1e-9):
    if qty.size and qty.min() < -tol:
        hour = int(np.argmin(qty))
        raise BiddingError(
            f"unit {uid}: negative {label} bid quantity {qty[hour]:.6g} at hour {hour}"
        )
    np.clip(qty, 0.0, None, out=qty)


def dump_bids(bids, path, float_format="%.6f"):
    """Write ``bids.csv`` (unit, hour, side, quantity, price)."""
    records = []

    def emit(group, side):
        for uid, curve in group.items():
            for t in range(bids.horizon):
                records.append((uid, t, side, curve.qty_pos[t], curve.price_pos[t]))
                records.append((uid, t, side + "_neg", curve.qty_neg[t], curve.price_neg[t]))

    emit(bids.thermal, "supply")
    emit(bids.discharge, "discharge")
    emit(bids.charge, "charge")
    df = pd.DataFrame.from_records(records, columns=["unit", "hour", "side", "quantity", "price"])
    df.to_csv(path, index=False, float_format=float_format)
