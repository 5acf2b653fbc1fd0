"""Locational marginal prices from fixed-commitment LP duals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formulation import build_window, fix_binaries
from .horizon import SimulationLedger, window_initial_conditions
from .solver import OPTIMAL, SolveSettings, solve_lp
from .system import SystemSpec, TimeSeriesFrame


class PricingError(RuntimeError):
    pass


@dataclass
class PriceSeries:
    zone_ids: list[str]
    lmp: np.ndarray               # committed hours x zones, $/MWh
    window_status: list[str]
    window_objective: list[float]  # fixed-commitment LP optimum per window

    @property
    def hours(self) -> int:
        return self.lmp.shape[0]

    def zone(self, zone_id: str) -> np.ndarray:
        return self.lmp[:, self.zone_ids.index(zone_id)]


def balance_rows(problem, zone_ids) -> np.ndarray:
    """Row index of every (hour, zone) nodal balance constraint."""
    where = {name: k for k, name in enumerate(problem.row_names)
             if name.startswith("balance[")}
    return np.array([[where[f"balance[{z},{t}]"] for z in zone_ids]
                     for t in range(problem.window_hours)], dtype=int)


def compute_lmps(spec: SystemSpec, series: TimeSeriesFrame, ledger: SimulationLedger,
                 settings: SolveSettings = SolveSettings()) -> PriceSeries:
    """Re-solve each window with commitment fixed and read the balance duals.

    A price is the change in window cost per additional MW of zonal load.
    Only the committed hours of each window are kept.
    """
    zones = spec.zone_ids
    out = np.zeros((ledger.hours, len(zones)))
    statuses, objectives = [], []
    for w, bins in zip(ledger.windows, ledger.window_binaries):
        init = window_initial_conditions(ledger, w.start)
        problem = build_window(spec, series, (w.start, w.start + w.hours), init,
                               ledger.costs, ledger.options)
        if bins.size != problem.n_binaries:
            raise PricingError(f"window {w.index}: stored commitment does not match the window")
        x = np.zeros(problem.n_cols)
        x[problem.integrality] = bins
        res = solve_lp(fix_binaries(problem, x), settings)
        statuses.append(res.status)
        if res.status != OPTIMAL:
            raise PricingError(f"window {w.index}: fixed-commitment LP is {res.status}")
        objectives.append(res.objective)
        rows = balance_rows(problem, zones)[:w.committed]
        out[w.start:w.start + w.committed] = res.duals[rows]
    out = np.where(np.abs(out) < 1e-12, 0.0, out) + 0.0
    return PriceSeries(list(zones), out, statuses, objectives)


def price_stats(prices: PriceSeries, load: np.ndarray | None = None) -> dict[str, float]:
    """Mean and population standard deviation over all zone-hours.

    Passing ``load`` (same shape as the prices) weights each zone-hour by
    its load instead.
    """
    v = np.asarray(prices.lmp if isinstance(prices, PriceSeries) else prices, dtype=float)
    if v.size == 0:
        raise ValueError("empty price series")
    if load is None:
        return {"mean": float(v.mean()), "stdev": float(v.std())}
    w = np.asarray(load, dtype=float)
    if w.shape != v.shape or w.sum() <= 0:
        raise ValueError("load weights must match the prices and sum to a positive value")
    mean = float((v * w).sum() / w.sum())
    return {"mean": mean, "stdev": float(np.sqrt((w * (v - mean) ** 2).sum() / w.sum()))}
