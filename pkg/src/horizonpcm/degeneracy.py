"""Controlled experiments on alternate optima and their drift across windows.

Twin runs solve the same sequential problem under two tie-break policies.
Because storage devices with equal costs, and zero-cost renewables, leave
many dispatch patterns at the same objective, the two runs can commit
different patterns; later windows then start from different states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime

import numpy as np

from .formulation import (DISPATCH_KINDS, CostConfig, FormulationOptions, MilpProblem,
                          perturb_storage_costs)
from .horizon import HorizonPolicy, SimulationLedger, run_simulation
from .metrics import cumulative_tpc_delta, soc_delta, storage_revenue, total_production_cost
from .pricing import compute_lmps
from .solver import SolveResult, SolveSettings, solve_milp
from .system import (LDES, SDES, SOLAR, WIND, StorageUnit, SystemSpec, ThermalUnit,
                     TimeSeriesFrame, VreUnit, Zone)

TWIN_STORAGE = "twin_storage"
VRE_SPLIT = "vre_split"
MYOPIA = "myopia"

_ONSET_TOL = 1e-6


class TwinRunError(RuntimeError):
    def __init__(self, label: str, cause: Exception):
        self.label = label
        super().__init__(f"run {label}: {cause}")


@dataclass
class ComparisonReport:
    tpc_daily_delta: np.ndarray
    cumulative_delta: np.ndarray
    soc_delta: dict[str, np.ndarray]
    dispatch_distance: dict[str, np.ndarray]     # family -> per-day L1, MWh
    objective_rel_diff: np.ndarray               # per window
    revenue_gap: dict[str, float]
    onset_day: int | None
    ledger_a: SimulationLedger = field(repr=False)
    ledger_b: SimulationLedger = field(repr=False)

    def summary(self) -> dict:
        return {
            "onset_day": self.onset_day,
            "days": int(self.tpc_daily_delta.size),
            "tpc_daily_delta": self.tpc_daily_delta.tolist(),
            "cumulative_tpc_delta": self.cumulative_delta.tolist(),
            "max_objective_rel_diff": float(self.objective_rel_diff.max(initial=0.0)),
            "dispatch_distance_total": {k: float(v.sum())
                                        for k, v in self.dispatch_distance.items()},
            "soc_delta_max_abs_pct": {k: float(np.abs(v).max(initial=0.0))
                                      for k, v in self.soc_delta.items()},
            "revenue_gap": self.revenue_gap,
        }


def _rel_diff(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _daily_l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    per_hour = np.abs(a - b).sum(axis=1) if a.ndim == 2 else np.abs(a - b)
    return np.bincount(np.arange(per_hour.size) // 24, weights=per_hour,
                       minlength=math.ceil(per_hour.size / 24))


def dispatch_distances(a: SimulationLedger, b: SimulationLedger) -> dict[str, np.ndarray]:
    """Per-day L1 distance of continuous dispatch, by resource family."""
    ra, rb = a.records, b.records
    out = {"thermal": _daily_l1(ra["thermal_p"], rb["thermal_p"]),
           "VRE": _daily_l1(ra["vre_p"], rb["vre_p"])}
    for tech in (SDES, LDES):
        idx = [k for k, s in enumerate(a.spec.storage_units) if s.technology == tech]
        if not idx:
            continue
        out[tech] = (_daily_l1(ra["storage_charge"][:, idx], rb["storage_charge"][:, idx])
                     + _daily_l1(ra["storage_discharge"][:, idx],
                                 rb["storage_discharge"][:, idx]))
    return out


def compare_ledgers(a: SimulationLedger, b: SimulationLedger,
                    series: TimeSeriesFrame | None = None,
                    settings: SolveSettings = SolveSettings()) -> ComparisonReport:
    """Pairwise metrics with ``a`` as the minuend.

    Revenue gaps need prices, which are computed only when the input
    ``series`` is supplied.
    """
    daily = total_production_cost(a).daily - total_production_cost(b).daily
    techs = [t for t in (SDES, LDES) if a.spec.storage(t)]
    dist = dispatch_distances(a, b)
    total = sum(dist.values())
    moved = np.flatnonzero(total > _ONSET_TOL)
    onset = int(moved[0]) if moved.size else None
    rel = np.array([_rel_diff(wa.objective, wb.objective)
                    for wa, wb in zip(a.windows, b.windows)])
    gaps = {}
    if series is not None:
        pa = compute_lmps(a.spec, series, a, settings)
        pb = compute_lmps(b.spec, series, b, settings)
        for t in techs:
            gaps[t] = storage_revenue(a, pa, t)["total"] - storage_revenue(b, pb, t)["total"]
    return ComparisonReport(daily, cumulative_tpc_delta(a, b),
                            {t: soc_delta(a, b, t) for t in techs}, dist, rel, gaps,
                            onset, a, b)


def twin_run(spec: SystemSpec, series: TimeSeriesFrame, policy: HorizonPolicy,
             settings_a: SolveSettings, settings_b: SolveSettings,
             costs_a: CostConfig | None = None, costs_b: CostConfig | None = None,
             prices: bool = False,
             options: FormulationOptions = FormulationOptions()) -> ComparisonReport:
    """Run the same simulation under two solver configurations and compare."""
    ledgers = []
    for label, settings, costs in (("A", settings_a, costs_a), ("B", settings_b, costs_b)):
        try:
            ledgers.append(run_simulation(spec, series, policy, settings, options, costs))
        except Exception as exc:  # noqa: BLE001 - re-raised with the run label
            raise TwinRunError(label, exc) from exc
    return compare_ledgers(ledgers[0], ledgers[1], series if prices else None, settings_a)


# --------------------------------------------------------------------------
# alternate optima on a single window
# --------------------------------------------------------------------------

@dataclass
class AlternateOptima:
    equal_objective: bool
    max_dispatch_distance: float
    objectives: list[float]
    results: list[SolveResult] = field(repr=False)


def detect_alternate_optima(problem: MilpProblem, settings: SolveSettings,
                            policies: list) -> AlternateOptima:
    """Solve one problem under several tie-break policies and compare the answers.

    ``policies`` holds tie-break names or complete ``SolveSettings``.
    """
    if len(policies) < 2:
        raise ValueError("at least two policies are needed")
    runs = [p if isinstance(p, SolveSettings) else replace(settings, tie_break=p)
            for p in policies]
    results = []
    for s in runs:
        res = solve_milp(problem, s)
        if not res.has_solution:
            raise RuntimeError(f"solve under {s.tie_break} ended with status {res.status}")
        results.append(res)
    kinds = problem.catalog.kinds()
    cols = np.flatnonzero(np.isin(kinds, DISPATCH_KINDS))
    gap = max(s.rel_gap for s in runs)
    equal, dist = True, 0.0
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            equal &= _rel_diff(results[i].objective, results[j].objective) <= 2 * gap
            dist = max(dist, float(np.abs(results[i].x[cols] - results[j].x[cols]).sum()))
    return AlternateOptima(bool(equal), dist, [r.objective for r in results], results)


# --------------------------------------------------------------------------
# crafted instances
# --------------------------------------------------------------------------

_START = datetime(2050, 1, 1)


def _peaker(zone: str, cap: float, uid: str = "peaker") -> ThermalUnit:
    return ThermalUnit(uid, zone, 0.0, cap, 200.0, startup_cost=100.0)


# the must-run block stands in for the rest of a large system, so that state
# differences cost little relative to a window objective
TWIN_BASE_MW = 20_000.0


def _twin_storage(seed: int, days: int):
    rng = np.random.default_rng(seed)
    T = 24 * days
    hod = np.arange(T) % 24
    day = np.arange(T) // 24
    # the devices can only displace the mid-merit unit in the evening and can
    # only charge from midday solar, which varies from day to day
    evening = (hod >= 18) & (hod < 22)
    extra = np.where(day < 2, 2.0, rng.uniform(5.0, 20.0, days)[day])
    load = TWIN_BASE_MW + np.where(evening, extra, 0.0)
    amp = rng.uniform(3.0, 25.0, days)[day]
    solar = np.where(day < 2, 0.0, amp * np.clip(np.sin(np.pi * (hod - 6) / 12), 0, None))
    z = Zone("z1", "zone 1")
    thermal = (ThermalUnit("base", "z1", TWIN_BASE_MW, TWIN_BASE_MW, 20.0),
               ThermalUnit("mid", "z1", 0.0, 100.0, 60.0))
    vre = (VreUnit("solar1", "z1", 40.0, "solar1", SOLAR),)
    storage = tuple(StorageUnit.with_defaults(f"ldes{k}", "z1", 10.0, LDES) for k in (1, 2))
    spec = SystemSpec((z,), (), thermal, vre, storage, (), perturb_pct=0.0,
                      perturb_seed=seed)
    return spec, TimeSeriesFrame(_START, T, {"z1": np.round(load, 6)},
                                 {"solar1": np.round(solar, 6)})


def _vre_split(seed: int, days: int):
    rng = np.random.default_rng(seed)
    T = 24 * days
    hod = np.arange(T) % 24
    load = 80.0 + 20.0 * np.sin(2 * np.pi * (hod - 9) / 24) + rng.uniform(-2, 2, T)
    wind = np.clip(60.0 + 15.0 * np.sin(2 * np.pi * np.arange(T) / 37.0), 0, 100)
    z = Zone("z1", "zone 1")
    thermal = (ThermalUnit("base", "z1", 0.0, 150.0, 25.0),)
    vre = (VreUnit("wind1", "z1", 100.0, "wind_a", WIND),
           VreUnit("wind2", "z1", 100.0, "wind_b", WIND))
    spec = SystemSpec((z,), (), thermal, vre, (), (), perturb_pct=0.0, perturb_seed=seed)
    avail = {"wind_a": np.round(wind, 6), "wind_b": np.round(wind, 6)}
    return spec, TimeSeriesFrame(_START, T, {"z1": np.round(load, 6)}, avail)


# myopia instance sizing: LDES power P, deficit 0.9 P for ten evening hours of day 3
MYOPIA_POWER = 10.0
MYOPIA_DEFICIT_HOURS = 10


def _myopia(seed: int):
    rng = np.random.default_rng(seed)
    P = MYOPIA_POWER
    T = 72
    hod = np.arange(T) % 24
    day = np.arange(T) // 24
    base = 50.0 + np.round(rng.uniform(-1.0, 1.0, T), 3)
    vre = base.copy()
    sunny = (day == 0) & (hod >= 7) & (hod < 17)
    vre[sunny] += P                                    # ten hours of surplus
    short = (day == 2) & (hod >= 12) & (hod < 12 + MYOPIA_DEFICIT_HOURS)
    vre[short] -= 0.9 * P
    z = Zone("z1", "zone 1")
    spec = SystemSpec((z,), (), (_peaker("z1", 2 * P),),
                      (VreUnit("pv1", "z1", 100.0, "pv1", SOLAR),),
                      (StorageUnit.with_defaults("ldes1", "z1", P, LDES),), (),
                      perturb_pct=0.0, perturb_seed=seed)
    return spec, TimeSeriesFrame(_START, T, {"z1": base}, {"pv1": vre})


def build_degenerate_instance(kind: str, seed: int = 0, days: int | None = None):
    """Small crafted instance with a known degeneracy or look-ahead structure.

    ``twin_storage`` and ``vre_split`` default to four days; ``days``
    lengthens them for sequential experiments.  ``myopia`` is always three
    days.
    """
    if kind == TWIN_STORAGE:
        return _twin_storage(seed, days or 4)
    if kind == VRE_SPLIT:
        return _vre_split(seed, days or 4)
    if kind == MYOPIA:
        return _myopia(seed)
    raise ValueError(f"unknown instance kind {kind!r}")


def myopia_certified_gap(spec: SystemSpec, costs: CostConfig) -> float:
    """Cost advantage of seeing the day-3 shortfall from day 1.

    Without the look-ahead the device only holds its initial usable energy
    when the shortfall arrives and the peaker covers the rest; with it the
    device is filled to the top on day 1 and covers the whole shortfall.
    """
    s = spec.storage_units[0]
    peaker = spec.thermal_units[0]
    c = costs.storage_cost[s.id]
    need = 0.9 * MYOPIA_POWER * MYOPIA_DEFICIT_HOURS
    initial_usable = 0.5 * s.soc_max - s.soc_min
    short = need - initial_usable
    extra_charge = (s.soc_max - 0.5 * s.soc_max) / s.eta_charge
    return peaker.fuel_cost * short + peaker.startup_cost - c * (extra_charge + short)


def unperturbed_costs(spec: SystemSpec) -> CostConfig:
    return perturb_storage_costs(spec, 0.0, spec.perturb_seed)
