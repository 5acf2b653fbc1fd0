"""Production cost, storage and curtailment metrics over simulation ledgers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .horizon import SimulationLedger
from .pricing import PriceSeries
from .system import LDES, SDES

HOURS_PER_YEAR = 8760


@dataclass(frozen=True)
class ProductionCost:
    daily: np.ndarray
    total: float


@dataclass
class MetricReport:
    tpc_daily: np.ndarray
    tpc_total: float
    revenue: dict[str, dict[str, float]]
    cycles: dict[str, float]
    curtailment_pct: float
    generation: dict[str, float]
    cumulative_delta: np.ndarray | None = None
    soc_delta: dict[str, np.ndarray] = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "tpc_total": self.tpc_total,
            "tpc_daily": self.tpc_daily.tolist(),
            "revenue": self.revenue,
            "equivalent_cycles": self.cycles,
            "curtailment_pct": self.curtailment_pct,
            "generation_mwh": self.generation,
        }
        if self.cumulative_delta is not None:
            out["cumulative_tpc_delta"] = self.cumulative_delta.tolist()
            out["soc_delta_max_abs_pct"] = {k: float(np.abs(v).max(initial=0.0))
                                            for k, v in self.soc_delta.items()}
        return out


def _days(hours: int) -> np.ndarray:
    return np.arange(hours) // 24


def total_production_cost(ledger: SimulationLedger) -> ProductionCost:
    """Objective terms of the committed hours, summed per 24 h day."""
    hourly = ledger.hourly_cost()
    daily = np.bincount(_days(ledger.hours), weights=hourly)
    return ProductionCost(daily, float(hourly.sum()))


def _check_calendar(a: SimulationLedger, b: SimulationLedger) -> None:
    if a.hours != b.hours or a.start != b.start:
        raise ValueError("ledgers cover different calendars")


def cumulative_tpc_delta(a: SimulationLedger, b: SimulationLedger) -> np.ndarray:
    """Running sum over days of TPC(a) - TPC(b)."""
    _check_calendar(a, b)
    return np.cumsum(total_production_cost(a).daily - total_production_cost(b).daily)


def _fleet(ledger: SimulationLedger, technology: str | None):
    idx = [k for k, s in enumerate(ledger.spec.storage_units)
           if technology is None or s.technology == technology]
    return idx, [ledger.spec.storage_units[k] for k in idx]


def soc_delta(a: SimulationLedger, b: SimulationLedger, technology: str) -> np.ndarray:
    """Hourly fleet SOC difference as a percentage of fleet energy capacity."""
    _check_calendar(a, b)
    ia, fa = _fleet(a, technology)
    ib, fb = _fleet(b, technology)
    if [(s.id, s.soc_max) for s in fa] != [(s.id, s.soc_max) for s in fb]:
        raise ValueError(f"{technology} fleets differ between ledgers")
    if not fa:
        raise ValueError(f"no {technology} storage in the ledgers")
    cap = sum(s.energy_capacity for s in fa)
    diff = a.records["storage_soc"][:, ia].sum(axis=1) - b.records["storage_soc"][:, ib].sum(axis=1)
    return diff / cap * 100.0


def storage_revenue(ledger: SimulationLedger, prices: PriceSeries,
                    technology: str | None = None) -> dict[str, float]:
    """Energy arbitrage revenue at zonal prices, total and per MW-year of discharge rating."""
    if prices.hours < ledger.hours:
        raise ValueError("prices do not cover the ledger hours")
    idx, fleet = _fleet(ledger, technology)
    total = 0.0
    for k, s in zip(idx, fleet):
        lmp = prices.zone(s.zone)[:ledger.hours]
        net = ledger.records["storage_discharge"][:, k] - ledger.records["storage_charge"][:, k]
        total += float(lmp @ net)
    mw = sum(s.discharge_max for s in fleet)
    years = ledger.hours / HOURS_PER_YEAR
    per = total / (mw * years) if mw > 0 else 0.0
    return {"total": total, "per_mw_year": per}


def cycles_ratio(discharge_mwh: float, capacity_mwh: float) -> float:
    if capacity_mwh <= 0:
        raise ValueError("capacity must be positive")
    return discharge_mwh / capacity_mwh


def equivalent_cycles(ledger: SimulationLedger, technology: str | None = None) -> float:
    """Fleet discharge energy over fleet energy capacity."""
    idx, fleet = _fleet(ledger, technology)
    if not fleet:
        raise ValueError(f"no {technology or 'storage'} units in the ledger")
    discharged = float(ledger.records["storage_discharge"][:, idx].sum())
    return cycles_ratio(discharged, sum(s.soc_max for s in fleet))


def curtailment(ledger: SimulationLedger) -> float:
    """Percentage of available VRE energy that was not dispatched."""
    avail = float(ledger.availability.sum())
    if avail <= 0:
        raise ValueError("no VRE availability")
    used = float(ledger.records["vre_p"].sum())
    return float(np.clip(100.0 * (avail - used) / avail, 0.0, 100.0))


def generation_totals(ledger: SimulationLedger) -> dict[str, float]:
    r = ledger.records
    return {
        "thermal": float(r["thermal_p"].sum()),
        "vre": float(r["vre_p"].sum()),
        "storage_discharge": float(r["storage_discharge"].sum()),
        "storage_charge": float(r["storage_charge"].sum()),
        "dropped_load": float(r["dropped"].sum()),
    }


def _technologies(ledger: SimulationLedger) -> list[str]:
    present = {s.technology for s in ledger.spec.storage_units}
    return [t for t in (SDES, LDES) if t in present]


def metric_report(ledger: SimulationLedger, prices: PriceSeries | None = None,
                  other: SimulationLedger | None = None) -> MetricReport:
    """All single-ledger metrics, plus pairwise deltas when ``other`` is given."""
    tpc = total_production_cost(ledger)
    techs = _technologies(ledger)
    revenue = {t: storage_revenue(ledger, prices, t) for t in techs} if prices else {}
    cycles = {t: equivalent_cycles(ledger, t) for t in techs}
    curt = curtailment(ledger) if ledger.availability.sum() > 0 else 0.0
    rep = MetricReport(tpc.daily, tpc.total, revenue, cycles, curt, generation_totals(ledger))
    if other is not None:
        rep.cumulative_delta = cumulative_tpc_delta(ledger, other)
        rep.soc_delta = {t: soc_delta(ledger, other, t) for t in techs}
    return rep


# --------------------------------------------------------------------------
# plot-ready tables
# --------------------------------------------------------------------------

def ledger_net_load(ledger: SimulationLedger) -> np.ndarray:
    return ledger.load.sum(axis=1) - ledger.availability.sum(axis=1)


def daily_net_load_table(ledger: SimulationLedger, other: SimulationLedger | None = None):
    """Columns: day, net load MWh, cumulative TPC delta (zero without a second ledger)."""
    nl = np.bincount(_days(ledger.hours), weights=ledger_net_load(ledger))
    delta = cumulative_tpc_delta(ledger, other) if other is not None else np.zeros_like(nl)
    return ["day", "net_load_mwh", "cumulative_tpc_delta"], \
        np.column_stack([np.arange(nl.size), nl, delta])


def soc_histogram_table(ledger: SimulationLedger, bins: int = 10):
    """SOC occupancy (% of capacity) split by the sign of hourly net load."""
    nl = ledger_net_load(ledger)
    edges = np.linspace(0.0, 100.0, bins + 1)
    header = ["technology", "bin_low_pct", "bin_high_pct", "hours_net_load_pos",
              "hours_net_load_neg"]
    rows = []
    for tech in _technologies(ledger):
        idx, fleet = _fleet(ledger, tech)
        pct = ledger.records["storage_soc"][:, idx].sum(axis=1) / sum(
            s.energy_capacity for s in fleet) * 100.0
        pos, _ = np.histogram(pct[nl >= 0], edges)
        neg, _ = np.histogram(pct[nl < 0], edges)
        rows += [[tech, edges[k], edges[k + 1], int(pos[k]), int(neg[k])] for k in range(bins)]
    return header, rows


def dispatch_week_table(ledger: SimulationLedger, week: int = 0):
    """Hourly dispatch stack and SOC traces for one week of the ledger."""
    lo = 168 * week
    hi = min(lo + 168, ledger.hours)
    if lo >= ledger.hours:
        raise ValueError(f"week {week} is outside the ledger")
    r = ledger.records
    cols = {
        "hour": np.arange(lo, hi),
        "load": ledger.load[lo:hi].sum(axis=1),
        "thermal": r["thermal_p"][lo:hi].sum(axis=1),
        "vre": r["vre_p"][lo:hi].sum(axis=1),
        "storage_discharge": r["storage_discharge"][lo:hi].sum(axis=1),
        "storage_charge": r["storage_charge"][lo:hi].sum(axis=1),
        "dropped_load": r["dropped"][lo:hi].sum(axis=1),
    }
    for tech in _technologies(ledger):
        idx, _ = _fleet(ledger, tech)
        cols[f"soc_{tech}"] = r["storage_soc"][lo:hi][:, idx].sum(axis=1)
    return list(cols), np.column_stack(list(cols.values()))
