"""Static grid description, hourly time series, validation and synthetic systems.

Units: MW for power, MWh for energy, $/MWh for energy prices, radians for
bus angles. Every hourly series is indexed from 0 to ``hours - 1`` relative
to ``TimeSeriesFrame.start``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import Mapping, Sequence

import numpy as np

SDES = "SDES"
LDES = "LDES"
SOLAR = "solar"
WIND = "wind"

# storage class defaults: (charge efficiency, duration in hours, nominal op cost $/MWh)
STORAGE_DEFAULTS = {
    SDES: (0.85, 4.0, 0.001),
    LDES: (0.65, 10.0, 0.005),
}
SOC_MIN_FRACTION = 0.1
INITIAL_SOC_FRACTION = 0.5
DEFAULT_PENALTY = 10_000.0
DEFAULT_RESERVE_FRACTION = 0.03


@dataclass(frozen=True)
class Zone:
    id: str
    name: str = ""
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2


@dataclass(frozen=True)
class Line:
    id: str
    from_zone: str
    to_zone: str
    susceptance: float
    flow_min: float
    flow_max: float


@dataclass(frozen=True)
class ThermalUnit:
    id: str
    zone: str
    p_min: float
    p_max: float
    fuel_cost: float
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    ramp_up: float = math.inf
    ramp_down: float = math.inf
    reserve_eligible: tuple[str, ...] = ()


@dataclass(frozen=True)
class VreUnit:
    id: str
    zone: str
    capacity: float
    availability_series_key: str
    technology: str = SOLAR
    reserve_eligible: tuple[str, ...] = ()


@dataclass(frozen=True)
class StorageUnit:
    id: str
    zone: str
    charge_max: float
    discharge_max: float
    duration_hours: float
    soc_max: float
    soc_min: float
    eta_charge: float
    eta_discharge: float
    op_cost_nominal: float
    technology: str = SDES
    reserve_eligible: tuple[str, ...] = ()

    @property
    def energy_capacity(self) -> float:
        return self.soc_max

    @classmethod
    def with_defaults(cls, id: str, zone: str, power: float, technology: str,
                      reserve_eligible: tuple[str, ...] = ()) -> "StorageUnit":
        """Storage device built from the technology class defaults.

        Charge and discharge ratings are both ``power``; energy capacity is
        duration x power, the floor is 10 % of capacity and discharge is
        lossless.
        """
        eta_c, duration, op_cost = STORAGE_DEFAULTS[technology]
        soc_max = duration * power
        return cls(id=id, zone=zone, charge_max=power, discharge_max=power,
                   duration_hours=duration, soc_max=soc_max,
                   soc_min=SOC_MIN_FRACTION * soc_max, eta_charge=eta_c,
                   eta_discharge=1.0, op_cost_nominal=op_cost,
                   technology=technology, reserve_eligible=reserve_eligible)


@dataclass(frozen=True)
class ReserveProduct:
    id: str
    requirement_series_key: str
    direction: str = "raise"


@dataclass(frozen=True)
class SystemSpec:
    zones: tuple[Zone, ...]
    lines: tuple[Line, ...] = ()
    thermal_units: tuple[ThermalUnit, ...] = ()
    vre_units: tuple[VreUnit, ...] = ()
    storage_units: tuple[StorageUnit, ...] = ()
    reserve_products: tuple[ReserveProduct, ...] = ()
    penalty_dropped_load: float = DEFAULT_PENALTY
    perturb_pct: float = 0.0
    perturb_seed: int = 0
    base_mva: float = 100.0

    @property
    def zone_ids(self) -> list[str]:
        return [z.id for z in self.zones]

    def zone_index(self) -> dict[str, int]:
        return {z.id: k for k, z in enumerate(self.zones)}

    def storage(self, technology: str | None = None) -> list[StorageUnit]:
        return [s for s in self.storage_units
                if technology is None or s.technology == technology]


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Hourly inputs aligned to one calendar.

    ``load`` is keyed by zone id, ``availability`` by VRE series key and
    ``reserve_requirements`` by reserve series key; every array has length
    ``hours``.
    """

    start: datetime
    hours: int
    load: Mapping[str, np.ndarray]
    availability: Mapping[str, np.ndarray] = field(default_factory=dict)
    reserve_requirements: Mapping[str, np.ndarray] = field(default_factory=dict)

    def timestamps(self, lo: int = 0, hi: int | None = None) -> list[datetime]:
        hi = self.hours if hi is None else hi
        return [self.start + timedelta(hours=h) for h in range(lo, hi)]

    def load_matrix(self, zone_ids: Sequence[str]) -> np.ndarray:
        return np.column_stack([np.asarray(self.load[z], dtype=float) for z in zone_ids])

    def window(self, lo: int, hi: int) -> "TimeSeriesFrame":
        """Series restricted to hours ``[lo, hi)``."""
        def cut(d):
            return {k: np.asarray(v, dtype=float)[lo:hi] for k, v in d.items()}
        return TimeSeriesFrame(self.start + timedelta(hours=lo), hi - lo, cut(self.load),
                               cut(self.availability), cut(self.reserve_requirements))

    def equals(self, other: "TimeSeriesFrame") -> bool:
        if self.start != other.start or self.hours != other.hours:
            return False
        for a, b in ((self.load, other.load), (self.availability, other.availability),
                     (self.reserve_requirements, other.reserve_requirements)):
            if set(a) != set(b):
                return False
            if any(not np.array_equal(np.asarray(a[k]), np.asarray(b[k])) for k in a):
                return False
        return True


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    entity: str
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}.{self.field}: {self.rule}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, entity: str, fld: str, rule: str) -> None:
        self.violations.append(Violation(entity, fld, rule))

    def rules(self) -> list[str]:
        return [v.rule for v in self.violations]


def _check_unique(report, items, kind):
    seen = set()
    for it in items:
        if it.id in seen:
            report.add(f"{kind}:{it.id}", "id", "ids unique system-wide")
        seen.add(it.id)


def validate_system(spec: SystemSpec, series: TimeSeriesFrame | None = None,
                    hours: int | None = None) -> ValidationReport:
    """Check every structural and data invariant; violations are returned, not raised.

    ``hours`` is the expected calendar length; it defaults to ``series.hours``.
    """
    rep = ValidationReport()
    zone_ids = set()
    for z in spec.zones:
        if z.id in zone_ids:
            rep.add(f"zone:{z.id}", "id", "ids unique system-wide")
        zone_ids.add(z.id)
        if not z.angle_min < z.angle_max:
            rep.add(f"zone:{z.id}", "angle_min", "angle_min < angle_max")
    if not spec.zones:
        rep.add("system", "zones", "at least one zone")
    for kind, items in (("line", spec.lines), ("thermal", spec.thermal_units),
                        ("vre", spec.vre_units), ("storage", spec.storage_units),
                        ("reserve", spec.reserve_products)):
        _check_unique(rep, items, kind)

    for ln in spec.lines:
        e = f"line:{ln.id}"
        for end in ("from_zone", "to_zone"):
            if getattr(ln, end) not in zone_ids:
                rep.add(e, end, "references an existing zone")
        if ln.from_zone == ln.to_zone:
            rep.add(e, "to_zone", "from_zone != to_zone")
        if not ln.susceptance > 0:
            rep.add(e, "susceptance", "susceptance > 0")
        if not ln.flow_min <= 0 <= ln.flow_max:
            rep.add(e, "flow_max", "flow_min <= 0 <= flow_max")

    products = {r.id for r in spec.reserve_products}
    max_fuel = 0.0
    for u in spec.thermal_units:
        e = f"thermal:{u.id}"
        if u.zone not in zone_ids:
            rep.add(e, "zone", "references an existing zone")
        if not 0 <= u.p_min <= u.p_max:
            rep.add(e, "p_min", "0 <= p_min <= p_max")
        for c in ("fuel_cost", "startup_cost", "shutdown_cost"):
            if getattr(u, c) < 0:
                rep.add(e, c, "costs >= 0")
        if not u.ramp_up > 0:
            rep.add(e, "ramp_up", "ramp_up > 0")
        if not u.ramp_down > 0:
            rep.add(e, "ramp_down", "ramp_down > 0")
        for p in u.reserve_eligible:
            if p not in products:
                rep.add(e, "reserve_eligible", "references an existing reserve product")
        max_fuel = max(max_fuel, u.fuel_cost)

    for v in spec.vre_units:
        e = f"vre:{v.id}"
        if v.zone not in zone_ids:
            rep.add(e, "zone", "references an existing zone")
        if not v.capacity > 0:
            rep.add(e, "capacity", "capacity > 0")
        if v.technology not in (SOLAR, WIND):
            rep.add(e, "technology", "technology in {solar, wind}")
        for p in v.reserve_eligible:
            if p not in products:
                rep.add(e, "reserve_eligible", "references an existing reserve product")

    for s in spec.storage_units:
        e = f"storage:{s.id}"
        if s.zone not in zone_ids:
            rep.add(e, "zone", "references an existing zone")
        if not 0 < s.soc_min < s.soc_max:
            rep.add(e, "soc_min", "soc_min < soc_max")
        if not math.isclose(s.soc_max, s.duration_hours * s.discharge_max, rel_tol=1e-9):
            rep.add(e, "soc_max", "soc_max = duration_hours * discharge_max")
        if not 0 < s.eta_charge <= 1:
            rep.add(e, "eta_charge", "0 < eta_charge <= 1")
        if not 0 < s.eta_discharge <= 1:
            rep.add(e, "eta_discharge", "0 < eta_discharge <= 1")
        if s.charge_max < 0 or s.discharge_max <= 0:
            rep.add(e, "discharge_max", "power ratings positive")
        if s.op_cost_nominal < 0:
            rep.add(e, "op_cost_nominal", "costs >= 0")
        if s.technology not in (SDES, LDES):
            rep.add(e, "technology", "technology in {SDES, LDES}")
        for p in s.reserve_eligible:
            if p not in products:
                rep.add(e, "reserve_eligible", "references an existing reserve product")

    if not spec.penalty_dropped_load > max_fuel:
        rep.add("system", "penalty_dropped_load", "penalty > max fuel cost")
    if not 0 <= spec.perturb_pct < 1:
        rep.add("system", "perturb_pct", "0 <= pct < 1")

    if series is None:
        return rep

    expected = series.hours if hours is None else hours
    if expected != series.hours:
        rep.add("series", "hours", "series length mismatch")

    def check_series(entity, arr):
        a = np.asarray(arr, dtype=float)
        if a.shape != (expected,):
            rep.add(entity, "values", "series length mismatch")
        if np.any(~np.isfinite(a)):
            rep.add(entity, "values", "no missing hours")
        elif np.any(a < 0):
            rep.add(entity, "values", "no negative values")
        return a

    for z in spec.zones:
        if z.id not in series.load:
            rep.add(f"zone:{z.id}", "load", "unresolved series key")
        else:
            check_series(f"load:{z.id}", series.load[z.id])
    for v in spec.vre_units:
        key = v.availability_series_key
        if key not in series.availability:
            rep.add(f"vre:{v.id}", "availability_series_key", "unresolved series key")
            continue
        a = check_series(f"availability:{key}", series.availability[key])
        if a.size and np.nanmax(a) > v.capacity + 1e-9:
            rep.add(f"vre:{v.id}", "availability", "availability values in [0, capacity]")
    for r in spec.reserve_products:
        key = r.requirement_series_key
        if key not in series.reserve_requirements:
            rep.add(f"reserve:{r.id}", "requirement_series_key", "unresolved series key")
        else:
            check_series(f"reserve:{key}", series.reserve_requirements[key])
    return rep


# --------------------------------------------------------------------------
# derived series
# --------------------------------------------------------------------------

def net_load(spec: SystemSpec, series: TimeSeriesFrame,
             hour_range: tuple[int, int] | None = None) -> np.ndarray:
    """Total load minus total VRE availability for each hour in ``[lo, hi)``."""
    lo, hi = (0, series.hours) if hour_range is None else hour_range
    if not 0 <= lo <= hi <= series.hours:
        raise IndexError(f"hour range [{lo}, {hi}) outside series of {series.hours} hours")
    total = np.zeros(hi - lo)
    for z in spec.zones:
        total += np.asarray(series.load[z.id], dtype=float)[lo:hi]
    for v in spec.vre_units:
        total -= np.asarray(series.availability[v.availability_series_key], dtype=float)[lo:hi]
    return total


# --------------------------------------------------------------------------
# synthetic systems
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthParams:
    zones: int = 3
    thermal_per_zone: int = 2
    vre_mix: Mapping[str, int] = field(default_factory=lambda: {SOLAR: 1, WIND: 1})
    storage_mix: Mapping[str, int] = field(default_factory=lambda: {SDES: 1, LDES: 1})
    hours: int = 168
    peak_load: float = 1000.0
    start: datetime = datetime(2050, 5, 7)
    extra_lines: int | None = None


# name, p_min fraction, fuel $/MWh, startup $/MW, ramp fraction/h, reserve eligible
_THERMAL_TEMPLATES = (
    ("base", 0.3, 12.0, 40.0, 0.6, False),
    ("peaker", 0.2, 80.0, 10.0, 1.0, True),
    ("cc", 0.3, 35.0, 20.0, 0.8, True),
)


def _line_pairs(n: int, extra: int | None) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    pairs = [(k, (k + 1) % n) for k in range(n)]
    if extra is None:
        extra = round(5 * n / 7) if n >= 5 else 0
    for k in range(n):
        if len(pairs) >= n + extra:
            break
        a, b = k, (k + 2) % n
        if (a, b) not in pairs and (b, a) not in pairs:
            pairs.append((a, b))
    return pairs


def _smooth_noise(rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    eps = rng.standard_normal(n)
    out = np.empty(n)
    acc = 0.0
    for k in range(n):
        acc = rho * acc + math.sqrt(1 - rho * rho) * eps[k]
        out[k] = acc
    return out


def synth_system(params: SynthParams = SynthParams(), seed: int = 0,
                 perturb_pct: float = 0.10) -> tuple[SystemSpec, TimeSeriesFrame]:
    """Deterministic synthetic grid with diurnal load, solar and wind.

    Storage is built from the technology defaults and placed round-robin
    over the zones; a single raise reserve product requires 3 % of the
    total hourly load.
    """
    if params.zones < 1:
        raise ValueError("zones must be >= 1")
    if params.hours < 24 or params.hours % 24:
        raise ValueError("hours must be a positive multiple of 24")
    if params.thermal_per_zone < 0:
        raise ValueError("thermal_per_zone must be >= 0")

    ss = np.random.SeedSequence(seed)
    rng_load, rng_solar, rng_wind = (np.random.default_rng(s) for s in ss.spawn(3))
    n, T = params.zones, params.hours
    h = np.arange(T)
    hod = h % 24
    day = h // 24
    zone_peak = params.peak_load / n

    zones = tuple(Zone(f"z{k + 1}", f"zone {k + 1}") for k in range(n))
    lines = tuple(
        Line(f"l{k + 1}", zones[a].id, zones[b].id, susceptance=10.0,
             flow_min=-0.3 * zone_peak, flow_max=0.3 * zone_peak)
        for k, (a, b) in enumerate(_line_pairs(n, params.extra_lines)))

    reserve = ReserveProduct("raise", "raise")
    thermal = []
    for z in zones:
        for k in range(params.thermal_per_zone):
            name, fmin, fuel, su, ramp, res = _THERMAL_TEMPLATES[k % len(_THERMAL_TEMPLATES)]
            cap = 0.6 * zone_peak if k == 0 else 0.45 * zone_peak
            thermal.append(ThermalUnit(
                id=f"{z.id}_{name}{k // len(_THERMAL_TEMPLATES) or ''}", zone=z.id,
                p_min=round(fmin * cap, 6), p_max=round(cap, 6), fuel_cost=fuel,
                startup_cost=round(su * cap, 6), shutdown_cost=0.0,
                ramp_up=round(ramp * cap, 6), ramp_down=round(ramp * cap, 6),
                reserve_eligible=("raise",) if res else ()))

    load, avail, vre = {}, {}, []
    season = 1.0 + 0.08 * np.sin(2 * math.pi * day / 365.0)
    for k, z in enumerate(zones):
        phase = 0.3 * k
        shape = 0.72 + 0.2 * np.sin(2 * math.pi * (hod - 10 + phase) / 24)
        noise = 0.02 * rng_load.standard_normal(T)
        load[z.id] = np.round(np.clip(zone_peak * (shape * season + noise), 0, None), 6)
        for tech, count in params.vre_mix.items():
            for c in range(count):
                uid = f"{z.id}_{tech}{c + 1}"
                cap = (0.9 if tech == SOLAR else 0.8) * zone_peak
                if tech == SOLAR:
                    curve = np.clip(np.sin(math.pi * (hod - 6) / 12), 0, None)
                    cloud = np.clip(1 - 0.35 * np.abs(_smooth_noise(rng_solar, T, 0.9)), 0.1, 1)
                    a = cap * curve * cloud
                else:
                    z_ = _smooth_noise(rng_wind, T, 0.95)
                    a = cap / (1 + np.exp(-1.5 * z_ + 0.3))
                avail[uid] = np.round(np.clip(a, 0, cap), 6)
                vre.append(VreUnit(uid, z.id, cap, uid, technology=tech))

    storage = []
    k = 0
    for tech, count in params.storage_mix.items():
        for c in range(count):
            z = zones[k % n]
            power = (0.2 if tech == SDES else 0.15) * zone_peak
            storage.append(StorageUnit.with_defaults(
                f"{z.id}_{tech.lower()}{c + 1}", z.id, round(power, 6), tech,
                reserve_eligible=("raise",)))
            k += 1

    total_load = sum(load.values())
    reserves = {"raise": np.round(DEFAULT_RESERVE_FRACTION * total_load, 6)}
    spec = SystemSpec(zones=zones, lines=lines, thermal_units=tuple(thermal),
                      vre_units=tuple(vre), storage_units=tuple(storage),
                      reserve_products=(reserve,), perturb_pct=perturb_pct,
                      perturb_seed=seed)
    return spec, TimeSeriesFrame(params.start, T, load, avail, reserves)


def with_perturbation(spec: SystemSpec, pct: float, seed: int) -> SystemSpec:
    return replace(spec, perturb_pct=pct, perturb_seed=seed)
