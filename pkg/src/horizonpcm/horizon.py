"""Rolling-horizon simulation: sequential window solves with state hand-off."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formulation import (CostConfig, FormulationOptions, InitialConditions, MilpProblem,
                          build_window, perturb_storage_costs, unpack)
from .solver import SolveResult, SolveSettings, solve_milp
from .system import SystemSpec, TimeSeriesFrame, validate_system


class SimulationError(RuntimeError):
    def __init__(self, window: int, status: str, detail: str = ""):
        self.window = window
        self.status = status
        super().__init__(f"window {window} failed with status {status}"
                         + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class HorizonPolicy:
    window_hours: int
    advance_hours: int
    name: str = "custom"

    def __post_init__(self):
        if self.window_hours < 1 or self.advance_hours < 1:
            raise ValueError("window and advance must be at least one hour")
        if self.advance_hours > self.window_hours:
            raise ValueError("advance_hours must not exceed window_hours")

    @classmethod
    def traditional(cls) -> "HorizonPolicy":
        return cls(48, 24, "traditional")

    @classmethod
    def extended(cls, lookahead_days: int = 7) -> "HorizonPolicy":
        return cls(24 * (lookahead_days + 1), 24, "extended")

    def windows(self, span: int) -> list[tuple[int, int]]:
        n = math.ceil(span / self.advance_hours)
        return [(k * self.advance_hours, min(k * self.advance_hours + self.window_hours, span))
                for k in range(n)]

    def as_dict(self) -> dict:
        return {"name": self.name, "window_hours": self.window_hours,
                "advance_hours": self.advance_hours}


@dataclass
class WindowSolution:
    spec: SystemSpec
    problem: MilpProblem
    x: np.ndarray
    result: SolveResult


# hourly record families; each maps to an (hours x entities) array
THERMAL_FIELDS = ("p", "on", "startup", "shutdown")
STORAGE_FIELDS = ("charge", "discharge", "soc", "mode")


@dataclass
class WindowRecord:
    index: int
    start: int
    hours: int
    committed: int
    status: str
    objective: float
    best_bound: float
    gap: float
    node_count: int
    committed_cost: float
    wall_time: float = field(default=0.0, compare=False)


def _hourly(spec: SystemSpec, ws: WindowSolution, n: int) -> dict[str, np.ndarray]:
    p, x = ws.problem, ws.x
    th = [u.id for u in spec.thermal_units]
    st = [s.id for s in spec.storage_units]
    vre = [v.id for v in spec.vre_units]
    zones = spec.zone_ids
    lines = [ln.id for ln in spec.lines] if len(spec.zones) > 1 else []
    res_names = reserve_names(spec)
    rec = {
        "thermal_p": unpack(p, x, "p", th),
        "thermal_on": unpack(p, x, "x", th),
        "thermal_startup": unpack(p, x, "x_su", th),
        "thermal_shutdown": unpack(p, x, "x_sd", th),
        "vre_p": unpack(p, x, "p_vre", vre),
        "storage_charge": unpack(p, x, "p_c", st),
        "storage_discharge": unpack(p, x, "p_d", st),
        "storage_soc": unpack(p, x, "soc", st),
        "storage_mode": unpack(p, x, "x_c", st),
        "reserves": unpack(p, x, "r", res_names),
        "flows": unpack(p, x, "f", lines),
        "angles": unpack(p, x, "theta", zones) if lines else np.zeros((p.window_hours, len(zones))),
        "dropped": unpack(p, x, "l_drop", zones),
    }
    return {k: v[:n] for k, v in rec.items()}


def reserve_names(spec: SystemSpec) -> list[str]:
    out = []
    units = ([(u.id, u.reserve_eligible) for u in spec.thermal_units]
             + [(v.id, v.reserve_eligible) for v in spec.vre_units]
             + [(s.id, s.reserve_eligible) for s in spec.storage_units])
    for prod in spec.reserve_products:
        out += [f"{prod.id}:{uid}" for uid, elig in units if prod.id in elig]
    return out


def splice_committed(ws: WindowSolution, advance_hours: int) -> dict[str, np.ndarray]:
    """Hourly records for the first ``advance_hours`` of a window solution."""
    n = min(advance_hours, ws.problem.window_hours)
    return _hourly(ws.spec, ws, n)


def propagate_state(ws: WindowSolution, advance_hours: int) -> InitialConditions:
    """State at the last committed hour, to seed the next window."""
    if advance_hours > ws.problem.window_hours:
        raise ValueError("window solution shorter than the advance")
    t = advance_hours - 1
    cat, x = ws.problem.catalog, ws.x
    on, gen, soc = {}, {}, {}
    for u in ws.spec.thermal_units:
        on[u.id] = bool(round(x[cat.index("x", u.id, t)]))
        gen[u.id] = float(x[cat.index("p", u.id, t)]) if on[u.id] else 0.0
    for s in ws.spec.storage_units:
        soc[s.id] = float(x[cat.index("soc", s.id, t)])
    init = InitialConditions(on, gen, soc)
    init.validate(ws.spec)
    return init


def committed_cost(spec: SystemSpec, rec: dict[str, np.ndarray], costs: CostConfig) -> np.ndarray:
    """Eq.-1 style cost per committed hour."""
    fuel = np.array([u.fuel_cost for u in spec.thermal_units])
    su = np.array([u.startup_cost for u in spec.thermal_units])
    sd = np.array([u.shutdown_cost for u in spec.thermal_units])
    op = np.array([costs.storage_cost[s.id] for s in spec.storage_units])
    h = (rec["thermal_p"] @ fuel + rec["thermal_startup"] @ su + rec["thermal_shutdown"] @ sd
         + (rec["storage_charge"] + rec["storage_discharge"]) @ op
         + costs.penalty * rec["dropped"].sum(axis=1))
    return h


@dataclass
class SimulationLedger:
    spec: SystemSpec
    start: object                      # datetime of hour 0
    hours: int
    records: dict[str, np.ndarray]     # family -> (hours x entities)
    availability: np.ndarray           # hours x vre units
    load: np.ndarray                   # hours x zones
    windows: list[WindowRecord]
    window_binaries: list[np.ndarray]
    costs: CostConfig
    policy: HorizonPolicy
    settings: SolveSettings
    options: FormulationOptions = FormulationOptions()

    @property
    def thermal_ids(self) -> list[str]:
        return [u.id for u in self.spec.thermal_units]

    @property
    def storage_ids(self) -> list[str]:
        return [s.id for s in self.spec.storage_units]

    def hourly_cost(self) -> np.ndarray:
        return committed_cost(self.spec, self.records, self.costs)

    def equals(self, other: "SimulationLedger") -> bool:
        if (self.hours != other.hours or self.start != other.start
                or self.spec != other.spec or self.costs.as_dict() != other.costs.as_dict()
                or self.policy != other.policy or self.settings != other.settings
                or self.options != other.options or self.windows != other.windows):
            return False
        if set(self.records) != set(other.records):
            return False
        if any(not np.array_equal(self.records[k], other.records[k]) for k in self.records):
            return False
        if not (np.array_equal(self.availability, other.availability)
                and np.array_equal(self.load, other.load)):
            return False
        return len(self.window_binaries) == len(other.window_binaries) and all(
            np.array_equal(a, b) for a, b in zip(self.window_binaries, other.window_binaries))


def _clean(a: np.ndarray) -> np.ndarray:
    a = np.where(np.abs(a) < 1e-12, 0.0, a)
    return a + 0.0


def run_simulation(spec: SystemSpec, series: TimeSeriesFrame, policy: HorizonPolicy,
                   settings: SolveSettings = SolveSettings(),
                   options: FormulationOptions = FormulationOptions(),
                   costs: CostConfig | None = None) -> SimulationLedger:
    """Solve consecutive windows, committing the first ``advance_hours`` of each."""
    report = validate_system(spec, series)
    if not report.ok:
        raise ValueError("invalid system: " + "; ".join(map(str, report.violations)))
    span = series.hours
    if span < 1:
        raise ValueError("empty series")
    costs = perturb_storage_costs(spec) if costs is None else costs
    init = InitialConditions.cold_start(spec)
    parts: list[dict[str, np.ndarray]] = []
    windows: list[WindowRecord] = []
    binaries: list[np.ndarray] = []
    plan = policy.windows(span)
    for k, (lo, hi) in enumerate(plan):
        problem = build_window(spec, series, (lo, hi), init, costs, options)
        res = solve_milp(problem, settings)
        if not res.has_solution:
            raise SimulationError(k, res.status,
                                  f"hours [{lo}, {hi}), {problem.n_rows} rows, "
                                  f"{problem.n_cols} columns")
        ws = WindowSolution(spec, problem, res.x, res)
        n = min(policy.advance_hours, hi - lo)
        rec = splice_committed(ws, n)
        parts.append(rec)
        binaries.append(np.round(res.x[problem.integrality]) + 0.0)
        windows.append(WindowRecord(k, lo, hi - lo, n, res.status, res.objective,
                                    res.best_bound, res.gap, res.node_count,
                                    float(committed_cost(spec, rec, costs).sum()),
                                    res.wall_time))
        if k + 1 < len(plan):
            init = propagate_state(ws, n)
    records = {key: _clean(np.vstack([p[key] for p in parts])) for key in parts[0]}
    avail = np.column_stack([np.asarray(series.availability[v.availability_series_key],
                                        dtype=float) for v in spec.vre_units]) \
        if spec.vre_units else np.zeros((span, 0))
    return SimulationLedger(spec, series.start, span, records, avail,
                            series.load_matrix(spec.zone_ids), windows, binaries, costs,
                            policy, settings, options)


def window_initial_conditions(ledger: SimulationLedger, start: int) -> InitialConditions:
    """State at hour ``start - 1`` as recorded in the ledger (cold start at 0)."""
    spec = ledger.spec
    if start == 0:
        return InitialConditions.cold_start(spec)
    t = start - 1
    r = ledger.records
    on = {u.id: bool(round(r["thermal_on"][t, k])) for k, u in enumerate(spec.thermal_units)}
    gen = {u.id: float(r["thermal_p"][t, k]) if on[u.id] else 0.0
           for k, u in enumerate(spec.thermal_units)}
    soc = {s.id: float(r["storage_soc"][t, k]) for k, s in enumerate(spec.storage_units)}
    return InitialConditions(on, gen, soc)
