"""Unit-commitment window builder.

One optimization window becomes a :class:`MilpProblem`: a sparse row system
with senses, column bounds, integrality marks and a catalog that maps every
column to ``(kind, entity, hour)``.

Columns are ordered kind-major, then entity in system order, then hour
(the ``kind-entity-hour`` ordering policy).  Rows follow the same policy.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .system import INITIAL_SOC_FRACTION, StorageUnit, SystemSpec, TimeSeriesFrame

ORDERING_POLICY = "kind-entity-hour"

# column kinds in catalog order
KINDS = ("p", "x", "x_su", "x_sd", "r", "p_vre", "p_c", "p_d", "x_c", "soc",
         "f", "theta", "l_drop")
BINARY_KINDS = ("x", "x_su", "x_sd", "x_c")
# continuous kinds that make up "dispatch" for divergence measurements
DISPATCH_KINDS = ("p", "p_vre", "p_c", "p_d", "r", "f", "l_drop")

PHYSICAL = "physical"
AS_PRINTED = "as-printed"


@dataclass(frozen=True)
class VariableCatalog:
    keys: tuple[tuple[str, str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {k: j for j, k in enumerate(self.keys)})

    def __len__(self) -> int:
        return len(self.keys)

    def index(self, kind: str, entity: str, hour: int) -> int:
        return self._index[(kind, entity, hour)]

    def get(self, kind: str, entity: str, hour: int) -> int | None:
        return self._index.get((kind, entity, hour))

    def columns(self, kind: str, entity: str | None = None) -> np.ndarray:
        """Column indices of one kind (optionally one entity), in hour order."""
        return np.array([j for j, (k, e, _) in enumerate(self.keys)
                         if k == kind and (entity is None or e == entity)], dtype=int)

    def kinds(self) -> np.ndarray:
        return np.array([k for k, _, _ in self.keys])

    def names(self) -> list[str]:
        return [f"{k}[{e},{h}]" for k, e, h in self.keys]


@dataclass
class MilpProblem:
    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray          # 'L' (<=), 'G' (>=), 'E' (=)
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray    # bool
    catalog: VariableCatalog | None = None
    row_names: list[str] = field(default_factory=list)
    window_start: int = 0
    window_hours: int = 0
    priority: np.ndarray | None = None  # higher branches first

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.sense = np.asarray(self.sense, dtype="<U1")
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        self.integrality = np.asarray(self.integrality, dtype=bool)
        if self.priority is None:
            self.priority = np.zeros(self.n_cols, dtype=int)
        if not self.row_names:
            self.row_names = [f"R{i}" for i in range(self.n_rows)]
        m, n = self.A.shape
        if not (len(self.c) == len(self.lb) == len(self.ub) == len(self.integrality) == n):
            raise ValueError("column arrays disagree with constraint matrix width")
        if not (len(self.sense) == len(self.rhs) == m):
            raise ValueError("row arrays disagree with constraint matrix height")
        if self.catalog is not None and len(self.catalog) != n:
            raise ValueError("catalog size disagrees with column count")

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def n_binaries(self) -> int:
        return int(self.integrality.sum())

    def copy(self) -> "MilpProblem":
        return MilpProblem(self.c.copy(), self.A.copy(), self.sense.copy(), self.rhs.copy(),
                           self.lb.copy(), self.ub.copy(), self.integrality.copy(),
                           self.catalog, list(self.row_names), self.window_start,
                           self.window_hours, self.priority.copy())

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x)

    def row_violation(self, x: np.ndarray) -> np.ndarray:
        """Per-row constraint violation (0 when satisfied)."""
        act = self.A @ x
        viol = np.zeros(self.n_rows)
        le, ge, eq = self.sense == "L", self.sense == "G", self.sense == "E"
        viol[le] = np.maximum(act[le] - self.rhs[le], 0)
        viol[ge] = np.maximum(self.rhs[ge] - act[ge], 0)
        viol[eq] = np.abs(act[eq] - self.rhs[eq])
        return viol

    def is_feasible(self, x: np.ndarray, tol: float = 1e-6) -> bool:
        if np.any(x < self.lb - tol) or np.any(x > self.ub + tol):
            return False
        if self.row_violation(x).max(initial=0.0) > tol:
            return False
        xi = x[self.integrality]
        return bool(np.all(np.abs(xi - np.round(xi)) <= tol))


@dataclass(frozen=True)
class InitialConditions:
    """State at hour -1 of a window."""

    thermal_on: Mapping[str, bool]
    thermal_p: Mapping[str, float]
    soc: Mapping[str, float]

    def validate(self, spec: SystemSpec, tol: float = 1e-6) -> None:
        for u in spec.thermal_units:
            p = self.thermal_p[u.id]
            if not -tol <= p <= u.p_max + tol:
                raise ValueError(f"initial generation of {u.id} outside [0, p_max]: {p}")
            if p > tol and not self.thermal_on[u.id]:
                raise ValueError(f"initial generation of {u.id} is positive while off")
        for s in spec.storage_units:
            v = self.soc[s.id]
            if not s.soc_min - tol <= v <= s.soc_max + tol:
                raise ValueError(f"initial SOC of {s.id} outside [soc_min, soc_max]: {v}")

    @classmethod
    def cold_start(cls, spec: SystemSpec) -> "InitialConditions":
        """All units off, storage at half of its energy capacity."""
        return cls({u.id: False for u in spec.thermal_units},
                   {u.id: 0.0 for u in spec.thermal_units},
                   {s.id: INITIAL_SOC_FRACTION * s.soc_max for s in spec.storage_units})


@dataclass(frozen=True)
class CostConfig:
    storage_cost: Mapping[str, float]
    penalty: float

    def as_dict(self) -> dict:
        return {"storage_cost": dict(self.storage_cost), "penalty": self.penalty}


@dataclass(frozen=True)
class FormulationOptions:
    efficiency: str = PHYSICAL
    relax_transitions: bool = False  # x_su / x_sd continuous in [0, 1]


def _device_uniform(seed: int, device_id: str) -> float:
    key = int.from_bytes(hashlib.sha256(device_id.encode()).digest()[:8], "little")
    return float(np.random.default_rng([seed, key]).uniform(-1.0, 1.0))


def perturb_storage_costs(spec: SystemSpec, pct: float | None = None,
                          seed: int | None = None) -> CostConfig:
    """Per-device storage op cost drawn uniformly within +-pct of nominal.

    The draw for a device depends only on ``(seed, device id)``.
    """
    pct = spec.perturb_pct if pct is None else pct
    seed = spec.perturb_seed if seed is None else seed
    if not 0 <= pct < 1:
        raise ValueError("pct must lie in [0, 1)")
    costs = {}
    for s in spec.storage_units:
        u = _device_uniform(seed, s.id) * pct if pct > 0 else 0.0
        costs[s.id] = s.op_cost_nominal * (1.0 + u)
    return CostConfig(costs, spec.penalty_dropped_load)


def soc_coefficients(s: StorageUnit, efficiency: str) -> tuple[float, float]:
    """(gain per MWh charged, loss per MWh discharged) for the SOC recursion."""
    if efficiency == PHYSICAL:
        return s.eta_charge, 1.0 / s.eta_discharge
    if efficiency == AS_PRINTED:
        return 1.0 / s.eta_charge, s.eta_discharge
    raise ValueError(f"unknown efficiency convention {efficiency!r}")


class _Rows:
    def __init__(self):
        self.ri, self.ci, self.vals = [], [], []
        self.sense, self.rhs, self.names = [], [], []

    def add(self, name: str, terms: Iterable[tuple[int, float]], sense: str, rhs: float):
        r = len(self.rhs)
        for j, v in terms:
            if v != 0.0:
                self.ri.append(r)
                self.ci.append(j)
                self.vals.append(v)
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.names.append(name)


def build_window(spec: SystemSpec, series: TimeSeriesFrame, window: tuple[int, int],
                 init: InitialConditions, costs: CostConfig,
                 options: FormulationOptions = FormulationOptions()) -> MilpProblem:
    """Encode hours ``[lo, hi)`` of the series as a unit-commitment MILP."""
    lo, hi = window
    if not 0 <= lo < hi <= series.hours:
        raise ValueError(f"window [{lo}, {hi}) outside series of {series.hours} hours")
    init.validate(spec)
    T = hi - lo
    hours = range(T)
    multi_zone = len(spec.zones) > 1
    zidx = spec.zone_index()
    ref_zone = spec.zones[0].id

    # ---- columns ---------------------------------------------------------
    keys: list[tuple[str, str, int]] = []
    lb: list[float] = []
    ub: list[float] = []
    cost: list[float] = []
    integ: list[bool] = []
    prio: list[int] = []

    def col(kind, ent, t, lo_, hi_, c=0.0, binary=False, pr=0):
        keys.append((kind, ent, t))
        lb.append(lo_)
        ub.append(hi_)
        cost.append(c)
        integ.append(binary)
        prio.append(pr)

    trans_binary = not options.relax_transitions
    for u in spec.thermal_units:
        for t in hours:
            col("p", u.id, t, 0.0, u.p_max, u.fuel_cost)
    for u in spec.thermal_units:
        for t in hours:
            col("x", u.id, t, 0.0, 1.0, 0.0, True, 2)
    for u in spec.thermal_units:
        for t in hours:
            col("x_su", u.id, t, 0.0, 1.0, u.startup_cost, trans_binary, 1)
    for u in spec.thermal_units:
        for t in hours:
            col("x_sd", u.id, t, 0.0, 1.0, u.shutdown_cost, trans_binary, 1)
    providers = ([(u.id, u.p_max, u.reserve_eligible) for u in spec.thermal_units]
                 + [(v.id, v.capacity, v.reserve_eligible) for v in spec.vre_units]
                 + [(s.id, s.discharge_max + s.charge_max, s.reserve_eligible)
                    for s in spec.storage_units])
    for prod in spec.reserve_products:
        for pid, cap, elig in providers:
            if prod.id in elig:
                for t in hours:
                    col("r", f"{prod.id}:{pid}", t, 0.0, cap)
    for v in spec.vre_units:
        for t in hours:
            col("p_vre", v.id, t, 0.0, v.capacity)
    for s in spec.storage_units:
        for t in hours:
            col("p_c", s.id, t, 0.0, s.charge_max, costs.storage_cost[s.id])
    for s in spec.storage_units:
        for t in hours:
            col("p_d", s.id, t, 0.0, s.discharge_max, costs.storage_cost[s.id])
    for s in spec.storage_units:
        for t in hours:
            col("x_c", s.id, t, 0.0, 1.0, 0.0, True, 2)
    for s in spec.storage_units:
        for t in hours:
            col("soc", s.id, t, s.soc_min, s.soc_max)
    if multi_zone:
        for ln in spec.lines:
            for t in hours:
                col("f", ln.id, t, ln.flow_min, ln.flow_max)
        for z in spec.zones:
            for t in hours:
                if z.id == ref_zone:
                    col("theta", z.id, t, 0.0, 0.0)
                else:
                    col("theta", z.id, t, z.angle_min, z.angle_max)
    for z in spec.zones:
        for t in hours:
            col("l_drop", z.id, t, 0.0, math.inf, costs.penalty)

    cat = VariableCatalog(tuple(keys))
    J = cat.index

    def reserve_cols(pid, t):
        return [J("r", f"{prod.id}:{pid}", t) for prod in spec.reserve_products
                if cat.get("r", f"{prod.id}:{pid}", t) is not None]

    # ---- rows ------------------------------------------------------------
    rows = _Rows()
    load = {z.id: np.asarray(series.load[z.id], dtype=float)[lo:hi] for z in spec.zones}

    # nodal balance: supply + net inflow + unserved = demand + charging
    for z in spec.zones:
        for t in hours:
            terms = [(J("p", u.id, t), 1.0) for u in spec.thermal_units if u.zone == z.id]
            terms += [(J("p_vre", v.id, t), 1.0) for v in spec.vre_units if v.zone == z.id]
            for s in spec.storage_units:
                if s.zone == z.id:
                    terms += [(J("p_d", s.id, t), 1.0), (J("p_c", s.id, t), -1.0)]
            if multi_zone:
                for ln in spec.lines:
                    if ln.to_zone == z.id:
                        terms.append((J("f", ln.id, t), 1.0))
                    elif ln.from_zone == z.id:
                        terms.append((J("f", ln.id, t), -1.0))
            terms.append((J("l_drop", z.id, t), 1.0))
            rows.add(f"balance[{z.id},{t}]", terms, "E", load[z.id][t])

    for u in spec.thermal_units:
        for t in hours:
            base = [(J("p", u.id, t), 1.0)] + [(j, 1.0) for j in reserve_cols(u.id, t)]
            rows.add(f"gen_min[{u.id},{t}]", base + [(J("x", u.id, t), -u.p_min)], "G", 0.0)
            rows.add(f"gen_max[{u.id},{t}]", base + [(J("x", u.id, t), -u.p_max)], "L", 0.0)
        p0 = float(init.thermal_p[u.id])
        for t in hours:
            if math.isfinite(u.ramp_up):
                terms = [(J("p", u.id, t), 1.0)]
                if t > 0:
                    terms.append((J("p", u.id, t - 1), -1.0))
                rows.add(f"ramp_up[{u.id},{t}]", terms, "L", u.ramp_up + (p0 if t == 0 else 0.0))
            if math.isfinite(u.ramp_down):
                terms = [(J("p", u.id, t), 1.0)]
                if t > 0:
                    terms.append((J("p", u.id, t - 1), -1.0))
                rows.add(f"ramp_down[{u.id},{t}]", terms, "G",
                         -u.ramp_down + (p0 if t == 0 else 0.0))
        x0 = 1.0 if init.thermal_on[u.id] else 0.0
        for t in hours:
            terms = [(J("x", u.id, t), -1.0), (J("x_su", u.id, t), 1.0),
                     (J("x_sd", u.id, t), -1.0)]
            if t > 0:
                terms.append((J("x", u.id, t - 1), 1.0))
            rows.add(f"commit[{u.id},{t}]", terms, "E", -x0 if t == 0 else 0.0)

    for v in spec.vre_units:
        avb = np.asarray(series.availability[v.availability_series_key], dtype=float)[lo:hi]
        for t in hours:
            terms = [(J("p_vre", v.id, t), 1.0)] + [(j, 1.0) for j in reserve_cols(v.id, t)]
            rows.add(f"vre_cap[{v.id},{t}]", terms, "L", avb[t])

    for prod in spec.reserve_products:
        req = np.asarray(series.reserve_requirements[prod.requirement_series_key],
                         dtype=float)[lo:hi]
        for t in hours:
            terms = [(J("r", f"{prod.id}:{pid}", t), 1.0) for pid, _, elig in providers
                     if prod.id in elig]
            rows.add(f"reserve[{prod.id},{t}]", terms, "G", req[t])

    for s in spec.storage_units:
        gain, loss = soc_coefficients(s, options.efficiency)
        for t in hours:
            rows.add(f"charge_max[{s.id},{t}]",
                     [(J("p_c", s.id, t), 1.0), (J("x_c", s.id, t), -s.charge_max)], "L", 0.0)
            rows.add(f"discharge_max[{s.id},{t}]",
                     [(J("p_d", s.id, t), 1.0), (J("x_c", s.id, t), s.discharge_max)], "L",
                     s.discharge_max)
        soc0 = float(init.soc[s.id])
        for t in hours:
            terms = [(J("soc", s.id, t), 1.0), (J("p_c", s.id, t), -gain),
                     (J("p_d", s.id, t), loss)]
            if t > 0:
                terms.append((J("soc", s.id, t - 1), -1.0))
            rows.add(f"soc_balance[{s.id},{t}]", terms, "E", soc0 if t == 0 else 0.0)
        if s.reserve_eligible:
            for t in hours:
                terms = [(J("p_d", s.id, t), 1.0), (J("p_c", s.id, t), -1.0)]
                terms += [(j, 1.0) for j in reserve_cols(s.id, t)]
                rows.add(f"storage_reserve[{s.id},{t}]", terms, "L", s.discharge_max)

    if multi_zone:
        for ln in spec.lines:
            b = ln.susceptance * spec.base_mva
            for t in hours:
                rows.add(f"dc_flow[{ln.id},{t}]",
                         [(J("f", ln.id, t), 1.0), (J("theta", ln.from_zone, t), -b),
                          (J("theta", ln.to_zone, t), b)], "E", 0.0)

    A = sp.csr_matrix((rows.vals, (rows.ri, rows.ci)), shape=(len(rows.rhs), len(keys)))
    return MilpProblem(np.array(cost), A, np.array(rows.sense, dtype="<U1"),
                       np.array(rows.rhs), np.array(lb), np.array(ub),
                       np.array(integ, dtype=bool), cat, rows.names, lo, T,
                       np.array(prio, dtype=int))


def fix_binaries(problem: MilpProblem, incumbent: np.ndarray, tol: float = 1e-6) -> MilpProblem:
    """LP restriction with every integer column fixed at its incumbent value."""
    out = problem.copy()
    idx = np.flatnonzero(problem.integrality)
    vals = np.asarray(incumbent, dtype=float)[idx]
    rounded = np.round(vals)
    bad = np.abs(vals - rounded) > tol
    if np.any(bad):
        j = idx[np.argmax(bad)]
        raise ValueError(f"incumbent value {incumbent[j]!r} of column {j} is not integral")
    out.lb[idx] = rounded
    out.ub[idx] = rounded
    out.integrality[:] = False
    return out


def objective_breakdown(spec: SystemSpec, problem: MilpProblem, x: np.ndarray,
                        costs: CostConfig) -> dict[str, float]:
    """Objective recomputed term by term from a solution vector."""
    cat = problem.catalog
    out = {"fuel": 0.0, "startup": 0.0, "shutdown": 0.0, "storage_op": 0.0, "penalty": 0.0}
    for u in spec.thermal_units:
        out["fuel"] += u.fuel_cost * x[cat.columns("p", u.id)].sum()
        out["startup"] += u.startup_cost * x[cat.columns("x_su", u.id)].sum()
        out["shutdown"] += u.shutdown_cost * x[cat.columns("x_sd", u.id)].sum()
    for s in spec.storage_units:
        out["storage_op"] += costs.storage_cost[s.id] * (
            x[cat.columns("p_c", s.id)].sum() + x[cat.columns("p_d", s.id)].sum())
    out["penalty"] = costs.penalty * x[cat.columns("l_drop")].sum()
    out["total"] = sum(out.values())
    return out


def unpack(problem: MilpProblem, x: np.ndarray, kind: str,
           entities: Iterable[str]) -> np.ndarray:
    """Hour x entity matrix of one variable kind (missing entities give zeros)."""
    ents = list(entities)
    out = np.zeros((problem.window_hours, len(ents)))
    for k, e in enumerate(ents):
        cols = problem.catalog.columns(kind, e)
        if cols.size:
            out[:, k] = x[cols]
    return out


# --------------------------------------------------------------------------
# MPS export
# --------------------------------------------------------------------------

def _fmt(v: float) -> str:
    s = repr(float(v))
    if len(s) > 12:
        s = f"{v:.6g}"
    return s


def to_mps(problem: MilpProblem, name: str = "WINDOW") -> str:
    """Fixed-form MPS text; columns appear in catalog order as ``C<j>``."""
    sense_map = {"L": "L", "G": "G", "E": "E"}
    lines = [f"NAME          {name}", "ROWS", " N  COST"]
    rnames = [f"R{i}" for i in range(problem.n_rows)]
    cnames = [f"C{j}" for j in range(problem.n_cols)]
    for i in range(problem.n_rows):
        lines.append(f" {sense_map[problem.sense[i]]}  {rnames[i]}")
    lines.append("COLUMNS")
    csc = problem.A.tocsc()
    in_int = False

    def entry(cn, rn, v):
        return f"    {cn:<8}  {rn:<8}  {_fmt(v):>12}"

    for j in range(problem.n_cols):
        if problem.integrality[j] and not in_int:
            lines.append("    MARKER                 'MARKER'                 'INTORG'")
            in_int = True
        elif not problem.integrality[j] and in_int:
            lines.append("    MARKER                 'MARKER'                 'INTEND'")
            in_int = False
        if problem.c[j] != 0:
            lines.append(entry(cnames[j], "COST", problem.c[j]))
        start, end = csc.indptr[j], csc.indptr[j + 1]
        for i, v in zip(csc.indices[start:end], csc.data[start:end]):
            lines.append(entry(cnames[j], rnames[i], v))
        if problem.c[j] == 0 and start == end:
            lines.append(entry(cnames[j], "COST", 0.0))
    if in_int:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    for i in range(problem.n_rows):
        if problem.rhs[i] != 0:
            lines.append(entry("RHS", rnames[i], problem.rhs[i]))
    lines.append("BOUNDS")
    for j in range(problem.n_cols):
        lo, up = problem.lb[j], problem.ub[j]
        cn = cnames[j]
        if lo == up:
            lines.append(f" FX BND       {cn:<8}  {_fmt(lo):>12}")
            continue
        if math.isinf(lo) and math.isinf(up):
            lines.append(f" FR BND       {cn:<8}")
            continue
        if math.isinf(lo):
            lines.append(f" MI BND       {cn:<8}")
        elif lo != 0:
            lines.append(f" LO BND       {cn:<8}  {_fmt(lo):>12}")
        if not math.isinf(up):
            lines.append(f" UP BND       {cn:<8}  {_fmt(up):>12}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def read_mps(text: str) -> MilpProblem:
    """Parse the subset of fixed-form MPS written by :func:`to_mps`."""
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    cols: dict[str, dict[str, float]] = {}
    col_order: list[str] = []
    integer: set[str] = set()
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}
    obj_row = None
    in_int = False
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw.startswith(" "):
            section = raw.split()[0]
            continue
        tok = raw.split()
        if section == "ROWS":
            if tok[0] == "N":
                obj_row = tok[1]
            else:
                row_sense[tok[1]] = tok[0]
                row_order.append(tok[1])
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            cn = tok[0]
            if cn not in cols:
                cols[cn] = {}
                col_order.append(cn)
                if in_int:
                    integer.add(cn)
            for rn, v in zip(tok[1::2], tok[2::2]):
                cols[cn][rn] = float(v)
        elif section == "RHS":
            for rn, v in zip(tok[1::2], tok[2::2]):
                rhs[rn] = float(v)
        elif section == "BOUNDS":
            kind, cn = tok[0], tok[2]
            b = bounds.setdefault(cn, [0.0, math.inf])
            v = float(tok[3]) if len(tok) > 3 else 0.0
            if kind == "FX":
                b[0] = b[1] = v
            elif kind == "FR":
                b[0], b[1] = -math.inf, math.inf
            elif kind == "MI":
                b[0] = -math.inf
            elif kind == "LO":
                b[0] = v
            elif kind == "UP":
                b[1] = v
    ridx = {r: i for i, r in enumerate(row_order)}
    ri, ci, vals = [], [], []
    c = np.zeros(len(col_order))
    for j, cn in enumerate(col_order):
        for rn, v in cols[cn].items():
            if rn == obj_row:
                c[j] = v
            else:
                ri.append(ridx[rn])
                ci.append(j)
                vals.append(v)
    A = sp.csr_matrix((vals, (ri, ci)), shape=(len(row_order), len(col_order)))
    lb = np.array([bounds.get(cn, [0.0, math.inf])[0] for cn in col_order])
    ub = np.array([bounds.get(cn, [0.0, math.inf])[1] for cn in col_order])
    integ = np.array([cn in integer for cn in col_order])
    # integer columns without explicit bounds default to binary in this subset
    return MilpProblem(c, A, np.array([row_sense[r] for r in row_order]),
                       np.array([rhs.get(r, 0.0) for r in row_order]), lb, ub, integ,
                       row_names=list(row_order))


def with_costs(problem: MilpProblem, c: np.ndarray) -> MilpProblem:
    out = problem.copy()
    out.c = np.asarray(c, dtype=float)
    return out


__all__ = [
    "VariableCatalog", "MilpProblem", "InitialConditions", "CostConfig",
    "FormulationOptions", "perturb_storage_costs", "build_window", "fix_binaries",
    "objective_breakdown", "to_mps", "read_mps", "unpack",
]
