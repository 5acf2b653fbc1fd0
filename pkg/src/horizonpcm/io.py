"""System descriptors, hourly series files and results directories.

A system is one JSON descriptor plus one CSV file per series family
(``load``, ``availability``, ``reserves``).  Every CSV starts with an
ISO-8601 ``timestamp`` column followed by one column per entity.

A results directory holds long-format CSV files, one per record family,
and a ``manifest.json`` with settings, seeds and SHA-256 digests.  Floats
are written with ``repr`` so that reading a directory back reproduces the
ledger bit for bit.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import asdict, fields
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .formulation import CostConfig, FormulationOptions
from .horizon import HorizonPolicy, SimulationLedger, WindowRecord, reserve_names
from .pricing import PriceSeries
from .solver import SolveSettings
from .system import (Line, ReserveProduct, StorageUnit, SystemSpec, ThermalUnit,
                     TimeSeriesFrame, VreUnit, Zone, validate_system)

SERIES_FAMILIES = ("load", "availability", "reserves")
DESCRIPTOR = "system.json"


class DataError(ValueError):
    """Malformed input, reported with file, line and rule."""

    def __init__(self, path, line: int | None, rule: str):
        self.path = str(path)
        self.line = line
        self.rule = rule
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {rule}")


# --------------------------------------------------------------------------
# system descriptor
# --------------------------------------------------------------------------

_SECTIONS = (("zones", Zone), ("lines", Line), ("thermal", ThermalUnit),
             ("vre", VreUnit), ("storage", StorageUnit), ("reserves", ReserveProduct))
_SPEC_FIELDS = {"zones": "zones", "lines": "lines", "thermal": "thermal_units",
                "vre": "vre_units", "storage": "storage_units", "reserves": "reserve_products"}


def _finite_or_none(v):
    if isinstance(v, float) and math.isinf(v):
        return None
    if isinstance(v, tuple):
        return list(v)
    return v


def spec_to_dict(spec: SystemSpec) -> dict:
    out = {}
    for section, _ in _SECTIONS:
        out[section] = [{k: _finite_or_none(v) for k, v in asdict(item).items()}
                        for item in getattr(spec, _SPEC_FIELDS[section])]
    out["penalties"] = {"dropped_load": spec.penalty_dropped_load}
    out["perturbation"] = {"pct": spec.perturb_pct, "seed": spec.perturb_seed}
    out["base_mva"] = spec.base_mva
    return out


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def spec_from_dict(data: dict, path="<descriptor>", text: str = "") -> SystemSpec:
    kwargs = {}
    for section, cls in _SECTIONS:
        items = []
        names = {f.name for f in fields(cls)}
        for raw in data.get(section, []):
            ident = raw.get("id", "?")
            line = _line_of(text, f'"{ident}"')
            unknown = set(raw) - names
            if unknown:
                raise DataError(path, line, f"{section}:{ident}: unknown field {sorted(unknown)[0]!r}")
            vals = {}
            for k, v in raw.items():
                if v is None and k in ("ramp_up", "ramp_down"):
                    v = math.inf
                if k == "reserve_eligible":
                    v = tuple(v)
                vals[k] = v
            try:
                items.append(cls(**vals))
            except TypeError as exc:
                raise DataError(path, line, f"{section}:{ident}: {exc}") from None
        kwargs[_SPEC_FIELDS[section]] = tuple(items)
    if not kwargs["zones"]:
        raise DataError(path, None, "at least one zone")
    pen = data.get("penalties", {})
    pert = data.get("perturbation", {})
    return SystemSpec(penalty_dropped_load=float(pen.get("dropped_load", 10_000.0)),
                      perturb_pct=float(pert.get("pct", 0.0)),
                      perturb_seed=int(pert.get("seed", 0)),
                      base_mva=float(data.get("base_mva", 100.0)), **kwargs)


# --------------------------------------------------------------------------
# series files
# --------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_series_file(path: Path, series: TimeSeriesFrame, data: dict) -> None:
    keys = list(data)
    stamps = series.timestamps()
    cols = [np.asarray(data[k], dtype=float) for k in keys]
    _write_csv(path, ["timestamp"] + keys,
               ([stamps[t].isoformat()] + [_fmt(c[t]) for c in cols]
                for t in range(series.hours)))


def read_series_file(path, entities: set[str] | None = None
                     ) -> tuple[datetime, int, dict[str, np.ndarray]]:
    """Parse one series CSV; returns calendar start, hour count and columns."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(path, None, f"cannot open: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(path, 1, "empty file") from None
        if not header or header[0] != "timestamp":
            raise DataError(path, 1, "first column must be 'timestamp'")
        keys = header[1:]
        if len(set(keys)) != len(keys):
            raise DataError(path, 1, "duplicate entity column")
        if entities is not None:
            for k in keys:
                if k not in entities:
                    raise DataError(path, 1, f"unknown entity column {k!r}")
        stamps: list[datetime] = []
        values: list[list[float]] = []
        seen = set()
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(path, line, f"expected {len(header)} fields, found {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0])
            except ValueError:
                raise DataError(path, line, f"malformed timestamp {row[0]!r}") from None
            if ts in seen:
                raise DataError(path, line, f"duplicate hour {row[0]}")
            seen.add(ts)
            if stamps and ts != stamps[-1] + timedelta(hours=1):
                raise DataError(path, line, f"missing hour before {row[0]}")
            try:
                vals = [float(v) for v in row[1:]]
            except ValueError:
                bad = next(v for v in row[1:] if not _is_float(v))
                raise DataError(path, line, f"non-numeric value {bad!r}") from None
            stamps.append(ts)
            values.append(vals)
    if not stamps:
        raise DataError(path, 2, "no data rows")
    arr = np.array(values, dtype=float).reshape(len(stamps), len(keys))
    return stamps[0], len(stamps), {k: arr[:, i].copy() for i, k in enumerate(keys)}


def _is_float(v: str) -> bool:
    try:
        float(v)
    except ValueError:
        return False
    return True


def write_system(spec: SystemSpec, series: TimeSeriesFrame, directory) -> Path:
    """Persist a descriptor and its series files; returns the descriptor path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    data = spec_to_dict(spec)
    data["series"] = {f: f"{f}.csv" for f in SERIES_FAMILIES}
    (d / DESCRIPTOR).write_text(json.dumps(data, indent=2) + "\n")
    _write_series_file(d / "load.csv", series, dict(series.load))
    _write_series_file(d / "availability.csv", series, dict(series.availability))
    _write_series_file(d / "reserves.csv", series, dict(series.reserve_requirements))
    return d / DESCRIPTOR


def load_system(path) -> tuple[SystemSpec, TimeSeriesFrame]:
    """Read a descriptor (or a directory holding ``system.json``) and its series.

    Raises DataError naming the file, line and violated rule.
    """
    path = Path(path)
    if path.is_dir():
        path = path / DESCRIPTOR
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(path, None, f"cannot open: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(path, exc.lineno, f"malformed descriptor: {exc.msg}") from None
    spec = spec_from_dict(data, path, text)
    refs = data.get("series", {})
    known = {
        "load": {z.id for z in spec.zones},
        "availability": {v.availability_series_key for v in spec.vre_units},
        "reserves": {r.requirement_series_key for r in spec.reserve_products},
    }
    parsed = {}
    for fam in SERIES_FAMILIES:
        if fam not in refs:
            parsed[fam] = None
            continue
        parsed[fam] = read_series_file(path.parent / refs[fam])
    if parsed["load"] is None:
        raise DataError(path, _line_of(text, '"series"'), "load series file required")
    start, hours, load = parsed["load"]
    cols = {}
    for fam in ("availability", "reserves"):
        if parsed[fam] is None:
            cols[fam] = {}
            continue
        s, h, c = parsed[fam]
        file = path.parent / refs[fam]
        if s != start:
            raise DataError(file, 2, "series calendars differ")
        if h != hours:
            raise DataError(file, None, "series length mismatch")
        cols[fam] = c
    series = TimeSeriesFrame(start, hours, load, cols["availability"], cols["reserves"])
    report = validate_system(spec, series)
    if not report.ok:
        v = report.violations[0]
        raise DataError(path, _line_of(text, f'"{v.entity.split(":")[-1]}"'), str(v))
    # descriptor keys resolve; now reject series columns nobody refers to
    for fam in SERIES_FAMILIES:
        if parsed[fam] is not None:
            extra = sorted(set(parsed[fam][2]) - known[fam])
            if extra:
                raise DataError(path.parent / refs[fam], 1,
                                f"unknown entity column {extra[0]!r}")
    return spec, series


# --------------------------------------------------------------------------
# digests
# --------------------------------------------------------------------------

def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def system_digest(spec: SystemSpec) -> str:
    return _sha(json.dumps(spec_to_dict(spec), sort_keys=True).encode())


def series_digest(series: TimeSeriesFrame) -> str:
    h = hashlib.sha256(series.start.isoformat().encode())
    for fam in (series.load, series.availability, series.reserve_requirements):
        for k in sorted(fam):
            h.update(k.encode())
            h.update(np.ascontiguousarray(np.asarray(fam[k], dtype="<f8")).tobytes())
    return h.hexdigest()


def ledger_input_digest(ledger: SimulationLedger) -> str:
    h = hashlib.sha256()
    for a in (ledger.load, ledger.availability):
        h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return h.hexdigest()


# --------------------------------------------------------------------------
# results directory
# --------------------------------------------------------------------------

# file -> (entity label, [(column, record family)])
_FAMILIES = {
    "thermal.csv": ("unit", [("p", "thermal_p"), ("on", "thermal_on"),
                             ("startup", "thermal_startup"), ("shutdown", "thermal_shutdown")]),
    "storage.csv": ("unit", [("charge", "storage_charge"), ("discharge", "storage_discharge"),
                             ("soc", "storage_soc"), ("mode", "storage_mode")]),
    "vre.csv": ("unit", [("dispatch", "vre_p")]),
    "flows.csv": ("line", [("flow", "flows")]),
    "zones.csv": ("zone", [("dropped", "dropped"), ("angle", "angles")]),
    "reserves.csv": ("provider", [("mw", "reserves")]),
}
WINDOW_COLUMNS = ("index", "start", "hours", "committed", "status", "objective",
                  "best_bound", "gap", "node_count", "committed_cost")


def _entities(spec: SystemSpec, fname: str) -> list[str]:
    return {
        "thermal.csv": [u.id for u in spec.thermal_units],
        "storage.csv": [s.id for s in spec.storage_units],
        "vre.csv": [v.id for v in spec.vre_units],
        "flows.csv": [ln.id for ln in spec.lines] if len(spec.zones) > 1 else [],
        "zones.csv": spec.zone_ids,
        "reserves.csv": reserve_names(spec),
    }[fname]


def _long_rows(ledger: SimulationLedger, fname: str):
    label, cols = _FAMILIES[fname]
    ents = _entities(ledger.spec, fname)
    mats = [ledger.records[fam] for _, fam in cols]
    stamps = [(ledger.start + timedelta(hours=t)).isoformat() for t in range(ledger.hours)]
    for t in range(ledger.hours):
        for k, e in enumerate(ents):
            yield [t, stamps[t], e] + [_fmt(m[t, k]) for m in mats]


def _write(d: Path, name: str, header, rows) -> None:
    try:
        _write_csv(d / name, list(header), rows)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {d / name}: {exc.strerror}") from None


def write_ledger(ledger: SimulationLedger, directory, prices: PriceSeries | None = None,
                 inputs: dict | None = None, summary: dict | None = None) -> dict:
    """Persist a ledger; returns the manifest that was written."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {d}: {exc.strerror}") from None
    if not os.access(d, os.W_OK):
        raise PermissionError(f"results directory {d} is not writable")
    spec = ledger.spec
    (d / DESCRIPTOR).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")
    for fname, (label, cols) in _FAMILIES.items():
        _write(d, fname, ["hour", "timestamp", label] + [c for c, _ in cols],
               _long_rows(ledger, fname))
    stamps = [(ledger.start + timedelta(hours=t)).isoformat() for t in range(ledger.hours)]
    _write(d, "inputs.csv", ["hour", "timestamp", "kind", "entity", "mw"],
           ([t, stamps[t], kind, e, _fmt(m[t, k])]
            for t in range(ledger.hours)
            for kind, ents, m in (("load", spec.zone_ids, ledger.load),
                                  ("availability", [v.id for v in spec.vre_units],
                                   ledger.availability))
            for k, e in enumerate(ents)))
    _write(d, "windows.csv", WINDOW_COLUMNS,
           ([w.index, w.start, w.hours, w.committed, w.status, _fmt(w.objective),
             _fmt(w.best_bound), _fmt(w.gap), w.node_count, _fmt(w.committed_cost)]
            for w in ledger.windows))
    _write(d, "commitment.csv", ["window", "binaries"],
           ([k, "".join("1" if v > 0.5 else "0" for v in b)]
            for k, b in enumerate(ledger.window_binaries)))
    if prices is not None:
        write_prices(prices, ledger, d)
    if summary is not None:
        (d / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    manifest = {
        "engine": "horizonpcm",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "start": ledger.start.isoformat(),
        "hours": ledger.hours,
        "policy": ledger.policy.as_dict(),
        "settings": ledger.settings.as_dict(),
        "formulation": asdict(ledger.options),
        "costs": ledger.costs.as_dict(),
        "seeds": {"perturbation": spec.perturb_seed, "tie_break": ledger.settings.seed},
        "inputs": dict(inputs or {}, system_sha256=system_digest(spec),
                       ledger_inputs_sha256=ledger_input_digest(ledger)),
        "files": {p.name: _sha(p.read_bytes()) for p in sorted(d.glob("*.csv"))
                  if p.name != "manifest.json"},
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def write_prices(prices: PriceSeries, ledger: SimulationLedger, directory) -> None:
    d = Path(directory)
    stamps = [(ledger.start + timedelta(hours=t)).isoformat() for t in range(prices.hours)]
    _write(d, "prices.csv", ["hour", "timestamp"] + prices.zone_ids,
           ([t, stamps[t]] + [_fmt(v) for v in prices.lmp[t]] for t in range(prices.hours)))


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(path, None, f"cannot open: {exc.strerror}") from None
    if not rows:
        raise DataError(path, 1, "empty file")
    return rows[0], rows[1:]


def read_ledger(directory) -> SimulationLedger:
    """Rebuild a ledger from a results directory."""
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    spec = spec_from_dict(json.loads((d / DESCRIPTOR).read_text()), d / DESCRIPTOR)
    hours = int(manifest["hours"])
    records = {}
    for fname, (label, cols) in _FAMILIES.items():
        ents = _entities(spec, fname)
        header, rows = _read_csv(d / fname)
        mats = {fam: np.zeros((hours, len(ents))) for _, fam in cols}
        pos = {e: k for k, e in enumerate(ents)}
        for line, row in enumerate(rows, start=2):
            try:
                t, k = int(row[0]), pos[row[2]]
            except (KeyError, ValueError, IndexError):
                raise DataError(d / fname, line, "unknown hour or entity") from None
            for c, (_, fam) in enumerate(cols):
                mats[fam][t, k] = float(row[3 + c])
        records.update(mats)
    header, rows = _read_csv(d / "inputs.csv")
    load = np.zeros((hours, len(spec.zones)))
    avail = np.zeros((hours, len(spec.vre_units)))
    zpos = {z: k for k, z in enumerate(spec.zone_ids)}
    vpos = {v.id: k for k, v in enumerate(spec.vre_units)}
    for row in rows:
        t = int(row[0])
        if row[2] == "load":
            load[t, zpos[row[3]]] = float(row[4])
        else:
            avail[t, vpos[row[3]]] = float(row[4])
    _, rows = _read_csv(d / "windows.csv")
    windows = [WindowRecord(int(r[0]), int(r[1]), int(r[2]), int(r[3]), r[4], float(r[5]),
                            float(r[6]), float(r[7]), int(r[8]), float(r[9])) for r in rows]
    _, rows = _read_csv(d / "commitment.csv")
    binaries = [np.array([float(c) for c in r[1]]) for r in rows]
    costs = CostConfig(dict(manifest["costs"]["storage_cost"]), manifest["costs"]["penalty"])
    settings = SolveSettings(**manifest["settings"])
    policy = HorizonPolicy(**manifest["policy"])
    options = FormulationOptions(**manifest["formulation"])
    return SimulationLedger(spec, datetime.fromisoformat(manifest["start"]), hours, records,
                            avail, load, windows, binaries, costs, policy, settings, options)


def read_prices(directory) -> PriceSeries:
    header, rows = _read_csv(Path(directory) / "prices.csv")
    lmp = np.array([[float(v) for v in r[2:]] for r in rows]).reshape(len(rows), len(header) - 2)
    return PriceSeries(header[2:], lmp, [], [])


def write_table(path, header, rows) -> None:
    """Plain CSV export used for plot-ready tables."""
    _write_csv(Path(path), list(header),
               ([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row]
                for row in rows))


def manifest_without_timestamp(directory) -> dict:
    m = json.loads((Path(directory) / "manifest.json").read_text())
    m.pop("created", None)
    return m


def refresh_manifest(directory) -> dict:
    """Recompute file digests after files were added to a results directory."""
    d = Path(directory)
    m = json.loads((d / "manifest.json").read_text())
    m["files"] = {p.name: _sha(p.read_bytes()) for p in sorted(d.glob("*.csv"))}
    (d / "manifest.json").write_text(json.dumps(m, indent=2, sort_keys=True) + "\n")
    return m
