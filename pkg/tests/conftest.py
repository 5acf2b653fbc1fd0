from __future__ import annotations

import math
from datetime import datetime

import numpy as np
import pytest

from horizonpcm.formulation import FormulationOptions, MilpProblem, perturb_storage_costs
from horizonpcm.horizon import HorizonPolicy, SimulationLedger
from horizonpcm.solver import SolveSettings
from horizonpcm.system import (LDES, SDES, SOLAR, Line, ReserveProduct, StorageUnit, SystemSpec,
                               ThermalUnit, TimeSeriesFrame, VreUnit, Zone)

START = datetime(2050, 1, 1)


def frame(load, avail=None, reserves=None, start=START):
    load = {k: np.asarray(v, dtype=float) for k, v in load.items()}
    hours = len(next(iter(load.values())))
    avail = {k: np.asarray(v, dtype=float) for k, v in (avail or {}).items()}
    reserves = {k: np.asarray(v, dtype=float) for k, v in (reserves or {}).items()}
    return TimeSeriesFrame(start, hours, load, avail, reserves)


def one_zone(thermal=(), vre=(), storage=(), reserves=(), **kw):
    return SystemSpec((Zone("z1"),), (), tuple(thermal), tuple(vre), tuple(storage),
                      tuple(reserves), **kw)


def two_zone_congested(fmax=50.0):
    """Cheap zone a (fuel 10), expensive zone b (fuel 50), one tie line a -> b."""
    spec = SystemSpec(
        (Zone("a"), Zone("b")),
        (Line("ab", "a", "b", susceptance=10.0, flow_min=-fmax, flow_max=fmax),),
        (ThermalUnit("ga", "a", 0.0, 500.0, 10.0), ThermalUnit("gb", "b", 0.0, 500.0, 50.0)))
    return spec


def toy_two_binary() -> MilpProblem:
    """Units A (fuel 10, cap 5) and B (fuel 4, cap 5), startup 1 each, load 5.

    Columns: pA, pB, xA, xB.
    """
    A = np.array([[1, 1, 0, 0],
                  [1, 0, -5, 0],
                  [0, 1, 0, -5]], dtype=float)
    return MilpProblem(c=[10, 4, 1, 1], A=A, sense=["E", "L", "L"], rhs=[5, 0, 0],
                       lb=[0, 0, 0, 0], ub=[math.inf, math.inf, 1, 1],
                       integrality=[False, False, True, True])


def random_small_system(rng: np.random.Generator, variant: int = 0):
    """Random one-zone window data with exactly 12 binaries.

    Variant 0 has two thermal units over 2 h; variant 1 has one thermal unit
    and one storage device over 3 h.  Both include a VRE unit.
    """
    n_thermal, hours = (2, 2) if variant == 0 else (1, 3)
    th = []
    for k in range(n_thermal):
        pmax = float(rng.uniform(40, 120))
        th.append(ThermalUnit(f"g{k}", "z1", round(float(rng.uniform(0, 0.5)) * pmax, 3),
                              round(pmax, 3), round(float(rng.uniform(10, 90)), 3),
                              startup_cost=round(float(rng.uniform(0, 500)), 3),
                              shutdown_cost=round(float(rng.uniform(0, 50)), 3),
                              ramp_up=round(pmax * float(rng.uniform(0.5, 1.0)), 3),
                              ramp_down=round(pmax * float(rng.uniform(0.5, 1.0)), 3)))
    st = StorageUnit.with_defaults("s1", "z1", round(float(rng.uniform(5, 30)), 3),
                                   SDES if rng.random() < 0.5 else LDES)
    v = VreUnit("pv", "z1", 80.0, "pv", SOLAR)
    spec = one_zone(th, [v], [st] if variant else [])
    load = np.round(rng.uniform(20, 180, hours), 3)
    avail = np.round(rng.uniform(0, 80, hours), 3)
    return spec, frame({"z1": load}, {"pv": avail})


def make_ledger(spec, hours, **records):
    """Ledger with hand-written hourly records (all others zero)."""
    nt, ns, nv = len(spec.thermal_units), len(spec.storage_units), len(spec.vre_units)
    shapes = {"thermal_p": nt, "thermal_on": nt, "thermal_startup": nt, "thermal_shutdown": nt,
              "vre_p": nv, "storage_charge": ns, "storage_discharge": ns, "storage_soc": ns,
              "storage_mode": ns, "reserves": 0, "flows": len(spec.lines),
              "angles": len(spec.zones), "dropped": len(spec.zones)}
    rec = {k: np.zeros((hours, n)) for k, n in shapes.items()}
    avail = records.pop("availability", np.zeros((hours, nv)))
    for k, v in records.items():
        rec[k] = np.asarray(v, dtype=float).reshape(hours, -1)
    avail = np.asarray(avail, dtype=float).reshape(hours, -1)
    return SimulationLedger(spec, START, hours, rec, avail, np.zeros((hours, len(spec.zones))),
                            [], [], perturb_storage_costs(spec, 0.0, 0),
                            HorizonPolicy(24, 24), SolveSettings(), FormulationOptions())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


__all__ = ["frame", "one_zone", "two_zone_congested", "toy_two_binary", "random_small_system",
           "make_ledger", "record_verdict",
           "ReserveProduct", "START"]


ACCEPTANCE_LINES: list[str] = []


def record_verdict(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
