"""Hypothesis property tests for the cross-module invariants."""
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import frame, make_ledger, one_zone, random_small_system
from horizonpcm.formulation import (FormulationOptions, InitialConditions, build_window,
                                    perturb_storage_costs, unpack)
from horizonpcm.horizon import HorizonPolicy
from horizonpcm.io import read_series_file, write_system
from horizonpcm.metrics import curtailment, cumulative_tpc_delta, soc_delta
from horizonpcm.pricing import price_stats
from horizonpcm.solver import SolveSettings, enumerate_binaries_oracle, solve_lp, solve_milp
from horizonpcm.system import (LDES, SDES, SOLAR, StorageUnit, ThermalUnit, VreUnit, net_load)

SLOW = settings(max_examples=12, deadline=None,
                suppress_health_check=[HealthCheck.function_scoped_fixture])
FAST = settings(max_examples=60, deadline=None)

seeds = st.integers(0, 2**31 - 1)
mw = st.floats(0.0, 500.0, allow_nan=False)


def window_of(spec, series, costs=None):
    return build_window(spec, series, (0, series.hours), InitialConditions.cold_start(spec),
                        costs or perturb_storage_costs(spec, 0.0, 0), FormulationOptions())


@SLOW
@given(seed=seeds, variant=st.integers(0, 1))
def test_milp_agrees_with_exhaustive_oracle(seed, variant):
    spec, series = random_small_system(np.random.default_rng(seed), variant)
    p = window_of(spec, series)
    ref = enumerate_binaries_oracle(p, max_binaries=12)
    res = solve_milp(p)
    assert abs(res.objective - ref.objective) / max(1.0, abs(ref.objective)) <= 1e-4
    assert res.objective >= res.best_bound


@SLOW
@given(seed=seeds, variant=st.integers(0, 1))
def test_accepted_solutions_balance_and_keep_soc_exact(seed, variant):
    spec, series = random_small_system(np.random.default_rng(seed), variant)
    p = window_of(spec, series)
    x = solve_milp(p).x
    rows = [k for k, n in enumerate(p.row_names) if n.startswith(("balance", "soc_balance"))]
    resid = np.abs(p.A @ x - p.rhs)[rows]
    assert resid.max(initial=0.0) <= 1e-6
    for k, s in enumerate(spec.storage_units):
        soc = unpack(p, x, "soc", [s.id])[:, 0]
        pc = unpack(p, x, "p_c", [s.id])[:, 0]
        pd = unpack(p, x, "p_d", [s.id])[:, 0]
        prev = np.r_[0.5 * s.soc_max, soc[:-1]]
        assert np.abs(soc - prev - s.eta_charge * pc + pd / s.eta_discharge).max() <= 1e-8
        assert np.all((soc >= s.soc_min - 1e-6) & (soc <= s.soc_max + 1e-6))


@SLOW
@given(seed=seeds)
def test_policies_agree_on_optimal_value(seed):
    spec, series = random_small_system(np.random.default_rng(seed), 1)
    p = window_of(spec, series)
    a = solve_milp(p, SolveSettings(tie_break="lex_forward"))
    b = solve_milp(p, SolveSettings(tie_break="lex_reverse"))
    assert abs(a.objective - b.objective) / max(1.0, abs(a.objective)) <= 2e-4
    la = solve_lp(p, SolveSettings(tie_break="lex_forward"))
    lb = solve_lp(p, SolveSettings(tie_break="lex_reverse"))
    assert abs(la.objective - lb.objective) <= 1e-9 * max(1.0, abs(la.objective))


@FAST
@given(pct=st.floats(0.0, 0.5), seed=seeds)
def test_perturbation_stays_within_band(pct, seed):
    spec = one_zone(storage=[StorageUnit.with_defaults("s", "z1", 10.0, SDES),
                             StorageUnit.with_defaults("l", "z1", 10.0, LDES)])
    c = perturb_storage_costs(spec, pct, seed).storage_cost
    for s in spec.storage_units:
        assert abs(c[s.id] - s.op_cost_nominal) <= pct * s.op_cost_nominal * (1 + 1e-12)


@FAST
@given(window=st.integers(1, 200), advance=st.integers(1, 200), span=st.integers(1, 800))
def test_policy_windows_cover_span_once(window, advance, span):
    if advance > window:
        with pytest.raises(ValueError):
            HorizonPolicy(window, advance)
        return
    wins = HorizonPolicy(window, advance).windows(span)
    committed = np.concatenate([np.arange(lo, min(lo + advance, hi)) for lo, hi in wins])
    np.testing.assert_array_equal(committed, np.arange(span))
    assert len(wins) == math.ceil(span / advance)
    assert all(hi - lo <= window for lo, hi in wins)


@FAST
@given(data=st.lists(st.tuples(mw, mw), min_size=24, max_size=24))
def test_net_load_is_load_minus_availability(data):
    load, avail = np.array(data).T
    spec = one_zone(vre=[VreUnit("pv", "z1", 500.0, "pv", SOLAR)])
    np.testing.assert_allclose(net_load(spec, frame({"z1": load}, {"pv": avail})), load - avail)


def two_ledgers(draw_a, draw_b, days):
    spec = one_zone([ThermalUnit("g", "z1", 0, 1e3, 7.5, startup_cost=3.0)],
                    storage=[StorageUnit.with_defaults("s", "z1", 10.0, LDES),
                             StorageUnit.with_defaults("t", "z1", 5.0, LDES)])
    mk = lambda d: make_ledger(spec, 24 * days, thermal_p=d[:, 0], thermal_startup=d[:, 1] > 0.5,
                               storage_soc=d[:, 2:4] * [100.0, 50.0])
    return mk(draw_a), mk(draw_b)


arrays = st.integers(1, 5).flatmap(lambda days: st.tuples(
    st.just(days),
    *[st.lists(st.floats(0, 1), min_size=24 * days * 4, max_size=24 * days * 4)
      .map(lambda v, d=days: np.array(v).reshape(24 * d, 4) * [500, 1, 1, 1])
      for _ in range(2)]))


@FAST
@given(arrays)
def test_delta_telescopes_and_soc_delta_is_antisymmetric(sample):
    days, da, db = sample
    a, b = two_ledgers(da, db, days)
    cum = cumulative_tpc_delta(a, b)
    assert cum.size == days
    assert cum[-1] == pytest.approx(a.hourly_cost().sum() - b.hourly_cost().sum(), abs=1e-6)
    np.testing.assert_array_equal(soc_delta(a, b, LDES), -soc_delta(b, a, LDES))
    np.testing.assert_array_equal(cumulative_tpc_delta(a, a), 0.0)


@FAST
@given(st.lists(st.tuples(st.floats(0.1, 100), st.floats(0, 1)), min_size=1, max_size=48))
def test_curtailment_is_a_percentage(rows):
    avail, frac = np.array(rows).T
    spec = one_zone(vre=[VreUnit("pv", "z1", 100.0, "pv", SOLAR)])
    led = make_ledger(spec, len(rows), vre_p=avail * frac, availability=avail)
    c = curtailment(led)
    assert 0.0 <= c <= 100.0
    expected = 100 * (avail.sum() - (avail * frac).sum()) / avail.sum()
    assert c == pytest.approx(min(max(expected, 0.0), 100.0), abs=1e-9)


@FAST
@given(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=200), st.floats(-100, 100))
def test_price_stats_shift_and_bounds(values, shift):
    v = np.array(values).reshape(-1, 1)
    s = price_stats(v)
    assert v.min() - 1e-9 <= s["mean"] <= v.max() + 1e-9
    assert s["stdev"] >= 0
    t = price_stats(v + shift)
    assert t["mean"] == pytest.approx(s["mean"] + shift, abs=1e-6)
    assert t["stdev"] == pytest.approx(s["stdev"], abs=1e-6)


@settings(max_examples=25, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=True),
                min_size=24, max_size=24))
def test_series_files_round_trip_exactly(tmp_path_factory, values):
    d = tmp_path_factory.mktemp("s")
    spec = one_zone([ThermalUnit("g", "z1", 0, 10, 1.0)])
    write_system(spec, frame({"z1": values}), d)
    _, hours, cols = read_series_file(d / "load.csv")
    assert hours == 24
    assert cols["z1"].tobytes() == np.array(values, dtype=float).tobytes()
