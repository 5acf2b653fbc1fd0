import numpy as np
import pytest

from conftest import frame, one_zone, two_zone_congested
from horizonpcm.horizon import HorizonPolicy, run_simulation
from horizonpcm.pricing import PriceSeries, compute_lmps, price_stats
from horizonpcm.system import SynthParams, ThermalUnit, synth_system


def priced(spec, series, policy=HorizonPolicy(24, 24)):
    ledger = run_simulation(spec, series, policy)
    return ledger, compute_lmps(spec, series, ledger)


def test_dropped_load_hours_price_at_penalty():
    spec = one_zone([ThermalUnit("g", "z1", 0.0, 100.0, 20.0)])
    load = [80.0, 150.0, 90.0, 130.0] * 6
    ledger, prices = priced(spec, frame({"z1": load}))
    dropped = ledger.records["dropped"][:, 0] > 0
    assert dropped.sum() == 12
    np.testing.assert_allclose(prices.lmp[dropped, 0], 10_000.0, atol=1e-3)
    np.testing.assert_allclose(prices.lmp[~dropped, 0], 20.0, atol=1e-6)


def test_single_zone_marginal_unit_sets_price():
    spec = one_zone([ThermalUnit("cheap", "z1", 0.0, 50.0, 10.0),
                     ThermalUnit("marg", "z1", 0.0, 1000.0, 25.0)])
    _, prices = priced(spec, frame({"z1": np.linspace(60, 300, 24)}))
    np.testing.assert_allclose(prices.zone("z1"), 25.0, atol=1e-6)


def test_congested_two_zone_duals():
    spec = two_zone_congested(50.0)
    ledger, prices = priced(spec, frame({"a": [100.0] * 24, "b": [200.0] * 24}))
    np.testing.assert_allclose(ledger.records["flows"][:, 0], 50.0, atol=1e-6)
    np.testing.assert_allclose(prices.zone("a"), 10.0, atol=1e-6)
    np.testing.assert_allclose(prices.zone("b"), 50.0, atol=1e-6)


def test_uncongested_two_zone_prices_collapse():
    spec = two_zone_congested(1000.0)
    _, prices = priced(spec, frame({"a": [100.0] * 24, "b": [200.0] * 24}))
    np.testing.assert_allclose(prices.lmp, 10.0, atol=1e-6)


def test_fixed_lp_matches_window_objective_and_prices_are_capped():
    spec, series = synth_system(SynthParams(zones=3, hours=72), seed=2)
    ledger, prices = priced(spec, series, HorizonPolicy.traditional())
    assert prices.hours == 72 and prices.lmp.shape == (72, 3)
    for w, obj in zip(ledger.windows, prices.window_objective):
        assert obj == pytest.approx(w.objective, rel=1e-6)
    assert prices.lmp.max() <= spec.penalty_dropped_load + 1e-6
    assert set(prices.window_status) == {"optimal_within_gap"}


def test_pricing_is_deterministic():
    spec, series = synth_system(SynthParams(zones=2, hours=48), seed=4)
    ledger = run_simulation(spec, series, HorizonPolicy(24, 24))
    a = compute_lmps(spec, series, ledger)
    b = compute_lmps(spec, series, ledger)
    assert a.lmp.tobytes() == b.lmp.tobytes()


def test_price_stats_examples():
    assert price_stats(np.full((5, 2), 100.0)) == {"mean": 100.0, "stdev": 0.0}
    assert price_stats(np.array([[90.0], [110.0]])) == {"mean": 100.0, "stdev": 10.0}
    w = price_stats(np.array([[90.0], [110.0]]), load=np.array([[1.0], [3.0]]))
    assert w["mean"] == pytest.approx(105.0)
    assert w["stdev"] == pytest.approx(np.sqrt(0.25 * 225 + 0.75 * 25))
    with pytest.raises(ValueError):
        price_stats(np.zeros((0, 2)))


def test_price_stats_matches_recomputation():
    rng = np.random.default_rng(0)
    v = rng.uniform(0, 200, (168, 3))
    s = price_stats(PriceSeries(["a", "b", "c"], v, [], []))
    flat = [float(x) for x in v.ravel()]
    mean = sum(flat) / len(flat)
    var = sum((x - mean) ** 2 for x in flat) / len(flat)
    assert s["mean"] == pytest.approx(mean, rel=1e-12)
    assert s["stdev"] == pytest.approx(var ** 0.5, rel=1e-12)
