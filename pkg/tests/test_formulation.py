from dataclasses import replace

import numpy as np
import pytest

from conftest import frame, one_zone, toy_two_binary
from horizonpcm.formulation import (AS_PRINTED, BINARY_KINDS, KINDS, PHYSICAL, CostConfig,
                                    FormulationOptions, InitialConditions, build_window,
                                    fix_binaries, objective_breakdown, perturb_storage_costs,
                                    read_mps, soc_coefficients, to_mps, unpack)
from horizonpcm.solver import SolveSettings, solve_lp, solve_milp
from horizonpcm.system import (LDES, SDES, SOLAR, ReserveProduct, StorageUnit, SynthParams,
                               ThermalUnit, VreUnit, synth_system)


def tiny_system():
    spec = one_zone([ThermalUnit("g", "z1", 10.0, 100.0, 20.0, startup_cost=50.0)],
                    [VreUnit("pv", "z1", 50.0, "pv", SOLAR)],
                    [StorageUnit.with_defaults("s", "z1", 10.0, SDES)])
    return spec, frame({"z1": [60.0, 80.0]}, {"pv": [30.0, 0.0]})


def build(spec, series, window=None, init=None, costs=None, **opts):
    window = window or (0, series.hours)
    init = init or InitialConditions.cold_start(spec)
    costs = costs or perturb_storage_costs(spec, 0.0, 0)
    return build_window(spec, series, window, init, costs, FormulationOptions(**opts))


def test_variable_counts_for_two_hour_single_zone_window():
    spec, series = tiny_system()
    p = build(spec, series)
    kinds = p.catalog.kinds()
    assert p.n_binaries == 8
    assert sorted(set(kinds[p.integrality])) == sorted(BINARY_KINDS)
    cont = kinds[~p.integrality]
    assert len(cont) == 12
    assert sorted(set(cont)) == sorted(["p", "p_c", "p_d", "soc", "l_drop", "p_vre"])
    assert "f" not in kinds and "theta" not in kinds


def test_catalog_is_bijective_and_ordered_kind_entity_hour():
    spec, series = synth_system(SynthParams(hours=24), seed=0)
    p = build(spec, series, (0, 6))
    keys = p.catalog.keys
    assert len(set(keys)) == len(keys) == p.n_cols
    order = [KINDS.index(k) for k, _, _ in keys]
    assert order == sorted(order)
    for j, key in enumerate(keys):
        assert p.catalog.index(*key) == j


def test_every_decision_kind_appears_in_a_multi_zone_window_with_reserves():
    spec, series = synth_system(SynthParams(zones=3, hours=24), seed=0)
    p = build(spec, series, (0, 4))
    assert set(p.catalog.kinds()) == set(KINDS)


def test_binaries_have_unit_bounds():
    spec, series = synth_system(SynthParams(hours=24), seed=0)
    p = build(spec, series, (0, 4))
    assert np.all(p.lb[p.integrality] == 0) and np.all(p.ub[p.integrality] == 1)


def test_zero_load_window_costs_nothing():
    spec, _ = tiny_system()
    series = frame({"z1": [0.0] * 4}, {"pv": [0.0] * 4})
    p = build(spec, series)
    res = solve_milp(p)
    assert res.objective == pytest.approx(0.0, abs=1e-9)
    assert np.all(unpack(p, res.x, "x", ["g"]) == 0)


def test_shortfall_is_dropped_at_the_penalty():
    spec = one_zone([ThermalUnit("g", "z1", 0.0, 100.0, 20.0)])
    series = frame({"z1": [50.0, 110.0]})
    p = build(spec, series)
    res = solve_milp(p)
    drop = unpack(p, res.x, "l_drop", ["z1"])[:, 0]
    assert drop[1] == pytest.approx(10.0, abs=1e-6)
    assert drop[0] == pytest.approx(0.0, abs=1e-6)
    assert res.objective == pytest.approx(20.0 * 150.0 + 10 * 10_000.0, rel=1e-9)


def test_perturbed_sdes_cost_within_ten_percent():
    spec = one_zone(storage=[StorageUnit.with_defaults("s", "z1", 10.0, SDES),
                             StorageUnit.with_defaults("l", "z1", 10.0, LDES)])
    for seed in range(20):
        c = perturb_storage_costs(spec, 0.10, seed).storage_cost
        assert 0.0009 <= c["s"] <= 0.0011
        assert 0.0045 <= c["l"] <= 0.0055


def test_perturbation_identity_determinism_and_seed_sensitivity():
    devices = [StorageUnit.with_defaults("s", "z1", 10.0, SDES),
               StorageUnit.with_defaults("l", "z1", 10.0, LDES)]
    spec = one_zone(storage=devices)
    assert perturb_storage_costs(spec, 0.0, 5).storage_cost == {"s": 0.001, "l": 0.005}
    assert perturb_storage_costs(spec, 0.1, 1) == perturb_storage_costs(spec, 0.1, 1)
    assert perturb_storage_costs(spec, 0.1, 1) != perturb_storage_costs(spec, 0.1, 2)
    reordered = one_zone(storage=devices[::-1])
    assert (perturb_storage_costs(reordered, 0.1, 1).storage_cost
            == perturb_storage_costs(spec, 0.1, 1).storage_cost)
    with pytest.raises(ValueError):
        perturb_storage_costs(spec, 1.0, 0)


def test_fix_binaries_at_milp_optimum_preserves_objective():
    spec, series = synth_system(SynthParams(zones=2, hours=24), seed=3)
    p = build(spec, series, (0, 12))
    milp = solve_milp(p)
    lp = solve_lp(fix_binaries(p, milp.x))
    assert lp.objective == pytest.approx(milp.objective, rel=1e-9)


def test_fix_binaries_on_toy_and_without_binaries():
    toy = toy_two_binary()
    fixed = fix_binaries(toy, np.array([3.0, 2.0, 1.0, 0.0]))
    assert list(fixed.lb[2:]) == [1.0, 0.0] and list(fixed.ub[2:]) == [1.0, 0.0]
    assert not fixed.integrality.any()
    with pytest.raises(ValueError):
        fix_binaries(toy, np.array([0, 5, 0.5, 1.0]))
    lp = replace(toy, integrality=np.zeros(4, dtype=bool))
    same = fix_binaries(lp, np.zeros(4))
    np.testing.assert_array_equal(same.lb, lp.lb)
    np.testing.assert_array_equal(same.ub, lp.ub)


def test_invalid_initial_soc_is_rejected_before_build():
    spec, series = tiny_system()
    init = InitialConditions({"g": False}, {"g": 0.0}, {"s": 100.0})
    with pytest.raises(ValueError, match="SOC"):
        build(spec, series, init=init)
    with pytest.raises(ValueError):
        build(spec, series, window=(0, 5))


def test_efficiency_conventions():
    s = StorageUnit.with_defaults("s", "z1", 10.0, SDES)
    assert soc_coefficients(s, PHYSICAL) == (0.85, 1.0)
    assert soc_coefficients(s, AS_PRINTED) == pytest.approx((1 / 0.85, 1.0))


def test_relaxed_transitions_are_continuous():
    spec, series = tiny_system()
    p = build(spec, series, relax_transitions=True)
    kinds = p.catalog.kinds()
    assert not p.integrality[np.isin(kinds, ["x_su", "x_sd"])].any()
    assert p.integrality[kinds == "x"].all()


def test_window_solution_satisfies_physical_invariants():
    spec, series = synth_system(SynthParams(zones=3, hours=48), seed=1)
    costs = perturb_storage_costs(spec)
    p = build_window(spec, series, (0, 24), InitialConditions.cold_start(spec), costs)
    res = solve_milp(p)
    x = res.x
    assert p.is_feasible(x)
    bal = [k for k, n in enumerate(p.row_names) if n.startswith("balance")]
    assert p.row_violation(x)[bal].max() <= 1e-6
    ids = [s.id for s in spec.storage_units]
    pc, pd = unpack(p, x, "p_c", ids), unpack(p, x, "p_d", ids)
    soc = unpack(p, x, "soc", ids)
    assert np.all(np.minimum(pc, pd) <= 1e-6)
    for k, s in enumerate(spec.storage_units):
        prev = np.concatenate([[0.5 * s.soc_max], soc[:-1, k]])
        resid = soc[:, k] - prev - s.eta_charge * pc[:, k] + pd[:, k] / s.eta_discharge
        assert np.abs(resid).max() <= 1e-8
    br = objective_breakdown(spec, p, x, costs)
    assert br["total"] == pytest.approx(res.objective, rel=1e-6)


def test_reserve_columns_only_for_eligible_providers():
    spec = one_zone([ThermalUnit("a", "z1", 0, 50, 10, reserve_eligible=("up",)),
                     ThermalUnit("b", "z1", 0, 50, 20)],
                    reserves=[ReserveProduct("up", "up")])
    series = frame({"z1": [30.0]}, reserves={"up": [5.0]})
    p = build(spec, series)
    ents = {e for k, e, _ in p.catalog.keys if k == "r"}
    assert ents == {"up:a"}
    res = solve_milp(p)
    # reserve on both bound sides: p + r <= Pmax x and p + r >= Pmin x
    r = res.x[p.catalog.index("r", "up:a", 0)]
    assert r >= 5.0 - 1e-6


def test_mps_round_trip():
    spec, series = tiny_system()
    p = build(spec, series)
    q = read_mps(to_mps(p))
    np.testing.assert_allclose(q.c, p.c)
    np.testing.assert_allclose(q.A.toarray(), p.A.toarray())
    np.testing.assert_array_equal(q.sense, p.sense)
    np.testing.assert_allclose(q.rhs, p.rhs)
    np.testing.assert_array_equal(q.integrality, p.integrality)
    assert solve_milp(q).objective == pytest.approx(solve_milp(p).objective, rel=1e-9)


def test_objective_uses_perturbed_storage_cost():
    spec, series = tiny_system()
    costs = CostConfig({"s": 0.5}, 10_000.0)
    p = build(spec, series, costs=costs)
    j = p.catalog.index("p_c", "s", 0)
    k = p.catalog.index("p_d", "s", 1)
    assert p.c[j] == 0.5 and p.c[k] == 0.5
    assert p.c[p.catalog.index("p_vre", "pv", 0)] == 0.0


def test_solve_settings_are_independent_of_formulation():
    # sanity: same window under two tie-breaks keeps the optimum value
    spec, series = synth_system(SynthParams(zones=2, hours=24), seed=4)
    p = build(spec, series, (0, 12))
    a = solve_milp(p, SolveSettings(tie_break="lex_forward"))
    b = solve_milp(p, SolveSettings(tie_break="lex_reverse"))
    assert abs(a.objective - b.objective) <= 2e-4 * abs(a.objective)
