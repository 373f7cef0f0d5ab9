import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlec_game.game import (
    Mode,
    NoData,
    agent_rng,
    check_convergence,
    coverage_stats,
    init_agents,
    run_experiment,
    run_game,
    step,
    summarize,
)
from mlec_game.der import DerAgent, Observation
from mlec_game.model import AlgorithmParams, Der, Scenario, default_tariff

from test_mlec import assert_feasible

QUICK = AlgorithmParams(max_iterations=300, n_repetitions=3)


def test_first_step_exploits_initial_line(monopoly):
    params = AlgorithmParams()
    agents = init_agents(monopoly, params)
    agents, rec = step(agents, monopoly, params, [agent_rng(0, 1)], 1)
    assert rec.modes == (Mode.EXPLOIT,)
    assert rec.r2[0] == pytest.approx(1.0)
    assert rec.bids[0] == pytest.approx(32.55, abs=1e-9)
    assert rec.decision.der_purchase == (5.0,)
    assert rec.profits[0] == pytest.approx(237.75)
    assert agents[0].best_price == pytest.approx(32.55, abs=1e-9)
    assert agents[0].best_profit == pytest.approx(237.75)


def test_poor_fit_means_explore(monopoly):
    params = AlgorithmParams()
    bumpy = [Observation(20, 0), Observation(30, 10), Observation(40, 0)]
    agent = DerAgent(1, 10.0, 1, 50.0, 15.0, knowledge=bumpy, best_price=30.0)
    _, rec = step([agent], monopoly, params, [agent_rng(0, 1)], 3)
    assert rec.r2[0] <= params.r2_threshold
    assert rec.modes == (Mode.EXPLORE,)


def test_step_numbering_starts_at_one(monopoly):
    with pytest.raises(ValueError):
        step(init_agents(monopoly, QUICK), monopoly, QUICK, [agent_rng(0, 1)], 0)


def test_no_migration_keeps_base_demand(three_sites):
    s = three_sites(0.0)
    r = run_game(s, QUICK, 4, keep_trace=True)
    for rec in r.trace:
        assert rec.decision.demand == s.base_demand


def test_check_convergence():
    flat = [(40.0, 45.0)] * 31
    assert check_convergence(flat, 0.05, 30)
    assert not check_convergence(flat[:10], 0.05, 30)
    edge = [(40.0,)] + [(40.06,)] + [(40.06,)] * 29
    assert not check_convergence(edge, 0.05, 30)
    assert check_convergence(edge[1:] + [(40.06,)], 0.05, 30)


def test_check_convergence_is_inclusive():
    hist = [(0.0,), (0.05,)] + [(0.05,)] * 2
    assert check_convergence(hist, 0.05, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(40, 40.2), min_size=2, max_size=60), st.integers(2, 10))
def test_incremental_convergence_matches_check(prices, window):
    calm = 0
    for k in range(1, len(prices)):
        calm = calm + 1 if abs(prices[k] - prices[k - 1]) <= 0.05 else 0
        hist = [(p,) for p in prices[: k + 1]]
        assert (calm >= window) == check_convergence(hist, 0.05, window)


def test_run_is_deterministic(three_sites):
    s = three_sites(0.5)
    a = run_game(s, QUICK, 11, keep_trace=True)
    b = run_game(s, QUICK, 11, keep_trace=True)
    assert a == b


def test_different_seeds_differ(three_sites):
    s = three_sites(0.5)
    assert run_game(s, QUICK, 1).final_prices != run_game(s, QUICK, 2).final_prices


def test_trace_invariants(three_sites):
    s = three_sites(0.4)
    r = run_game(s, AlgorithmParams(max_iterations=500), 3, keep_trace=True)
    assert r.iterations_used == len(r.trace) <= 500
    best = np.array([rec.best_profits for rec in r.trace])
    assert (np.diff(best, axis=0) >= 0).all()
    for rec in r.trace:
        assert_feasible(s, rec.bids, rec.decision)
        for bid, der in zip(rec.bids, s.ders):
            assert s.tariff.buy_price <= bid <= s.sell_price(der.location)


def test_listing_order_of_ders_does_not_matter():
    ders = [Der(1, 1, 10.0), Der(2, 2, 10.0), Der(3, 1, 4.0)]
    common = dict(
        n_locations=2, tariff=default_tariff(2), base_demand=(5.0, 5.0), total_demand=10.0, alpha=0.6
    )
    s1 = Scenario(ders=tuple(ders), **common)
    s2 = Scenario(ders=(ders[2], ders[0], ders[1]), **common)
    r1 = run_game(s1, QUICK, 5)
    r2 = run_game(s2, QUICK, 5)
    by_id1 = dict(zip([d.der_id for d in s1.ders], r1.final_prices))
    by_id2 = dict(zip([d.der_id for d in s2.ders], r2.final_prices))
    assert by_id1 == by_id2
    assert r1.final_cost == pytest.approx(r2.final_cost, abs=1e-9)


def test_converged_result_respects_window(monopoly):
    params = AlgorithmParams(conv_tolerance=0.05, conv_window=5, max_iterations=5000)
    r = run_game(monopoly, params, 0, keep_trace=True)
    assert r.converged
    hist = [rec.bids for rec in r.trace]
    assert check_convergence(hist, 0.05, 5)
    assert not check_convergence(hist[:-1], 0.05, 5)
    assert r.final_prices == r.trace[-1].bids


def test_iteration_cap_reports_not_converged(three_sites):
    r = run_game(three_sites(0.5), AlgorithmParams(max_iterations=40), 0)
    assert r.iterations_used == 40
    assert not r.converged


def test_experiment_counts_and_seeds(three_sites):
    sums = run_experiment([three_sites(0.0), three_sites(1.0)], QUICK, 100)
    assert len(sums) == 2
    for sm in sums:
        assert len(sm.results) == 3
        assert [r.seed for r in sm.results] == [100, 101, 102]


def test_single_repetition_summary_equals_run(three_sites):
    params = dataclasses.replace(QUICK, n_repetitions=1)
    (sm,) = run_experiment([three_sites(0.3)], params, 9)
    r = run_game(three_sites(0.3), params, 9)
    assert sm.mean_prices == r.final_prices
    assert sm.mean_cost == r.final_cost
    assert sm.price_quantiles[0] == min(r.final_prices)
    assert sm.price_quantiles[-1] == max(r.final_prices)


def test_parallel_matches_sequential(three_sites):
    scen = [three_sites(a) for a in (0.0, 0.5, 1.0)]
    seq = run_experiment(scen, QUICK, 3, jobs=1)
    par = run_experiment(scen, QUICK, 3, jobs=2)
    assert [sm.results for sm in seq] == [sm.results for sm in par]


def test_coverage_at_grid_prices(three_sites):
    s = three_sites(0.0)
    r = run_game(s, QUICK, 0)
    grid_only = dataclasses.replace(
        r,
        final_prices=(50.0, 45.0, 40.0),
        final_decision=dataclasses.replace(
            r.final_decision, grid_purchase=(5.0, 5.0, 5.0), der_purchase=(0.0, 0.0, 0.0)
        ),
    )
    curve = dict(coverage_stats(s, [grid_only]))
    assert curve == pytest.approx({40.0: 1 / 3, 45.0: 2 / 3, 50.0: 1.0})


def test_coverage_single_price_step(monopoly):
    r = run_game(monopoly, QUICK, 0)
    curve = coverage_stats(monopoly, [r])
    assert curve[-1] == (50.0, pytest.approx(1.0))
    price = r.final_prices[0]
    below = [f for p, f in curve if p < price]
    assert all(f == 0 for f in below)


def test_coverage_curve_monotone_and_complete(three_sites):
    (sm,) = run_experiment([three_sites(0.7)], QUICK, 0)
    fractions = [f for _, f in sm.coverage]
    assert fractions == sorted(fractions)
    assert sm.coverage[-1][0] == 50.0
    assert fractions[-1] == pytest.approx(1.0)


def test_coverage_needs_runs(monopoly):
    with pytest.raises(NoData):
        coverage_stats(monopoly, [])
    with pytest.raises(NoData):
        summarize(monopoly, [])
