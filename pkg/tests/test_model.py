import dataclasses

import pytest

from mlec_game.model import (
    AlgorithmParams,
    BadIndex,
    EmptyBidInterval,
    InfeasibleDemand,
    ScenarioError,
    default_sell_price,
    default_tariff,
    validate_scenario,
)

from conftest import make_scenario


def valid():
    return make_scenario(
        3, [(1, 1, 10.0), (2, 2, 10.0), (3, 3, 10.0)], [50, 45, 40], [5, 5, 5], 15, 0.5
    )


def test_valid_scenario_passes_unchanged():
    s = valid()
    assert validate_scenario(s) is s


def test_window_too_small_for_total_demand():
    s = make_scenario(2, [], [50, 40], [5, 5], 25, 0.5)
    with pytest.raises(InfeasibleDemand):
        validate_scenario(s)


def test_buy_above_sell_is_empty_interval():
    s = make_scenario(1, [], [10], [5], 5, 0.0, buy=15)
    with pytest.raises(EmptyBidInterval):
        validate_scenario(s)


def test_der_at_missing_location():
    s = make_scenario(2, [(1, 3, 10.0)], [50, 40], [5, 5], 10, 0.0)
    with pytest.raises(BadIndex):
        validate_scenario(s)


@pytest.mark.parametrize(
    "change",
    [
        {"alpha": -0.1},
        {"alpha": 1.5},
        {"total_demand": -1.0},
        {"base_demand": (5.0, -5.0, 5.0)},
        {"base_demand": (5.0, 5.0)},
        {"n_locations": 0},
        {"total_demand": float("nan")},
    ],
)
def test_each_violation_rejected(change):
    s = dataclasses.replace(valid(), **change)
    with pytest.raises(ScenarioError):
        validate_scenario(s)


def test_negative_capacity_rejected():
    s = make_scenario(1, [(1, 1, -1.0)], [50], [5], 5, 0.0)
    with pytest.raises(ScenarioError):
        validate_scenario(s)


def test_duplicate_der_ids_rejected():
    s = make_scenario(1, [(1, 1, 1.0), (1, 1, 2.0)], [50], [5], 5, 0.0)
    with pytest.raises(ScenarioError):
        validate_scenario(s)


def test_window_edges_are_feasible():
    lo = make_scenario(2, [], [50, 40], [5, 5], 5, 0.5)
    hi = make_scenario(2, [], [50, 40], [5, 5], 15, 0.5)
    validate_scenario(lo)
    validate_scenario(hi)


@pytest.mark.parametrize(
    "n, n_locations, expected",
    [(1, 3, 50.0), (3, 3, 40.0), (1, 1, 50.0), (10, 10, 40.0), (2, 3, 45.0)],
)
def test_default_sell_price(n, n_locations, expected):
    assert default_sell_price(n, n_locations) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n, n_locations", [(0, 3), (4, 3), (2, 1)])
def test_default_sell_price_bad_index(n, n_locations):
    with pytest.raises(BadIndex):
        default_sell_price(n, n_locations)


@pytest.mark.parametrize("n_locations", range(2, 25))
def test_default_tariff_monotone_between_50_and_40(n_locations):
    prices = default_tariff(n_locations).sell_prices
    assert prices[0] == 50.0
    assert prices[-1] == pytest.approx(40.0, abs=1e-12)
    assert all(a >= b for a, b in zip(prices, prices[1:]))


def test_algorithm_defaults():
    p = AlgorithmParams()
    assert (p.epsilon, p.sigma0, p.r2_threshold) == (0.1, 5.0, 0.7)
    assert (p.conv_tolerance, p.conv_window, p.max_iterations, p.n_repetitions) == (0.05, 30, 10_000, 10)


@pytest.mark.parametrize(
    "kw",
    [
        {"epsilon": 0},
        {"sigma0": -1},
        {"r2_threshold": 1.0},
        {"r2_threshold": 0.0},
        {"conv_tolerance": 0},
        {"conv_window": 1},
        {"max_iterations": 10, "conv_window": 30},
        {"n_repetitions": 0},
    ],
)
def test_algorithm_params_invariants(kw):
    with pytest.raises(ValueError):
        AlgorithmParams(**kw)
