"""Domain types shared by the MLEC solver, the DER agents and the game loop.

Units: prices in ct/kWh, energies in kW over a one-hour study period, so
costs and profits come out in ct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TOL = 1e-9

BUY_PRICE = 15.0
TOP_SELL_PRICE = 50.0
SELL_PRICE_SPREAD = 10.0


class ScenarioError(ValueError):
    """Base class for invalid market instances."""


class InfeasibleDemand(ScenarioError):
    pass


class EmptyBidInterval(ScenarioError):
    pass


class BadIndex(ScenarioError, IndexError):
    pass


@dataclass(frozen=True)
class GridTariff:
    buy_price: float
    sell_prices: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "buy_price", float(self.buy_price))
        object.__setattr__(self, "sell_prices", tuple(float(p) for p in self.sell_prices))


@dataclass(frozen=True)
class Der:
    der_id: int
    location: int  # 1-based
    capacity: float


@dataclass(frozen=True)
class Scenario:
    """A full market instance: locations, DERs, tariffs, demands and the
    load-migration fraction ``alpha``."""

    n_locations: int
    ders: tuple[Der, ...]
    tariff: GridTariff
    base_demand: tuple[float, ...]
    total_demand: float
    alpha: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ders", tuple(self.ders))
        object.__setattr__(self, "base_demand", tuple(float(d) for d in self.base_demand))
        object.__setattr__(self, "total_demand", float(self.total_demand))
        object.__setattr__(self, "alpha", float(self.alpha))

    def sell_price(self, location: int) -> float:
        return self.tariff.sell_prices[location - 1]

    def demand_bounds(self) -> list[tuple[float, float]]:
        return [((1 - self.alpha) * d, (1 + self.alpha) * d) for d in self.base_demand]

    def ders_at(self, location: int) -> list[Der]:
        return [d for d in self.ders if d.location == location]


@dataclass(frozen=True)
class AlgorithmParams:
    epsilon: float = 0.1
    sigma0: float = 5.0
    r2_threshold: float = 0.7
    conv_tolerance: float = 0.05
    conv_window: int = 30
    max_iterations: int = 10_000
    n_repetitions: int = 10

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be > 0")
        if not 0 < self.r2_threshold < 1:
            raise ValueError("r2_threshold must lie in (0, 1)")
        if not self.conv_tolerance > 0:
            raise ValueError("conv_tolerance must be > 0")
        if self.conv_window < 2:
            raise ValueError("conv_window must be >= 2")
        if self.max_iterations < self.conv_window:
            raise ValueError("max_iterations must be >= conv_window")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be >= 1")


def _check_quantity(name: str, value: float) -> None:
    if not (math.isfinite(value) and value >= 0):
        raise ScenarioError(f"{name} must be finite and >= 0, got {value!r}")


def validate_scenario(s: Scenario) -> Scenario:
    """Return ``s`` unchanged if it is a consistent market instance.

    Raises:
        BadIndex: a DER sits at a location outside ``1..n_locations``, or the
            per-location arrays have the wrong length.
        EmptyBidInterval: the grid buys above its selling price somewhere.
        InfeasibleDemand: the total demand cannot be met within the
            migration window of every location.
        ScenarioError: any other invariant (negative quantity, bad alpha).
    """
    if s.n_locations < 1:
        raise ScenarioError("n_locations must be >= 1")
    if len(s.base_demand) != s.n_locations:
        raise BadIndex(f"base_demand has {len(s.base_demand)} entries for {s.n_locations} locations")
    if len(s.tariff.sell_prices) != s.n_locations:
        raise BadIndex(
            f"sell_prices has {len(s.tariff.sell_prices)} entries for {s.n_locations} locations"
        )
    if not (math.isfinite(s.alpha) and 0 <= s.alpha <= 1):
        raise ScenarioError(f"alpha must lie in [0, 1], got {s.alpha!r}")

    _check_quantity("buy_price", s.tariff.buy_price)
    for n, p in enumerate(s.tariff.sell_prices, start=1):
        _check_quantity(f"sell_prices[{n}]", p)
        if s.tariff.buy_price > p + TOL:
            raise EmptyBidInterval(
                f"grid buy price {s.tariff.buy_price} exceeds sell price {p} at location {n}"
            )
    for n, d in enumerate(s.base_demand, start=1):
        _check_quantity(f"base_demand[{n}]", d)
    _check_quantity("total_demand", s.total_demand)

    ids = set()
    for der in s.ders:
        if not 1 <= der.location <= s.n_locations:
            raise BadIndex(f"DER {der.der_id} maps to location {der.location}")
        _check_quantity(f"capacity of DER {der.der_id}", der.capacity)
        if der.der_id in ids:
            raise ScenarioError(f"duplicate DER id {der.der_id}")
        ids.add(der.der_id)

    lo = sum(b for b, _ in s.demand_bounds())
    hi = sum(b for _, b in s.demand_bounds())
    if not lo - TOL <= s.total_demand <= hi + TOL:
        raise InfeasibleDemand(
            f"total demand {s.total_demand} outside migration window [{lo}, {hi}]"
        )
    return s


def default_sell_price(n: int, n_locations: int) -> float:
    """Grid selling price at location ``n``: 50 ct/kWh at the first location
    falling linearly to 40 ct/kWh at the last. A single location gets 50."""
    if not 1 <= n <= n_locations:
        raise BadIndex(f"location {n} not in 1..{n_locations}")
    if n_locations == 1:
        return TOP_SELL_PRICE
    return TOP_SELL_PRICE - SELL_PRICE_SPREAD * (n - 1) / (n_locations - 1)


def default_tariff(n_locations: int, buy_price: float = BUY_PRICE) -> GridTariff:
    return GridTariff(
        buy_price,
        tuple(default_sell_price(n, n_locations) for n in range(1, n_locations + 1)),
    )
