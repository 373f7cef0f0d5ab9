"""Learning and bidding logic of a single DER owner.

Each owner keeps every (offer, sold energy) pair it has seen, fits a
straight line ``sold = a - b * price`` through them and either maximises
its profit on that line or samples a price around its best offer so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import TOL


class DegenerateData(ValueError):
    pass


class NonConcave(ValueError):
    pass


class OverSold(ValueError):
    pass


@dataclass(frozen=True)
class Observation:
    price: float
    sold: float


@dataclass(frozen=True)
class RegressionFit:
    a: float
    b: float  # sold falls with price when b > 0
    r2: float

    def predict(self, price: float) -> float:
        return self.a - self.b * price


class PriceDemandStats:
    """Running least-squares moments of sold energy against offer price.

    Updated one observation at a time with Welford-style centred sums so a
    long, nearly constant price history does not lose precision.
    """

    __slots__ = ("n", "mean_x", "mean_y", "cxx", "cxy", "cyy", "min_x", "max_x")

    def __init__(self, obs=()):
        self.n = 0
        self.mean_x = self.mean_y = 0.0
        self.cxx = self.cxy = self.cyy = 0.0
        self.min_x = np.inf
        self.max_x = -np.inf
        for o in obs:
            self.add(o.price, o.sold)

    def add(self, x: float, y: float) -> None:
        self.n += 1
        dx = x - self.mean_x
        dy = y - self.mean_y
        self.mean_x += dx / self.n
        self.mean_y += dy / self.n
        self.cxx += dx * (x - self.mean_x)
        self.cxy += dx * (y - self.mean_y)
        self.cyy += dy * (y - self.mean_y)
        self.min_x = min(self.min_x, x)
        self.max_x = max(self.max_x, x)

    def fit(self) -> RegressionFit:
        if self.n < 2:
            raise DegenerateData("need at least two observations")
        if self.max_x == self.min_x or self.cxx <= 0:
            raise DegenerateData("all observed prices are equal")
        slope = self.cxy / self.cxx
        intercept = self.mean_y - slope * self.mean_x
        if self.cyy <= self.n * TOL * TOL:
            r2 = 1.0
        else:
            r2 = 1.0 - max(self.cyy - self.cxy * slope, 0.0) / self.cyy
        return RegressionFit(a=intercept, b=-slope, r2=r2)


@dataclass
class DerAgent:
    """State of one DER owner. ``knowledge`` only ever grows."""

    der_id: int
    capacity: float
    location: int
    sell_cap: float
    buy_floor: float
    knowledge: list[Observation] = field(default_factory=list, repr=False)
    best_price: float = 0.0
    best_profit: float = 0.0
    stats: PriceDemandStats = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.stats = PriceDemandStats(self.knowledge)

    def fit(self) -> RegressionFit:
        return self.stats.fit()


def init_knowledge(sell_cap: float, epsilon: float, capacity: float) -> list[Observation]:
    """Prior belief: just under the grid price everything sells, just above
    nothing does."""
    return [Observation(sell_cap - epsilon, capacity), Observation(sell_cap + epsilon, 0.0)]


def new_agent(
    der_id: int, capacity: float, location: int, sell_cap: float, buy_floor: float, epsilon: float
) -> DerAgent:
    return DerAgent(
        der_id=der_id,
        capacity=capacity,
        location=location,
        sell_cap=sell_cap,
        buy_floor=buy_floor,
        knowledge=init_knowledge(sell_cap, epsilon, capacity),
        best_price=sell_cap - epsilon,
        best_profit=0.0,
    )


def fit_price_demand(obs) -> RegressionFit:
    """Ordinary least squares of sold energy on offer price.

    The returned slope follows the ``a - b * price`` convention, i.e. ``b`` is
    the negated OLS slope. A constant response (zero total variance) counts
    as perfectly explained, r2 = 1.

    Raises:
        DegenerateData: fewer than two observations or a single distinct price.
    """
    return PriceDemandStats(obs).fit()


def expected_profit(fit: RegressionFit, price: float, capacity: float, buy_floor: float) -> float:
    """Profit on the fitted (unclamped) demand line."""
    sold = fit.predict(price)
    return sold * price + (capacity - sold) * buy_floor


def optimal_bid(fit: RegressionFit, capacity: float, buy_floor: float, sell_cap: float) -> float:
    """Profit-maximising offer in ``[buy_floor, sell_cap]`` on the fitted line.

    Expected profit is a concave parabola when ``b > 0`` with its vertex at
    ``a / (2b) + buy_floor / 2``; capacity only shifts it by a constant.
    """
    if not fit.b > 0:
        raise NonConcave(f"fitted slope b={fit.b} gives no interior maximum")
    vertex = fit.a / (2 * fit.b) + buy_floor / 2
    return min(max(vertex, buy_floor), sell_cap)


def explore_bid(
    rng: np.random.Generator,
    center: float,
    sigma0: float,
    iteration: int,
    buy_floor: float,
    sell_cap: float,
) -> float:
    """Gaussian draw around ``center`` with variance ``sigma0**2 / iteration``,
    clipped into the admissible price band."""
    if iteration < 1:
        raise ValueError("iteration counter starts at 1")
    draw = rng.normal(center, sigma0 / math.sqrt(iteration))
    return float(min(max(draw, buy_floor), sell_cap))


def profit(price: float, sold: float, capacity: float, buy_floor: float) -> float:
    if sold > capacity + TOL:
        raise OverSold(f"sold {sold} exceeds capacity {capacity}")
    return sold * price + (capacity - sold) * buy_floor


def update_agent(agent: DerAgent, price: float, sold: float) -> DerAgent:
    """Record the market response and keep the best offer seen so far.

    Only a strict profit improvement replaces the stored best offer. The
    agent is updated in place (its history can run to many thousands of
    entries) and returned for convenience.
    """
    realized = profit(price, sold, agent.capacity, agent.buy_floor)
    agent.knowledge.append(Observation(price, sold))
    agent.stats.add(price, sold)
    if realized > agent.best_profit:
        agent.best_price = price
        agent.best_profit = realized
    return agent
