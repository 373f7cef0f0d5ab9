"""Cost-minimising response of the multi-location consumer to DER offers.

Per location the purchase cost is piecewise linear and convex in the local
demand (local DERs in merit order, then the grid without limit), so the
total-demand split is a separable convex allocation that greedy
water-filling solves exactly. ``brute_force_mlec`` enumerates demand splits
on a grid and is kept deliberately independent as a check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .model import TOL, InfeasibleDemand, Scenario


class StepTooCoarse(ValueError):
    pass


@dataclass(frozen=True)
class MlecDecision:
    grid_purchase: tuple[float, ...]  # per location
    der_purchase: tuple[float, ...]  # aligned with Scenario.ders
    demand: tuple[float, ...]  # per location
    total_cost: float


def decision_cost(s: Scenario, offers: Sequence[float], grid, der) -> float:
    cost = sum(e * p for e, p in zip(grid, s.tariff.sell_prices))
    return cost + sum(e * p for e, p in zip(der, offers))


def _segments(s: Scenario, offers: Sequence[float], location: int):
    """Purchase options at one location as (price, der index or None, capacity).

    Grid ranks ahead of DERs at an equal price, so a DER offering exactly the
    grid price never sells; DERs at equal prices go by ascending id.
    """
    sell = s.sell_price(location)
    local = [
        (offers[k], der.der_id, k, der.capacity)
        for k, der in enumerate(s.ders)
        if der.location == location and offers[k] < sell and der.capacity > 0
    ]
    local.sort()
    return [(price, k, cap) for price, _, k, cap in local] + [(sell, None, math.inf)]


def solve_mlec(s: Scenario, offers: Sequence[float]) -> MlecDecision:
    """Exact minimum-cost purchase plan for the given offers.

    Every location starts at its lower demand bound; the remaining demand is
    then handed out segment by segment to the location whose next unit is
    cheapest (lowest location index on ties).
    """
    offers = [float(o) for o in offers]
    if len(offers) != len(s.ders):
        raise ValueError(f"expected {len(s.ders)} offers, got {len(offers)}")

    n_loc = s.n_locations
    bounds = s.demand_bounds()
    segs = [_segments(s, offers, n) for n in range(1, n_loc + 1)]
    pos = [0] * n_loc  # current segment per location
    used = [0.0] * n_loc  # energy taken from the current segment
    demand = [0.0] * n_loc
    grid = [0.0] * n_loc
    der = [0.0] * len(s.ders)

    def take(loc: int, amount: float) -> None:
        while amount > 0:
            price, k, cap = segs[loc][pos[loc]]
            q = min(amount, cap - used[loc])
            if k is None:
                grid[loc] += q
            else:
                der[k] += q
            used[loc] += q
            demand[loc] += q
            amount -= q
            if cap - used[loc] <= TOL:
                pos[loc] += 1
                used[loc] = 0.0

    for loc, (lo, _) in enumerate(bounds):
        take(loc, lo)

    remaining = s.total_demand - sum(demand)
    while remaining > TOL:
        best = None
        for loc in range(n_loc):
            room = bounds[loc][1] - demand[loc]
            if room <= TOL:
                continue
            price = segs[loc][pos[loc]][0]
            if best is None or price < best[0]:
                best = (price, loc, room)
        if best is None:
            raise InfeasibleDemand("total demand exceeds the migration window")
        _, loc, room = best
        price, k, cap = segs[loc][pos[loc]]
        q = min(cap - used[loc], room, remaining)
        take(loc, q)
        remaining -= q

    return MlecDecision(
        tuple(grid), tuple(der), tuple(demand), decision_cost(s, offers, grid, der)
    )


def _dispatch_location(options, load):
    """Fill ``load`` from (price, rank, key, capacity) options, cheapest first."""
    taken = {}
    cost = 0.0
    for price, _, key, cap in sorted(options):
        q = min(cap, load)
        taken[key] = q
        cost += q * price
        load -= q
        if load <= 0:
            break
    return cost, taken


def brute_force_mlec(s: Scenario, offers: Sequence[float], step: float) -> MlecDecision:
    """Cheapest purchase plan over all demand splits on a ``step`` grid.

    The last location absorbs whatever the others leave, so the total-demand
    constraint holds exactly. Each split is dispatched per location by plain
    merit order. Exponential in the number of locations; meant for N <= 4.
    """
    positive = [d for d in s.base_demand if d > 0]
    limit = min(positive + [0.5])
    if not step > 0 or step > limit:
        raise StepTooCoarse(f"step {step} must lie in (0, {limit}]")

    offers = [float(o) for o in offers]
    bounds = s.demand_bounds()
    axes = []
    for lo, hi in bounds[:-1]:
        pts = [lo + k * step for k in range(int(math.floor((hi - lo) / step + TOL)) + 1)]
        if hi - pts[-1] > TOL:
            pts.append(hi)
        axes.append(pts)

    options = []
    for n in range(1, s.n_locations + 1):
        opts = [(s.sell_price(n), 0, ("grid", n - 1), math.inf)]
        opts += [
            (offers[k], 1 + der.der_id, ("der", k), der.capacity)
            for k, der in enumerate(s.ders)
            if der.location == n
        ]
        options.append(opts)

    lo_last, hi_last = bounds[-1]
    best = None
    for head in itertools.product(*axes):
        last = s.total_demand - sum(head)
        if not lo_last - TOL <= last <= hi_last + TOL:
            continue
        split = list(head) + [min(max(last, lo_last), hi_last)]
        total = 0.0
        plan = {}
        for loc, load in enumerate(split):
            cost, taken = _dispatch_location(options[loc], load)
            total += cost
            plan.update(taken)
        if best is None or total < best[0] - TOL:
            best = (total, split, plan)

    if best is None:
        raise InfeasibleDemand("no demand split on the grid satisfies the window")
    _, split, plan = best
    grid = tuple(plan.get(("grid", n), 0.0) for n in range(s.n_locations))
    der = tuple(plan.get(("der", k), 0.0) for k in range(len(s.ders)))
    return MlecDecision(grid, der, tuple(split), decision_cost(s, offers, grid, der))
