"""The iterated price negotiation between DER owners and the MLEC.

Every iteration all owners bid simultaneously, the MLEC buys at minimum
cost, and each owner learns from its own (bid, sold) outcome. A run stops
once no bid has moved by more than ``conv_tolerance`` over ``conv_window``
consecutive iterations.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import der as _der
from .der import DerAgent, new_agent
from .mlec import MlecDecision, solve_mlec
from .model import AlgorithmParams, Scenario, validate_scenario


class Mode(str, enum.Enum):
    EXPLOIT = "exploit"
    EXPLORE = "explore"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    bids: tuple[float, ...]
    modes: tuple[Mode, ...]
    r2: tuple[float, ...]
    decision: MlecDecision
    profits: tuple[float, ...]
    best_profits: tuple[float, ...]


@dataclass
class GameResult:
    converged: bool
    final_prices: tuple[float, ...]
    final_decision: MlecDecision
    final_cost: float
    iterations_used: int
    seed: int
    trace: list[IterationRecord] = field(default_factory=list, repr=False)

    @property
    def final_sold(self) -> tuple[float, ...]:
        return self.final_decision.der_purchase

    def final_profits(self, s: Scenario) -> tuple[float, ...]:
        return tuple(
            _der.profit(p, e, d.capacity, s.tariff.buy_price)
            for p, e, d in zip(self.final_prices, self.final_sold, s.ders)
        )


def agent_rng(seed: int, der_id: int) -> np.random.Generator:
    """Independent stream per (run seed, DER id), so results do not depend on
    the order agents are visited in or on how runs are distributed."""
    return np.random.default_rng(np.random.SeedSequence([seed, der_id]))


def init_agents(s: Scenario, params: AlgorithmParams) -> list[DerAgent]:
    return [
        new_agent(
            d.der_id, d.capacity, d.location, s.sell_price(d.location),
            s.tariff.buy_price, params.epsilon,
        )
        for d in s.ders
    ]


def choose_bid(agent: DerAgent, params: AlgorithmParams, rng, i: int):
    """Exploit the fitted demand line when it explains the data and slopes
    downwards, otherwise explore around the best offer so far."""
    fit = agent.fit()
    if fit.r2 > params.r2_threshold and fit.b > 0:
        bid = _der.optimal_bid(fit, agent.capacity, agent.buy_floor, agent.sell_cap)
        return bid, Mode.EXPLOIT, fit.r2
    bid = _der.explore_bid(
        rng, agent.best_price, params.sigma0, i, agent.buy_floor, agent.sell_cap
    )
    return bid, Mode.EXPLORE, fit.r2


def step(agents, s: Scenario, params: AlgorithmParams, rngs, i: int):
    """One negotiation round. ``rngs`` holds one generator per agent."""
    if i < 1:
        raise ValueError("iterations are numbered from 1")
    choices = [choose_bid(a, params, r, i) for a, r in zip(agents, rngs)]
    bids = tuple(c[0] for c in choices)
    decision = solve_mlec(s, bids)
    profits = []
    for agent, bid, sold in zip(agents, bids, decision.der_purchase):
        sold = min(sold, agent.capacity)
        profits.append(_der.profit(bid, sold, agent.capacity, agent.buy_floor))
        _der.update_agent(agent, bid, sold)
    record = IterationRecord(
        iteration=i,
        bids=bids,
        modes=tuple(c[1] for c in choices),
        r2=tuple(c[2] for c in choices),
        decision=decision,
        profits=tuple(profits),
        best_profits=tuple(a.best_profit for a in agents),
    )
    return agents, record


def check_convergence(price_history, tol: float, window: int) -> bool:
    """True when each of the last ``window`` consecutive bid changes is at
    most ``tol`` for every DER."""
    if len(price_history) < window + 1:
        return False
    recent = np.asarray(list(price_history)[-(window + 1):], dtype=float)
    if recent.ndim == 1:
        recent = recent[:, None]
    return bool(np.all(np.abs(np.diff(recent, axis=0)) <= tol))


def run_game(s: Scenario, params: AlgorithmParams, seed: int, keep_trace: bool = False) -> GameResult:
    validate_scenario(s)
    agents = init_agents(s, params)
    rngs = [agent_rng(seed, a.der_id) for a in agents]
    trace = []
    converged = False
    record = None
    prev = None
    # incremental form of check_convergence: trailing run of calm iterations
    calm = 0
    for i in range(1, params.max_iterations + 1):
        agents, record = step(agents, s, params, rngs, i)
        if prev is not None:
            moved = max((abs(a - b) for a, b in zip(record.bids, prev)), default=0.0)
            calm = calm + 1 if moved <= params.conv_tolerance else 0
        prev = record.bids
        if keep_trace:
            trace.append(record)
        if calm >= params.conv_window:
            converged = True
            break

    return GameResult(
        converged=converged,
        final_prices=record.bids,
        final_decision=record.decision,
        final_cost=record.decision.total_cost,
        iterations_used=record.iteration,
        seed=seed,
        trace=trace,
    )


class NoData(ValueError):
    pass


@dataclass
class ExperimentSummary:
    """Aggregate of all repetitions of one scenario."""

    scenario: Scenario
    results: list[GameResult] = field(repr=False)
    mean_prices: tuple[float, ...]
    price_quantiles: tuple[float, float, float, float, float]  # min, p25, median, p75, max
    mean_cost: float
    coverage: list[tuple[float, float]]
    convergence_rate: float

    @property
    def alpha(self) -> float:
        return self.scenario.alpha


def coverage_stats(s: Scenario, results) -> list[tuple[float, float]]:
    """Share of the total demand bought at an effective price at or below
    each price level, pooled over ``results``.

    Grid energy counts at the local grid price and DER energy at the DER's
    final offer. The levels are every pooled final offer plus every grid
    price, so the curve always ends at 1.0.
    """
    if not results:
        raise NoData("no runs to summarise")
    purchases = []  # (price, energy)
    for r in results:
        d = r.final_decision
        purchases.extend(zip(s.tariff.sell_prices, d.grid_purchase))
        purchases.extend(zip(r.final_prices, d.der_purchase))
    levels = sorted({p for r in results for p in r.final_prices} | set(s.tariff.sell_prices))
    prices = np.array([p for p, _ in purchases])
    energy = np.array([e for _, e in purchases])
    total = s.total_demand * len(results)
    curve = []
    for level in levels:
        share = float(energy[prices <= level].sum() / total) if total > 0 else 1.0
        curve.append((level, min(share, 1.0)))
    return curve


def summarize(s: Scenario, results: list[GameResult]) -> ExperimentSummary:
    if not results:
        raise NoData("no runs to summarise")
    prices = np.array([r.final_prices for r in results], dtype=float)
    pooled = prices.ravel()
    quantiles = (
        tuple(float(q) for q in np.quantile(pooled, [0, 0.25, 0.5, 0.75, 1.0]))
        if pooled.size
        else (float("nan"),) * 5
    )
    return ExperimentSummary(
        scenario=s,
        results=results,
        mean_prices=tuple(float(v) for v in prices.mean(axis=0)) if pooled.size else (),
        price_quantiles=quantiles,
        mean_cost=float(np.mean([r.final_cost for r in results])),
        coverage=coverage_stats(s, results),
        convergence_rate=sum(r.converged for r in results) / len(results),
    )


def _run_one(job):
    s, params, seed, keep_trace = job
    return run_game(s, params, seed, keep_trace=keep_trace)


def run_experiment(
    scenarios,
    params: AlgorithmParams,
    base_seed: int,
    jobs: int = 1,
    keep_trace: bool = False,
) -> list[ExperimentSummary]:
    """Run every scenario ``params.n_repetitions`` times with seeds
    ``base_seed + k`` and summarise each scenario.

    With ``jobs > 1`` the runs go to a process pool; every run owns its RNG
    streams, so the outcome matches sequential execution exactly.
    """
    scenarios = [validate_scenario(s) for s in scenarios]
    work = [
        (s, params, base_seed + k, keep_trace)
        for s in scenarios
        for k in range(params.n_repetitions)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work, chunksize=1))
    else:
        results = [_run_one(w) for w in work]

    reps = params.n_repetitions
    return [summarize(s, results[i * reps:(i + 1) * reps]) for i, s in enumerate(scenarios)]
