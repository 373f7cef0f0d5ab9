"""Dynamic pricing game between a multi-location electricity consumer and
strategic DER owners."""

from .der import (
    DegenerateData,
    DerAgent,
    NonConcave,
    Observation,
    OverSold,
    RegressionFit,
    explore_bid,
    fit_price_demand,
    init_knowledge,
    optimal_bid,
    profit,
    update_agent,
)
from .mlec import MlecDecision, StepTooCoarse, brute_force_mlec, solve_mlec
from .model import (
    AlgorithmParams,
    BadIndex,
    Der,
    EmptyBidInterval,
    GridTariff,
    InfeasibleDemand,
    Scenario,
    ScenarioError,
    default_sell_price,
    default_tariff,
    validate_scenario,
)

__version__ = "0.1.0"
