"""JSON scenario files.

A document describes one market instance::

    {
      "n_locations": 3,
      "alpha": 0.5,
      "total_demand": 15,
      "base_demand": [5, 5, 5],
      "grid": {"buy_price": 15, "sell_prices": "paper-default"},
      "ders": [{"location": 1, "capacity": 10}, ...],
      "algorithm": {"epsilon": 0.1, "sigma0": 5},
      "seed": 7
    }

``alpha`` may also be a list, which expands into one scenario per value.
Several instances can be bundled as ``{"scenarios": [...], "algorithm":
..., "seed": ...}``. Missing algorithm keys take the defaults of
:class:`AlgorithmParams`.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .model import (
    BUY_PRICE,
    AlgorithmParams,
    Der,
    GridTariff,
    Scenario,
    ScenarioError,
    default_tariff,
    validate_scenario,
)

PAPER_DEFAULT = "paper-default"
ALGORITHM_KEYS = tuple(f.name for f in dataclasses.fields(AlgorithmParams))


class ScenarioFileError(ScenarioError):
    pass


def _require(doc: dict, key: str):
    try:
        return doc[key]
    except KeyError:
        raise ScenarioFileError(f"missing key {key!r}") from None


def parse_params(doc: dict | None, **overrides) -> AlgorithmParams:
    doc = dict(doc or {})
    unknown = set(doc) - set(ALGORITHM_KEYS)
    if unknown:
        raise ScenarioFileError(f"unknown algorithm keys: {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return AlgorithmParams(**doc)
    except (TypeError, ValueError) as exc:
        raise ScenarioFileError(str(exc)) from exc


def _parse_one(doc: dict, default_name: str) -> list[Scenario]:
    n = int(_require(doc, "n_locations"))
    grid = doc.get("grid", {})
    buy = float(grid.get("buy_price", BUY_PRICE))
    sell = grid.get("sell_prices", PAPER_DEFAULT)
    if sell == PAPER_DEFAULT:
        tariff = default_tariff(n, buy)
    elif isinstance(sell, list):
        tariff = GridTariff(buy, tuple(float(p) for p in sell))
    else:
        raise ScenarioFileError(f"sell_prices must be a list or {PAPER_DEFAULT!r}")

    ders = []
    for k, entry in enumerate(_require(doc, "ders"), start=1):
        ders.append(
            Der(
                der_id=int(entry.get("id", k)),
                location=int(_require(entry, "location")),
                capacity=float(_require(entry, "capacity")),
            )
        )

    alphas = doc.get("alpha", 0.0)
    multi = isinstance(alphas, list)
    name = str(doc.get("name", default_name))
    scenarios = []
    for alpha in alphas if multi else [alphas]:
        s = Scenario(
            n_locations=n,
            ders=tuple(ders),
            tariff=tariff,
            base_demand=tuple(float(d) for d in _require(doc, "base_demand")),
            total_demand=float(_require(doc, "total_demand")),
            alpha=float(alpha),
            name=f"{name}_a{float(alpha):g}" if multi else name,
        )
        scenarios.append(validate_scenario(s))
    return scenarios


def parse_document(doc: dict, default_name: str = "scenario"):
    """Resolve a scenario document into ``(scenarios, params, seed)``.

    Raises:
        ScenarioError: malformed document or an invalid market instance.
    """
    if not isinstance(doc, dict):
        raise ScenarioFileError("scenario document must be a JSON object")
    params = parse_params(doc.get("algorithm"))
    seed = doc.get("seed")
    if "scenarios" in doc:
        scenarios = []
        for k, sub in enumerate(doc["scenarios"]):
            scenarios.extend(_parse_one(sub, f"{default_name}{k}"))
    else:
        scenarios = _parse_one(doc, default_name)
    if seed is not None:
        seed = int(seed)
    return scenarios, params, seed


def load(path) -> tuple[list[Scenario], AlgorithmParams, int | None]:
    path = Path(path)
    with path.open() as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFileError(f"{path}: {exc}") from exc
    return parse_document(doc, default_name=path.stem)


def scenario_to_dict(s: Scenario) -> dict:
    """Fully resolved form: explicit tariffs and DER ids."""
    return {
        "name": s.name,
        "n_locations": s.n_locations,
        "alpha": s.alpha,
        "total_demand": s.total_demand,
        "base_demand": list(s.base_demand),
        "grid": {"buy_price": s.tariff.buy_price, "sell_prices": list(s.tariff.sell_prices)},
        "ders": [
            {"id": d.der_id, "location": d.location, "capacity": d.capacity} for d in s.ders
        ],
    }


def params_to_dict(params: AlgorithmParams) -> dict:
    return dataclasses.asdict(params)


def to_document(scenarios, params: AlgorithmParams, seed: int | None) -> dict:
    doc = {
        "scenarios": [scenario_to_dict(s) for s in scenarios],
        "algorithm": params_to_dict(params),
    }
    if seed is not None:
        doc["seed"] = seed
    return doc
