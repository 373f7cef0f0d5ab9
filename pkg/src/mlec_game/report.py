"""Result bundle on disk: runs.csv, summary.csv, coverage.csv, optional
trace.csv and manifest.json.

Floats in runs.csv and trace.csv are written at full precision so reruns
can be compared byte for byte; summary prices are rounded to 0.01 ct/kWh.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from . import __version__
from .game import ExperimentSummary
from .model import AlgorithmParams, Scenario
from .scenario_file import params_to_dict, scenario_to_dict

RUNS_HEADER = [
    "scenario_id", "alpha", "repetition", "der_id", "location",
    "final_price", "final_sold", "final_profit", "converged", "iterations",
]
SUMMARY_HEADER = [
    "scenario_id", "alpha", "n_locations", "n_ders", "mean_cost", "cost_reduction_vs_alpha0",
    "mean_price", "price_min", "price_p25", "price_median", "price_p75", "price_max",
    "convergence_rate", "coverage",
]
TRACE_HEADER = [
    "scenario_id", "alpha", "repetition", "iteration", "der_id", "bid", "mode",
    "r2", "sold", "profit", "best_profit", "mlec_cost",
]


def _family(s: Scenario):
    return (s.n_locations, s.ders, s.tariff, s.base_demand, s.total_demand)


def cost_reductions(summaries: list[ExperimentSummary]) -> list[float | None]:
    """``1 - cost(alpha) / cost(0)`` against the alpha = 0 run of the same
    market; None when no such run is part of the experiment."""
    reference = {}
    for sm in summaries:
        if sm.alpha == 0:
            reference.setdefault(_family(sm.scenario), sm.mean_cost)
    out = []
    for sm in summaries:
        ref = reference.get(_family(sm.scenario))
        out.append(None if not ref else 1.0 - sm.mean_cost / ref)
    return out


def scenario_ids(summaries) -> list[str]:
    return [sm.scenario.name or f"s{k}" for k, sm in enumerate(summaries)]


def _writer(fh):
    return csv.writer(fh, lineterminator="\r\n")


def write_runs(path: Path, summaries) -> None:
    with path.open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(RUNS_HEADER)
        for sid, sm in zip(scenario_ids(summaries), summaries):
            s = sm.scenario
            for rep, r in enumerate(sm.results):
                profits = r.final_profits(s)
                for k, d in enumerate(s.ders):
                    w.writerow([
                        sid, repr(s.alpha), rep, d.der_id, d.location,
                        repr(r.final_prices[k]), repr(r.final_sold[k]), repr(profits[k]),
                        int(r.converged), r.iterations_used,
                    ])


def _coverage_cell(curve) -> str:
    return " ".join(f"{p:.2f}:{f:.4f}" for p, f in curve)


def write_summary(path: Path, summaries) -> None:
    reductions = cost_reductions(summaries)
    with path.open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SUMMARY_HEADER)
        for sid, sm, red in zip(scenario_ids(summaries), summaries, reductions):
            s = sm.scenario
            mean_price = sum(sm.mean_prices) / len(sm.mean_prices) if sm.mean_prices else float("nan")
            w.writerow([
                sid, f"{s.alpha:g}", s.n_locations, len(s.ders), f"{sm.mean_cost:.2f}",
                "" if red is None else f"{red:.4f}", f"{mean_price:.2f}",
                *(f"{q:.2f}" for q in sm.price_quantiles),
                f"{sm.convergence_rate:.2f}", _coverage_cell(sm.coverage),
            ])


def write_coverage(path: Path, summaries) -> None:
    with path.open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["scenario_id", "alpha", "price", "fraction"])
        for sid, sm in zip(scenario_ids(summaries), summaries):
            for price, frac in sm.coverage:
                w.writerow([sid, f"{sm.alpha:g}", f"{price:.2f}", f"{frac:.6f}"])


def write_trace(path: Path, summaries) -> None:
    with path.open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRACE_HEADER)
        for sid, sm in zip(scenario_ids(summaries), summaries):
            s = sm.scenario
            for rep, r in enumerate(sm.results):
                for rec in r.trace:
                    for k, d in enumerate(s.ders):
                        w.writerow([
                            sid, repr(s.alpha), rep, rec.iteration, d.der_id,
                            repr(rec.bids[k]), rec.modes[k].value, repr(rec.r2[k]),
                            repr(rec.decision.der_purchase[k]), repr(rec.profits[k]),
                            repr(rec.best_profits[k]), repr(rec.decision.total_cost),
                        ])


def manifest(scenarios, params: AlgorithmParams, base_seed: int, trace: bool, source: str) -> dict:
    return {
        "package": "mlec_game",
        "version": __version__,
        "source": source,
        "base_seed": base_seed,
        "trace": trace,
        "algorithm": params_to_dict(params),
        "scenarios": [scenario_to_dict(s) for s in scenarios],
        "runs": [
            {"scenario": s.name, "repetition": k, "seed": base_seed + k}
            for s in scenarios
            for k in range(params.n_repetitions)
        ],
    }


def write_bundle(out: Path, summaries, params, base_seed, trace=False, source="") -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_runs(out / "runs.csv", summaries)
    write_summary(out / "summary.csv", summaries)
    write_coverage(out / "coverage.csv", summaries)
    if trace:
        write_trace(out / "trace.csv", summaries)
    doc = manifest([sm.scenario for sm in summaries], params, base_seed, trace, source)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")
