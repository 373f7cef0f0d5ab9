"""Command-line front end.

Examples::

    mlec-game --preset fig3 --seed 7 --out results/fig3
    mlec-game --scenario my.json --runs 1 --trace --out results/mine
    mlec-game --manifest results/fig3/manifest.json --out results/fig3-again

Exit status: 0 on success (non-converged runs are only flagged in the
outputs), 1 on invalid input, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .game import run_experiment
from .model import ScenarioError
from .presets import PRESETS, UnknownPreset, preset
from .report import cost_reductions, write_bundle
from .scenario_file import load, params_to_dict, parse_document, parse_params

log = logging.getLogger("mlec_game")

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlec-game", description="Simulate DER price negotiation with a multi-location consumer.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS, help="case-study experiment")
    src.add_argument("--scenario", type=Path, help="JSON scenario file")
    src.add_argument("--manifest", type=Path, help="rerun a previous manifest.json exactly")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--seed", type=int, help="base seed (repetition k uses seed + k)")
    p.add_argument("--runs", type=int, help="repetitions per scenario")
    p.add_argument("--trace", action="store_true", help="also write per-iteration trace.csv")
    p.add_argument("--tol", type=float, help="convergence tolerance in ct/kWh")
    p.add_argument("--window", type=int, help="convergence window in iterations")
    p.add_argument("--sigma0", type=float, help="initial exploration std. dev. in ct/kWh")
    p.add_argument("--epsilon", type=float, help="knowledge initialisation offset in ct/kWh")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap per run")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def _resolve(args):
    overrides = dict(
        conv_tolerance=args.tol,
        conv_window=args.window,
        sigma0=args.sigma0,
        epsilon=args.epsilon,
        max_iterations=args.max_iter,
        n_repetitions=args.runs,
    )
    trace = args.trace
    if args.preset:
        scenarios = preset(args.preset)
        params = parse_params(None, **overrides)
        seed = args.seed
        source = f"preset:{args.preset}"
    elif args.scenario:
        scenarios, file_params, seed = load(args.scenario)
        params = parse_params(params_to_dict(file_params), **overrides)
        seed = args.seed if args.seed is not None else seed
        source = f"scenario:{args.scenario.name}"
    else:
        doc = json.loads(args.manifest.read_text())
        scenarios, file_params, _ = parse_document(
            {"scenarios": doc["scenarios"], "algorithm": doc["algorithm"]}
        )
        params = parse_params(params_to_dict(file_params), **overrides)
        seed = args.seed if args.seed is not None else doc["base_seed"]
        trace = trace or bool(doc.get("trace"))
        source = doc.get("source", f"manifest:{args.manifest.name}")
    return scenarios, params, 0 if seed is None else seed, trace, source


def _print_summaries(summaries) -> None:
    print(f"{'scenario':<18}{'alpha':>6}{'mean price':>12}{'mean cost':>11}{'reduction':>11}{'conv':>6}")
    for sm, red in zip(summaries, cost_reductions(summaries)):
        mp = sum(sm.mean_prices) / len(sm.mean_prices) if sm.mean_prices else float("nan")
        red_s = "" if red is None else f"{100 * red:.1f}%"
        print(
            f"{sm.scenario.name:<18}{sm.alpha:>6.1f}{mp:>12.2f}{sm.mean_cost:>11.2f}"
            f"{red_s:>11}{sm.convergence_rate:>6.0%}"
        )


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"mlec-game: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    try:
        scenarios, params, seed, trace, source = _resolve(args)
    except OSError as exc:
        print(f"mlec-game: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ScenarioError, UnknownPreset, ValueError, KeyError, TypeError) as exc:
        print(f"mlec-game: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT

    log.info(
        "running %d scenario(s) x %d repetition(s), base seed %d",
        len(scenarios), params.n_repetitions, seed,
    )
    summaries = run_experiment(scenarios, params, seed, jobs=max(args.jobs, 1), keep_trace=trace)

    try:
        write_bundle(args.out, summaries, params, seed, trace=trace, source=source)
    except OSError as exc:
        print(f"mlec-game: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO

    if not args.quiet:
        _print_summaries(summaries)
        print(f"results written to {args.out}")
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
