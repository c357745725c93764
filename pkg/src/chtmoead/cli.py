"""Command line entry point: ``chtmoead {run,summarize,list-problems,list-chts}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import ConfigError, emit_summary, list_chts, load_config, run_experiment, summarize_dir
from .problems import get_problem, problem_names

log = logging.getLogger("chtmoead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chtmoead", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment described by a JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="base seed (overrides config)")
    p.add_argument("--reps", type=int, help="number of seeded runs (overrides config)")
    p.add_argument("--budget", type=int, help="evaluation budget per run (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("summarize", help="write summary.csv and anytime CSVs for a results directory")
    p.add_argument("results_dir")

    sub.add_parser("list-problems", help="list registered problems")
    sub.add_parser("list-chts", help="list constraint handling presets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.reps is not None and args.reps < 1:
                raise ConfigError("--reps: must be >= 1")
            cfg = cfg.with_overrides(seed=args.seed, reps=args.reps, budget=args.budget, output_dir=args.out)
            log.info("running %s x %s, %d reps, budget %d", cfg.problem, cfg.cht, cfg.reps, cfg.moead.budget)
            results = run_experiment(cfg, workers=max(1, args.workers))
            sys.stdout.write(emit_summary(results))
        elif args.command == "summarize":
            summary, written = summarize_dir(args.results_dir)
            print(f"wrote {summary} and {len(written)} trace files")
        elif args.command == "list-problems":
            for name in problem_names():
                p = get_problem(name)
                print(f"{name:14s} n_var={p.n_var} n_obj={p.n_obj} n_con={p.n_con}  {p.description}")
        elif args.command == "list-chts":
            for name, base, params in list_chts():
                print(f"{name:14s} {base:13s} {json.dumps(params)}")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
