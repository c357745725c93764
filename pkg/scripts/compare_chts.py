"""Run every CHT preset on a set of problems and write one summary table.

    python scripts/compare_chts.py --problems cre21 cre22 cre23 --reps 10 --out results/compare
"""

import argparse
import logging
import time
from pathlib import Path

from chtmoead.cht import PRESETS
from chtmoead.harness import config_from_dict, emit_anytime, emit_summary, run_experiment

log = logging.getLogger("compare_chts")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", nargs="+", default=["cre21", "cre22", "cre23"])
    ap.add_argument("--chts", nargs="+", default=list(PRESETS))
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--budget", type=int, default=20_000)
    ap.add_argument("--population", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/compare")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    results = []
    for problem in args.problems:
        for cht in args.chts:
            cfg = config_from_dict({
                "problem": problem, "cht": cht, "moead": {"population": args.population},
                "budget": args.budget, "reps": args.reps, "seed": args.seed, "output_dir": str(out),
            })
            t0 = time.perf_counter()
            results += run_experiment(cfg, workers=args.workers)
            log.info("%s %-13s %d runs in %.1fs", problem, cht, args.reps, time.perf_counter() - t0)

    emit_summary(results, out / "summary.csv")
    emit_anytime(results, out)
    print((out / "summary.csv").read_text(), end="")


if __name__ == "__main__":
    main()
