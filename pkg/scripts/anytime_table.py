"""Print the median anytime HV of each group in a results directory at chosen budgets.

    python scripts/anytime_table.py results/compare --at 2000 5000 10000 20000
"""

import argparse

import numpy as np

from chtmoead.harness import aggregate_anytime, group_results, load_results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("results_dir")
    ap.add_argument("--at", type=int, nargs="+", default=[2000, 5000, 10000, 20000])
    args = ap.parse_args(argv)

    results = load_results(args.results_dir)
    if not results:
        raise SystemExit(f"no complete runs under {args.results_dir}")
    print("problem,cht," + ",".join(f"hv@{b}" for b in args.at))
    for (problem, cht, _), recs in group_results(results).items():
        rows = aggregate_anytime(recs)
        evals = np.array([r["evaluations"] for r in rows])
        cells = []
        for b in args.at:
            idx = np.searchsorted(evals, b, side="right") - 1
            cells.append(f"{rows[idx]['hv_median']:.4f}" if idx >= 0 else "")
        print(f"{problem},{cht}," + ",".join(cells))


if __name__ == "__main__":
    main()
