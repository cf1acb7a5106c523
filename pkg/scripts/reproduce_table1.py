"""Reproduce the rho_hat summary table by Monte Carlo.

    python3 scripts/reproduce_table1.py                 # desk rows, 5000 trials
    python3 scripts/reproduce_table1.py --full          # all rows, 50 000 trials
"""

import argparse
import sys

from qtmsradar.harness import DESK_ROWS, TABLE_I, format_table, table1_report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--path", choices=("wishart", "snapshot"), default="wishart")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    rows = sorted(TABLE_I) if args.full else DESK_ROWS
    trials = 50_000 if args.full else args.trials
    report = table1_report(rows, trials, args.seed, args.path, args.workers)
    sys.stdout.write(format_table(report))
    failed = [r for r in report if not r.passed]
    print(f"# {len(report) - len(failed)}/{len(report)} rows within tolerance")
    return 0 if not failed else 3


if __name__ == "__main__":
    sys.exit(main())
