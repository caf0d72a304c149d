#!/usr/bin/env python3
"""Pr[W_{n,p} = 1] for n = 1..n_max as CSV (default p = 1/3, n_max = 600)."""

import argparse
import sys

from lge.cli import _csv, figure1_rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=float, default=1 / 3)
    parser.add_argument("--n-max", type=int, default=600)
    parser.add_argument("--output", "-o", default="figure1.csv")
    args = parser.parse_args()

    rows = figure1_rows(args.p, args.n_max)
    with open(args.output, "w", newline="") as fh:
        fh.write(_csv(["n", "prob"], rows))
    late = [v for n, v in rows if n >= 10]
    print(f"wrote {len(rows)} rows to {args.output}", file=sys.stderr)
    print(f"n >= 10: min {min(late):.9f}  max {max(late):.9f}  spread {max(late) - min(late):.2e}")


if __name__ == "__main__":
    main()
