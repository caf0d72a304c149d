#!/usr/bin/env python3
"""Search lower estimates of MSP(L, n) and compare with (L-1)/(H_n-1); CSV to stdout."""

import argparse
import csv
import sys

from lge.occupancy import msp_search


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--L", type=int, nargs="+", default=[2, 3, 4])
    parser.add_argument("--n", type=int, nargs="+", default=[10, 50, 100, 200])
    parser.add_argument("--budget", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["L", "n", "searchValue", "bound", "worstQ", "bestVector"])
    for L in args.L:
        for n in args.n:
            r = msp_search(L, n, args.budget, args.seed)
            vec = " ".join(f"{x:.6f}" for x in r.best_vector.probs)
            writer.writerow([L, n, repr(r.value), repr(r.bound), r.worst_q, vec])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
