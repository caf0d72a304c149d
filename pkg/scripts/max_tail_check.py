#!/usr/bin/env python3
"""Tail of the maximum: n^(1-C) against the exact tail, the integer-safe bound and Monte Carlo."""

import argparse

from lge.analytics import max_geo_tail_bound, max_tail_exact
from lge.montecarlo import estimate_max_tail


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'p':>5} {'n':>5} {'C':>3} {'threshold':>10} {'n^(1-C)':>10} {'n q^floor':>10} "
          f"{'exact':>10} {'empirical':>10} {'z vs n^(1-C)':>12}")
    for p in (0.01, 0.1, 0.5):
        for n, C in ((100, 2), (1000, 2), (100, 3)):
            t, bound = max_geo_tail_bound(n, p, C)
            _, safe = max_geo_tail_bound(n, p, C, integer_safe=True)
            r = estimate_max_tail(n, p, C, args.trials, seed=args.seed)
            print(f"{p:>5} {n:>5} {C:>3} {t:>10.4f} {bound:>10.3e} {safe:>10.3e} "
                  f"{max_tail_exact(n, p, t):>10.3e} {r.empirical:>10.3e} {r.z_score:>12.2f}")


if __name__ == "__main__":
    main()
