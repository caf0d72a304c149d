#!/usr/bin/env python3
"""Ways of evaluating the survivor tail envelope at p = 0.01 next to the exact tail."""

import math

from lge.analytics import phi_bound, survivor_pmf, survivor_tail_bound

P = 0.01
PUBLISHED = 1.006e-19

rows = [
    ("phi(10) / (1 - 2p)   [bound on Pr[W >= 10]]", survivor_tail_bound(P, 10)),
    ("phi(10) / (1 - p)    [ratio-p geometric sum]", phi_bound(P, 10) / (1 - P)),
    ("sum_{a>=10} phi(a)", math.fsum(phi_bound(P, a) for a in range(10, 60))),
    ("phi(11) / (1 - 2p)   [bound on Pr[W >= 11] = Pr[W > 10]]", survivor_tail_bound(P, 11)),
    ("sum_{a>=11} phi(a)", math.fsum(phi_bound(P, a) for a in range(11, 60))),
]
for label, value in rows:
    print(f"{label:<58} {value:.6e}   rel. to 1.006e-19: {value / PUBLISHED - 1:+.3%}")

for n in (20, 100, 1000):
    pmf = survivor_pmf(n, P)
    print(f"exact n={n:<5} Pr[W >= 10] = {pmf.tail(10):.6e}   Pr[W >= 11] = {pmf.tail(11):.6e}")
