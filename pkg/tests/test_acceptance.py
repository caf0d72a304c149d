"""Exit criteria. Each test appends one PASS/FAIL line shown in the terminal summary."""

import math
import time

import numpy as np
import pytest

from lge.analytics import (
    GeoParam,
    expected_survivors,
    geometric_variates,
    harmonic,
    max_geo_tail_bound,
    max_tail_exact,
    phi_bound,
    rounds_required,
    survivor_pmf,
    survivor_pmf_alternating,
    survivor_pmf_series,
    survivor_tail_bound,
)
from lge.cli import figure1_rows
from lge.montecarlo import estimate_max_tail, phase_survivor_counts, proportion_std_error
from lge.occupancy import SimplexVector, msp_search, singleton_prob_bruteforce, singleton_prob_exact
from lge.protocol import run_election, survivors_oracle
from lge.streams import stream

from conftest import ACCEPTANCE_LINES

GRID_N = range(2, 101)
GRID_P = [0.01, 0.1, 1 / 3, 0.5, 0.9]


def verdict(number, ok, detail, elapsed=None):
    timing = f" [{elapsed:.3g}s]" if elapsed is not None else ""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}{timing}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def best_time(fn, repeats=5):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def test_01_closed_form_spot_check():
    def compute():
        return (
            survivor_pmf_series(2, 0.5, 2),
            survivor_pmf_alternating(2, 0.5, 2),
            expected_survivors(2, 0.5),
            2 * survivor_pmf_series(2, 0.5, 2) + survivor_pmf_series(2, 0.5, 1),
        )

    (s, alt, e_alt, e_series), elapsed = best_time(compute)
    ref = 0.5 / (1 + 0.5)  # p^2 sum q^(2k) = p / (1 + q)
    err = max(abs(s - ref), abs(alt - ref), abs(e_alt - 4 / 3), abs(e_series - 4 / 3))
    verdict(1, err <= 1e-12 and elapsed < 1e-3, f"Pr[W=2]=1/3, E[W]=4/3, max err {err:.2e}", elapsed)


def _grid():
    return {(n, p): survivor_pmf(n, p) for n in GRID_N for p in GRID_P}


def test_02_identity_suite():
    t0 = time.perf_counter()
    worst = 0.0
    for n in GRID_N:
        for p in GRID_P:
            lhs = expected_survivors(n, p) * (1 - p)
            worst = max(worst, abs(lhs - survivor_pmf_series(n, p, 1)))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-9 and elapsed < 1.0, f"E[W](1-p) = Pr[W=1], max dev {worst:.2e}", elapsed)


def test_03_normalization():
    t0 = time.perf_counter()
    worst = max(abs(survivor_pmf(n, p).total() - 1.0) for n in GRID_N for p in GRID_P)
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-9 and elapsed < 1.0, f"sum_a Pr[W=a] = 1, max dev {worst:.2e}", elapsed)


def test_04_rice_error_bound():
    t0 = time.perf_counter()
    violations = checked = 0
    for n in GRID_N:
        for p in GRID_P:
            g = GeoParam(p)
            pmf = survivor_pmf(n, g)
            a = np.arange(1, n)
            central = p**a / (a * g.log_Q)
            bound = (a + 1) ** 2 / (12 * a) * p**a * g.log_Q
            violations += int(np.count_nonzero(np.abs(pmf.probs[:-1] - central) > bound))
            checked += n - 1
    elapsed = time.perf_counter() - t0
    verdict(4, violations == 0 and elapsed < 2.0, f"{violations} violations in {checked} cells", elapsed)


def test_05_tail_bound():
    t0 = time.perf_counter()
    violations = 0
    for p in (0.01, 0.1, 0.3):
        for n in (20, 100):
            pmf = survivor_pmf(n, p)
            for k in range(1, 16):
                if not pmf.tail(k) < survivor_tail_bound(p, k):
                    violations += 1
    elapsed = time.perf_counter() - t0
    # the published 1.006e-19 for Pr[W>10] is the k=10 envelope summed with ratio p
    at_k10 = survivor_tail_bound(0.01, 10)
    literal_k11 = survivor_tail_bound(0.01, 11)
    ratio_p = phi_bound(0.01, 10) / (1 - 0.01)
    headline_ok = abs(at_k10 / 1.006e-19 - 1) <= 0.02 and abs(ratio_p / 1.006e-19 - 1) <= 1e-3
    detail = (
        f"{violations} violations; bound(k=10)={at_k10:.4g} (within 2% of 1.006e-19), "
        f"phi(10)/(1-p)={ratio_p:.4g}, literal bound(k=11)={literal_k11:.3g}"
    )
    verdict(5, violations == 0 and headline_ok and elapsed < 1.0, detail, elapsed)


def test_06_figure1():
    t0 = time.perf_counter()
    rows = figure1_rows(1 / 3, 600)
    elapsed = time.perf_counter() - t0
    values = [v for n, v in rows if n >= 10]
    lo, hi = min(values), max(values)
    ok = len(rows) == 600 and 0.815 <= lo and hi <= 0.830 and elapsed < 1.0
    verdict(6, ok, f"Pr[W=1] for n in 10..600 within [{lo:.9f}, {hi:.9f}]", elapsed)


def test_07_protocol_correctness():
    rng = stream(7, 0)
    t0 = time.perf_counter()
    failures = 0
    for i in range(10_000):
        n = int(rng.integers(1, 65))
        p = (0.01, 1 / 3, 0.9)[i % 3]
        L = int(rng.integers(0, 7))
        draws = geometric_variates(p, rng, n).tolist()
        if run_election(draws, L, keep_trace=False).survivors != survivors_oracle(draws, L):
            failures += 1
    elapsed = time.perf_counter() - t0
    verdict(7, failures == 0 and elapsed < 5.0, f"{failures} mismatches in 10^4 instances", elapsed)


def test_08_end_to_end_distribution():
    t0 = time.perf_counter()
    n, p = 100, 0.01
    _, L = rounds_required(n, p, 20)
    trials = 10**6
    counts = phase_survivor_counts(n, p, L, trials, seed=2013)
    pmf = survivor_pmf(n, p)
    worst_z = 0.0
    for a in range(1, n + 1):
        if counts[a] == 0 and pmf[a] * trials < 1:
            continue
        se = proportion_std_error(int(counts[a]), trials)
        worst_z = max(worst_z, abs(counts[a] / trials - pmf[a]) / se)
    _, L_big = rounds_required(10**6, p, 20)
    big = phase_survivor_counts(1000, p, L_big, 10**5, seed=2014)
    over10 = int(counts[11:].sum()) + int(big[11:].sum())
    elapsed = time.perf_counter() - t0
    ok = worst_z <= 4 and over10 == 0 and elapsed < 60
    detail = f"max per-bin |z|={worst_z:.2f} over 10^6 phases (L={L}); {over10} phases with >10 survivors"
    verdict(8, ok, detail, elapsed)


@pytest.mark.parametrize("p", [0.01, 0.5])
@pytest.mark.parametrize("n, C", [(100, 2), (1000, 2), (100, 3)])
def test_09_max_tail(n, C, p):
    t0 = time.perf_counter()
    r = estimate_max_tail(n, p, C, 10**6, seed=n * 10 + C)
    elapsed = time.perf_counter() - t0
    threshold, bound = max_geo_tail_bound(n, p, C)
    exact = max_tail_exact(n, p, threshold)
    ok = r.empirical <= bound + 3 * r.std_error and elapsed < 30
    detail = (
        f"(n={n}, C={C}, p={p}) empirical {r.empirical:.4g} vs n^(1-C)={bound:.4g} + 3σ "
        f"({3 * r.std_error:.2g}); exact Pr[M>{threshold:.4g}]={exact:.4g}"
    )
    verdict(9, ok, detail, elapsed)


def test_10_occupancy_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    for L in (1, 2, 3):
        vectors = [SimplexVector.uniform(L)] + [SimplexVector.from_array(rng.dirichlet(np.ones(L))) for _ in range(3)]
        for pvec in vectors:
            for Q in range(2, 7):
                worst = max(worst, abs(singleton_prob_exact(pvec, Q) - singleton_prob_bruteforce(pvec, Q)))
    elapsed = time.perf_counter() - t0
    verdict(10, worst <= 1e-12 and elapsed < 1.0, f"max |exact - brute force| = {worst:.2e}", elapsed)


def test_11_msp_bound():
    t0 = time.perf_counter()
    results = []
    sandwich_failures = 0
    points = 0
    for L, n in [(2, 50), (2, 100), (3, 100), (3, 200)]:
        h = harmonic(n) - 1.0
        Q = np.arange(2, n + 1)

        def observe(vec, curve, L=L, h=h, Q=Q):
            nonlocal sandwich_failures, points
            points += 1
            if max(vec.probs) >= 1.0:
                return
            f = math.fsum(curve / Q)
            if not (curve.min() * h <= f + 1e-12 and f < L - 1):
                sandwich_failures += 1

        r = msp_search(L, n, budget=20_000, seed=L * 1000 + n, observer=observe)
        results.append(r)
    elapsed = time.perf_counter() - t0
    below = all(r.value < r.bound for r in results)
    summary = ", ".join(f"MSP({r.L},{r.n})>={r.value:.4f}<{r.bound:.4f}" for r in results)
    ok = below and sandwich_failures == 0 and elapsed < 120
    verdict(11, ok, f"{summary}; sandwich failures {sandwich_failures}/{points}", elapsed)


def test_12_rounds():
    (slots, L), elapsed = best_time(lambda: rounds_required(10**6, 0.01, 20))
    verdict(12, slots == 16 and elapsed < 1e-3, f"rounds_required(10^6, 0.01, 20) = {slots} (L={L})", elapsed)
