"""Monte Carlo estimates checked against the analytic survivor and maximum laws.

Trials are cut into batches of :data:`~lge.streams.BATCH_SIZE`. Each batch
draws from its own stream keyed by ``(seed, batch_index)``, and only integer
counts are aggregated. Results are therefore bit-identical for any number of
worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .analytics import (
    GeoParam,
    _param,
    geometric_variates,
    max_geo_tail_bound,
    max_geometric_variates,
    survivor_pmf,
)
from .protocol import run_election_batch
from .streams import BATCH_SIZE, batches, stream

__all__ = [
    "EstimateReport",
    "estimate_max_tail",
    "estimate_phase_survivors",
    "estimate_survivor_pmf",
    "histogram_csv",
    "proportion_std_error",
    "reports_json",
    "survivor_counts",
]

# a truncation probability above this makes the phase histogram incomparable to WGeo
TRUNCATION_BUDGET_LIMIT = 1e-3


@dataclass
class EstimateReport:
    quantity: str
    trials: int
    empirical: float
    analytic: float
    std_error: float
    z_score: float
    count: int = 0
    passed: bool | None = None
    note: str = ""


def proportion_std_error(count: int, trials: int) -> float:
    """Binomial standard error of ``count / trials``, Wilson-style for rare events."""
    p_hat = count / trials
    if min(count, trials - count) >= 10:
        return math.sqrt(p_hat * (1.0 - p_hat) / trials)
    # one-sigma Wilson half-width; stays positive at 0 or trials successes
    return math.sqrt(p_hat * (1.0 - p_hat) / trials + 0.25 / trials**2) / (1.0 + 1.0 / trials)


def _report(quantity: str, count: int, trials: int, analytic: float) -> EstimateReport:
    empirical = count / trials
    se = proportion_std_error(count, trials)
    return EstimateReport(
        quantity=quantity,
        trials=trials,
        empirical=empirical,
        analytic=analytic,
        std_error=se,
        z_score=(empirical - analytic) / se,
        count=count,
    )


def _run_batches(
    work: Callable[[np.random.Generator, int], np.ndarray],
    trials: int,
    seed: int,
    threads: int = 1,
    batch_size: int = BATCH_SIZE,
) -> np.ndarray:
    """Sum integer count vectors returned by ``work(rng, size)`` over all batches."""
    plan = batches(trials, batch_size)

    def one(job):
        index, size = job
        return work(stream(seed, index), size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, plan))
    else:
        results = [one(job) for job in plan]
    width = max(len(r) for r in results)
    total = np.zeros(width, dtype=np.int64)
    for r in results:
        total[: len(r)] += r
    return total


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError("trials must be positive")


def survivor_counts(
    n: int, param: GeoParam | float, trials: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Histogram of ``W`` (index = survivor count) from direct geometric draws."""
    param = _param(param)
    _check_trials(trials)

    def work(rng, size):
        x = geometric_variates(param, rng, (size, n))
        w = (x == x.max(axis=1, keepdims=True)).sum(axis=1)
        return np.bincount(w, minlength=n + 1)

    # keep a batch around 2^14 * 100 draws
    batch = max(1, min(BATCH_SIZE, (BATCH_SIZE * 100) // n))
    return _run_batches(work, trials, seed, threads, batch)


def estimate_survivor_pmf(
    n: int, param: GeoParam | float, trials: int, seed: int = 0, threads: int = 1
) -> list[EstimateReport]:
    """Empirical ``Pr[W = a]`` for every ``a`` with observed mass."""
    param = _param(param)
    counts = survivor_counts(n, param, trials, seed, threads)
    pmf = survivor_pmf(n, param)
    return [
        _report(f"Pr[W={a}]", int(counts[a]), trials, pmf[a])
        for a in range(1, n + 1)
        if counts[a] > 0
    ]


def estimate_max_tail(
    n: int,
    param: GeoParam | float,
    C: float,
    trials: int,
    seed: int = 0,
    threads: int = 1,
) -> EstimateReport:
    """Frequency of ``M > C ln n / ln Q`` against the bound ``n^(1-C)``.

    ``M`` is drawn by inverting its exact CDF ``(1 - q^k)^n``, which costs one
    uniform per trial whatever ``n`` is. ``C = 1`` is allowed and gives the
    trivial bound 1.
    """
    param = _param(param)
    _check_trials(trials)
    if C == 1:
        threshold, bound = math.log(n) / param.log_Q, 1.0
    else:
        threshold, bound = max_geo_tail_bound(n, param, C)

    def work(rng, size):
        m = max_geometric_variates(n, param, rng, size)
        return np.array([np.count_nonzero(m > threshold)])

    count = int(_run_batches(work, trials, seed, threads)[0])
    report = _report(f"Pr[M>{threshold:.6g}]", count, trials, bound)
    report.passed = report.empirical <= bound + 3 * report.std_error
    return report


def phase_survivor_counts(
    n: int, param: GeoParam | float, L: int, trials: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Histogram of survivor counts over full slot-level LGE phases."""
    param = _param(param)
    _check_trials(trials)

    def work(rng, size):
        draws = geometric_variates(param, rng, (size, n))
        survivors = run_election_batch(draws, L).sum(axis=1)
        return np.bincount(survivors, minlength=n + 1)

    batch = max(1, min(BATCH_SIZE, (BATCH_SIZE * 100) // n))
    return _run_batches(work, trials, seed, threads, batch)


def truncation_budget(n: int, param: GeoParam | float, L: int) -> float:
    """Union bound on some draw reaching ``3^(L+1)`` and being truncated."""
    param = _param(param)
    return min(1.0, n * math.exp((3 ** (L + 1) - 1) * param.log_q))


def estimate_phase_survivors(
    n: int,
    param: GeoParam | float,
    L: int,
    trials: int,
    seed: int = 0,
    threads: int = 1,
) -> list[EstimateReport]:
    """Survivor-count frequencies of full phases against ``WGeo(n, p)``.

    A bin passes when its z-score is within 3 after widening the standard
    error by the truncation budget. When that budget is large the reports
    carry a regime-mismatch note and no verdict is given.
    """
    param = _param(param)
    counts = phase_survivor_counts(n, param, L, trials, seed, threads)
    pmf = survivor_pmf(n, param)
    budget = truncation_budget(n, param, L)
    mismatch = budget > TRUNCATION_BUDGET_LIMIT
    reports = []
    for a in range(1, n + 1):
        if counts[a] == 0 and pmf[a] * trials < 1:
            continue
        r = _report(f"Pr[survivors={a}]", int(counts[a]), trials, pmf[a])
        if mismatch:
            r.note = f"regime mismatch: truncation budget {budget:.3g}"
        else:
            r.passed = abs(r.empirical - r.analytic) <= 3 * r.std_error + budget
        reports.append(r)
    return reports


def reports_json(reports: list[EstimateReport] | EstimateReport) -> str:
    if isinstance(reports, EstimateReport):
        reports = [reports]
    return json.dumps([asdict(r) for r in reports], indent=2)


def histogram_csv(reports: list[EstimateReport]) -> str:
    """Columns ``a, count, frequency, analytic, z``; ``a`` parsed from the label."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "count", "frequency", "analytic", "z"])
    for r in reports:
        a = r.quantity.rsplit("=", 1)[-1].rstrip("]")
        writer.writerow([a, r.count, repr(r.empirical), repr(r.analytic), repr(r.z_score)])
    return buf.getvalue()
