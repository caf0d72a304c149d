"""Singletons in the urns-and-balls model and the lower bound on oblivious election.

``ball_count`` balls are thrown independently into ``L`` urns with
probabilities ``p_1..p_L``. A singleton is an urn holding exactly one ball.
``MSP(L, n)`` is the best worst-case probability of some singleton existing,
maximised over urn distributions and minimised over ball counts ``2..n``. It
is always below ``(L - 1) / (H_n - 1)``.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analytics import EULER_GAMMA, harmonic
from .streams import stream

MAX_EXACT_URNS = 20


@dataclass(frozen=True)
class SimplexVector:
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(x) for x in self.probs)
        if not probs:
            raise ValueError("need at least one urn")
        if any(x < 0 for x in probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, L: int) -> SimplexVector:
        return cls((1.0 / L,) * L)

    @classmethod
    def from_array(cls, x) -> SimplexVector:
        """Renormalise a nonnegative array with float-level drift."""
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
        return cls(tuple(x / x.sum()))

    @property
    def L(self) -> int:
        return len(self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class MspResult:
    L: int
    n: int
    best_vector: SimplexVector
    worst_q: int
    value: float
    bound: float
    evaluations: int = 0
    budget_exhausted: bool = False

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "n": self.n,
            "bestVector": list(self.best_vector.probs),
            "worstQ": self.worst_q,
            "value": self.value,
            "bound": self.bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _as_vector(pvec) -> SimplexVector:
    return pvec if isinstance(pvec, SimplexVector) else SimplexVector(tuple(pvec))


def singleton_prob_single_urn(pvec, ball_count: int, urn_index: int) -> float:
    """``Pr[urn i holds exactly one ball] = Q p_i (1 - p_i)^(Q-1)``."""
    pvec = _as_vector(pvec)
    if ball_count < 2:
        raise ValueError("ball_count must be at least 2")
    pi = pvec.probs[urn_index]
    return ball_count * pi * (1.0 - pi) ** (ball_count - 1)


def union_bound(pvec, ball_count: int) -> float:
    pvec = _as_vector(pvec)
    return math.fsum(singleton_prob_single_urn(pvec, ball_count, i) for i in range(pvec.L))


def _subset_terms(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Size, product and complement mass ``1 - sum`` for every nonempty subset."""
    L = len(probs)
    sizes, prods, rests = [], [], []
    for t in range(1, L + 1):
        for subset in itertools.combinations(range(L), t):
            chosen = probs[list(subset)]
            sizes.append(t)
            prods.append(float(np.prod(chosen)))
            rests.append(max(0.0, 1.0 - math.fsum(chosen)))
    return np.array(sizes), np.array(prods), np.array(rests)


def singleton_prob_curve(pvec, ball_counts) -> np.ndarray:
    """:func:`singleton_prob_exact` for many ball counts at once."""
    pvec = _as_vector(pvec)
    if pvec.L > MAX_EXACT_URNS:
        raise ValueError(f"exact evaluation enumerates 2^L subsets; L={pvec.L} > {MAX_EXACT_URNS}")
    Q = np.atleast_1d(np.asarray(ball_counts, dtype=np.int64))
    if np.any(Q < 2):
        raise ValueError("ball_count must be at least 2")
    sizes, prods, rests = _subset_terms(np.array(pvec.probs))
    Qf = Q.astype(np.float64)[:, None]
    t = sizes[None, :].astype(np.float64)
    # Pr[every urn in T is a singleton] = Q!/(Q-|T|)! prod_T p_i (1 - sum_T p_i)^(Q-|T|)
    falling = np.ones((len(Q), len(sizes)))
    for j in range(int(sizes.max())):
        falling *= np.where(j < t, np.maximum(Qf - j, 0.0), 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        power = np.where(Qf - t == 0, 1.0, rests[None, :] ** (Qf - t))
        inter = falling * prods[None, :] * power
    inter = np.where(t <= Qf, inter, 0.0)
    sign = np.where(sizes % 2 == 1, 1.0, -1.0)
    return np.clip((inter * sign[None, :]).sum(axis=1), 0.0, 1.0)


def singleton_prob_exact(pvec, ball_count: int) -> float:
    """Probability that some urn holds exactly one ball, by inclusion-exclusion."""
    return float(singleton_prob_curve(pvec, [ball_count])[0])


def singleton_prob_bruteforce(pvec, ball_count: int) -> float:
    """Sum the weight of every assignment of balls to urns that leaves a singleton."""
    probs = _as_vector(pvec).probs
    L = len(probs)
    total = []
    for assignment in itertools.product(range(L), repeat=ball_count):
        counts = [0] * L
        for urn in assignment:
            counts[urn] += 1
        if 1 in counts:
            total.append(math.prod(probs[u] for u in assignment))
    return math.fsum(total)


def willard_f(pvec, n: int) -> float:
    """``sum_{Q=2..n} Pr[singleton with Q balls] / Q``, below ``L - 1``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    Q = np.arange(2, n + 1)
    return math.fsum(singleton_prob_curve(pvec, Q) / Q)


def msp_bound(L: int, n: int) -> float:
    if L < 1:
        raise ValueError("L must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    return (L - 1) / (harmonic(n) - 1.0)


def random_bits_threshold(n: int) -> float:
    """Key lengths up to this many random bits elect with probability below 1/2."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return math.log2(math.log(n) / 2.0 + (1.0 + EULER_GAMMA) / 2.0)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}`` (sort-and-threshold)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


Observer = Callable[[SimplexVector, np.ndarray], None]


def _worst_case(x: np.ndarray, Q: np.ndarray, observer: Observer | None = None) -> tuple[float, int]:
    vec = SimplexVector.from_array(x)
    curve = singleton_prob_curve(vec, Q)
    if observer is not None:
        observer(vec, curve)
    i = int(np.argmin(curve))
    return float(curve[i]), int(Q[i])


def _local_search(
    start: np.ndarray,
    Q: np.ndarray,
    budget: int,
    rng: np.random.Generator,
    observer: Observer | None = None,
) -> tuple[np.ndarray, float, int, int, bool]:
    """Projected pattern search maximising the worst-case singleton probability.

    Each round tries ``+-step`` moves along pairwise mass transfers and a few
    random directions, projecting back onto the simplex. The step halves when
    no move improves. Stops at ``step < 1e-9`` or when ``budget`` evaluations
    are spent.
    """
    L = len(start)
    x = project_to_simplex(start)
    best, worst_q = _worst_case(x, Q, observer)
    evals = 1
    step = 0.25
    directions = []
    for i in range(L):
        for j in range(L):
            if i != j:
                d = np.zeros(L)
                d[i], d[j] = 1.0, -1.0
                directions.append(d)
    while step > 1e-9:
        if evals >= budget:
            return x, best, worst_q, evals, True
        extra = rng.normal(size=(L, L))
        extra -= extra.mean(axis=1, keepdims=True)
        extra /= np.maximum(np.linalg.norm(extra, axis=1), 1e-300)[:, None]
        trial_dirs = directions + list(extra)
        improved = False
        for d in trial_dirs:
            if evals >= budget:
                break
            y = project_to_simplex(x + step * d)
            val, q = _worst_case(y, Q, observer)
            evals += 1
            if val > best:
                x, best, worst_q, improved = y, val, q, True
        if not improved:
            step *= 0.5
    return x, best, worst_q, evals, False


def msp_search(
    L: int,
    n: int,
    budget: int = 20_000,
    seed: int = 0,
    starts: int = 32,
    threads: int = 1,
    observer: Observer | None = None,
) -> MspResult:
    """Multi-start estimate of ``MSP(L, n)`` from below.

    The first start is the uniform vector and the rest are ``Dirichlet(1)``.
    ``budget`` objective evaluations are shared equally between starts. The
    inner minimum over ball counts is exact. ``observer(vector, curve)`` sees
    every evaluated point with its singleton probabilities for ``Q = 2..n``.
    """
    if L < 1 or n < 2:
        raise ValueError("need L >= 1 and n >= 2")
    bound = msp_bound(L, n)
    Q = np.arange(2, n + 1)
    if L == 1:
        return MspResult(L, n, SimplexVector((1.0,)), 2, 0.0, bound, evaluations=0)
    per_start = max(1, budget // starts)

    def run(i):
        rng = stream(seed, i)
        x0 = np.full(L, 1.0 / L) if i == 0 else rng.dirichlet(np.ones(L))
        return _local_search(x0, Q, per_start, rng, observer)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(starts)))
    else:
        results = [run(i) for i in range(starts)]
    # first start wins ties
    best_i = max(range(starts), key=lambda i: (results[i][1], -i))
    x, value, worst_q, _, _ = results[best_i]
    return MspResult(
        L=L,
        n=n,
        best_vector=SimplexVector.from_array(x),
        worst_q=worst_q,
        value=value,
        bound=bound,
        evaluations=sum(r[3] for r in results),
        budget_exhausted=any(r[4] for r in results),
    )
