"""Distribution theory for the maximum of geometric variates and its multiplicity.

``MGeo(n, p)`` is the law of the maximum of ``n`` iid ``Geo(p)`` variates and
``WGeo(n, p)`` the law of the number of variates attaining that maximum (the
survivors of one LGE phase).

Two evaluation paths are provided for the survivor pmf:

* :func:`survivor_pmf_alternating`, the alternating binomial sum. In floating
  point it cancels catastrophically once ``n`` exceeds a few dozen, so it guards
  itself with a sentinel and can also be evaluated in exact rational arithmetic.
* :func:`survivor_pmf_series`, a sum over the value of the maximum with only
  nonnegative terms. This is the production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

__all__ = [
    "EULER_GAMMA",
    "CancellationError",
    "GeoParam",
    "RiceApprox",
    "SurvivorPmf",
    "expected_max_approx",
    "expected_max_exact",
    "expected_survivors",
    "harmonic",
    "max_geo_tail_bound",
    "max_tail_exact",
    "phi_bound",
    "pmf_rice_approx",
    "rounds_required",
    "sample_geometric",
    "survivor_pmf",
    "survivor_pmf_alternating",
    "survivor_pmf_series",
    "survivor_tail_bound",
]

EULER_GAMMA = 0.5772156649015329

# ratio max|term| / |sum| above which the alternating sum is declared untrustworthy
CANCELLATION_LIMIT = 1e12
# tighter limit used when expected_survivors decides whether to trust the alternating sum
_EXPECTATION_CANCELLATION_LIMIT = 1e4

_SERIES_TOL = 1e-16
_SERIES_CHUNK = 4096
_HARMONIC_EXACT_MAX = 10**6


class CancellationError(ArithmeticError):
    """An alternating sum lost too many significant digits to be trusted."""

    def __init__(self, message: str, amplification: float):
        super().__init__(message)
        self.amplification = amplification


@dataclass(frozen=True)
class GeoParam:
    """Success probability ``p`` of a geometric law on ``{1, 2, ...}``.

    ``q = 1 - p`` and ``log_Q = ln(1 / (1 - p))`` are derived once.
    """

    p: float
    q: float = field(init=False)
    log_Q: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (0.0 < p < 1.0) or math.isnan(p):
            raise ValueError(f"p must lie in the open interval (0, 1), got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)
        object.__setattr__(self, "log_Q", -math.log1p(-p))

    @property
    def log_q(self) -> float:
        return -self.log_Q


def _param(param) -> GeoParam:
    return param if isinstance(param, GeoParam) else GeoParam(param)


@dataclass(frozen=True)
class SurvivorPmf:
    """Exact distribution table of the survivor count ``W`` for one ``(n, p)``."""

    n: int
    param: GeoParam
    probs: np.ndarray
    method: Literal["alternating", "series"] = "series"

    def __getitem__(self, a: int) -> float:
        if not 1 <= a <= self.n:
            return 0.0
        return float(self.probs[a - 1])

    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(np.arange(1, self.n + 1) * self.probs)

    def tail(self, k: int) -> float:
        """``Pr[W >= k]``."""
        if k <= 1:
            return self.total()
        return math.fsum(self.probs[k - 1 :])


@dataclass(frozen=True)
class RiceApprox:
    """Approximation ``Pr[W = a] ~ central * (1 + fluctuation)``.

    ``error_bound`` is the proven bound on ``|Pr[W = a] - central|``.
    ``truncation_residual`` bounds the absolute error from cutting the
    oscillating series at ``truncation_k`` terms.
    """

    n: int
    a: int
    central: float
    error_bound: float
    fluctuation: float
    truncation_k: int
    truncation_residual: float

    @property
    def value(self) -> float:
        return self.central * (1.0 + self.fluctuation)


# -- sampling -----------------------------------------------------------------


def sample_geometric(param: GeoParam | float, uniform: float) -> int:
    """Inverse-CDF draw from ``Geo(p)`` given one uniform in ``(0, 1)``."""
    param = _param(param)
    if not (0.0 < uniform < 1.0):
        raise ValueError(f"uniform must lie strictly inside (0, 1), got {uniform!r}")
    return max(1, math.ceil(math.log(uniform) / param.log_q))


def geometric_variates(param: GeoParam | float, rng: np.random.Generator, size) -> np.ndarray:
    """Vectorised :func:`sample_geometric` driven by ``rng``."""
    param = _param(param)
    u = 1.0 - rng.random(size)  # (0, 1]
    k = np.ceil(np.log(u) / param.log_q)
    return np.maximum(k, 1).astype(np.int64)


def max_geometric_variates(
    n: int, param: GeoParam | float, rng: np.random.Generator, size
) -> np.ndarray:
    """Draws from ``MGeo(n, p)`` by inverting ``Pr[M <= k] = (1 - q^k)^n``."""
    param = _param(param)
    u = 1.0 - rng.random(size)
    # smallest k with 1 - q^k >= u^(1/n)
    k = np.ceil(np.log(-np.expm1(np.log(u) / n)) / param.log_q)
    return np.maximum(k, 1).astype(np.int64)


# -- the maximum --------------------------------------------------------------


def max_geo_tail_bound(
    n: int, param: GeoParam | float, C: float, integer_safe: bool = False
) -> tuple[float, float]:
    """Return ``(threshold, bound)`` for ``Pr[M > threshold]``.

    ``threshold = C ln(n) / ln(Q)`` and ``bound = n^(1 - C)``. That bound comes
    from ``Pr[M > k] <= n q^k``, which only holds for integer ``k``. ``M`` is an
    integer, so for a fractional threshold ``Pr[M > t] = Pr[M > floor(t)]`` can
    exceed ``n^(1 - C)`` by up to a factor ``1/q``. Pass ``integer_safe=True``
    to get the valid bound ``n q^floor(t)`` instead.
    """
    param = _param(param)
    if n < 2:
        raise ValueError("n must be at least 2")
    if C <= 1:
        raise ValueError("C must exceed 1")
    threshold = C * math.log(n) / param.log_Q
    if integer_safe:
        return threshold, min(1.0, n * math.exp(math.floor(threshold) * param.log_q))
    return threshold, float(n) ** (1.0 - C)


def max_tail_exact(n: int, param: GeoParam | float, threshold: float) -> float:
    """``Pr[M > threshold] = 1 - (1 - q^floor(threshold))^n``."""
    param = _param(param)
    k = max(0, math.floor(threshold))
    if k == 0:
        return 1.0
    return -math.expm1(n * math.log1p(-math.exp(k * param.log_q)))


def harmonic_asymptotic(n: int) -> float:
    """``ln n + gamma + 1/(2n) - 1/(12n^2) + 1/(120n^4)``."""
    inv = 1.0 / n
    inv2 = inv * inv
    return math.log(n) + EULER_GAMMA + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0


def harmonic(n: int) -> float:
    """``H_n``: exact partial sum up to ``10**6``, asymptotic expansion beyond."""
    if n < 1:
        raise ValueError("n must be positive")
    if n <= _HARMONIC_EXACT_MAX:
        return math.fsum(1.0 / np.arange(n, 0, -1, dtype=np.float64))
    return harmonic_asymptotic(n)


def expected_max_approx(n: int, param: GeoParam | float) -> float:
    """``1/2 + H_n / ln(Q)``, dropping the periodic term and the ``O(1/n)`` remainder."""
    param = _param(param)
    if n < 1:
        raise ValueError("n must be positive")
    return 0.5 + harmonic(n) / param.log_Q


def expected_max_exact(n: int, param: GeoParam | float, tol: float = 1e-14) -> float:
    """``E[M] = sum_{k>=0} Pr[M > k] = sum_{k>=0} 1 - (1 - q^k)^n``.

    Summation stops once the remaining tail, bounded by ``n q^k / p``, drops
    below ``tol``.
    """
    param = _param(param)
    if n < 1:
        raise ValueError("n must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    parts = []
    start = 0
    while True:
        k = np.arange(start, start + _SERIES_CHUNK, dtype=np.float64)
        qk = np.exp(k * param.log_q)
        parts.append(-np.expm1(n * np.log1p(-qk[qk < 1.0])))
        if k[0] == 0:
            parts.append(np.ones(1))
        if n * qk[-1] / param.p < tol:
            break
        start += _SERIES_CHUNK
    return math.fsum(np.concatenate(parts))


def rounds_required(
    n: int, param: GeoParam | float, failure_exponent: float = 20.0
) -> tuple[int, int]:
    """Slots needed by one LGE phase and the matching top digit index ``L``.

    Returns ``(slots, L)`` with ``slots = 2 * ceil(log_3((ln n + ln 10^e) / ln Q))``
    and ``L = slots // 2 - 1``, so keys carry ``L + 1`` base-3 digits.
    """
    param = _param(param)
    if n < 2:
        raise ValueError("n must be at least 2")
    if failure_exponent <= 0:
        raise ValueError("failure_exponent must be positive")
    x = (math.log(n) + failure_exponent * math.log(10.0)) / param.log_Q
    digits = 1
    while 3**digits < x:
        digits += 1
    return 2 * digits, digits - 1


# -- survivor count -----------------------------------------------------------


def _check_na(n: int, a: int) -> None:
    if n < 1:
        raise ValueError("n must be positive")
    if not 1 <= a <= n:
        raise ValueError(f"a must lie in [1, n], got a={a}, n={n}")


def survivor_pmf_alternating(
    n: int,
    param: GeoParam | float,
    a: int,
    exact: bool = False,
    max_amplification: float = CANCELLATION_LIMIT,
) -> float:
    """``C(n,a) p^a sum_b C(n-a,b) (-1)^b / (1 - q^(a+b))``.

    With ``exact=True`` the sum is carried out over rationals, taking the
    binary value of ``p`` as exact, and no precision is lost. In floating point
    a :class:`CancellationError` is raised when the largest term exceeds the
    result by more than ``max_amplification``.
    """
    param = _param(param)
    _check_na(n, a)
    if n == 1:
        return 1.0
    m = n - a
    if exact:
        p = Fraction(param.p)
        q = 1 - p
        s = sum(
            Fraction(math.comb(m, b) * (-1) ** b) / (1 - q ** (a + b)) for b in range(m + 1)
        )
        return float(math.comb(n, a) * p**a * s)

    try:
        terms = [
            math.comb(m, b) * (-1) ** b / -math.expm1((a + b) * param.log_q)
            for b in range(m + 1)
        ]
        s = math.fsum(terms)
        biggest = max(abs(t) for t in terms)
        scale = math.comb(n, a) * param.p**a
    except OverflowError as exc:
        raise CancellationError(f"binomial overflow at n={n}", math.inf) from exc
    amplification = biggest / abs(s) if s != 0.0 else math.inf
    if amplification > max_amplification:
        raise CancellationError(
            f"alternating sum for n={n}, a={a}, p={param.p} amplifies rounding "
            f"by {amplification:.3g}",
            amplification,
        )
    return scale * s


def _series_table(n: int, param: GeoParam, a: np.ndarray, tol: float) -> np.ndarray:
    """Row-wise sums of ``C(n,a) p^a q^(ka) (1 - q^k)^(n-a)`` over ``k >= 0``."""
    a = np.asarray(a, dtype=np.float64)
    log_q = param.log_q
    log_prefix = np.array(
        [_log_binom(n, int(ai)) for ai in a]
    ) + a * math.log(param.p)
    log_tail_factor = -np.log(-np.expm1(a * log_q))
    m = n - a
    # terms until the slowest row's envelope reaches tol, assuming the sum ~ its prefix
    a_min = float(a.min())
    width = math.ceil((-math.log(tol) + log_tail_factor.max()) / (a_min * param.log_Q)) + 8
    width = max(1, min(width, 4_000_000 // len(a)))
    parts: list[np.ndarray] = []
    acc = np.zeros(len(a))
    start = 0
    while True:
        k = np.arange(start, start + width, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_rest = np.log1p(-np.exp(k * log_q))
            # 0 * log(0) at k = 0, a = n is the empty product 1
            rest = np.where(m[:, None] > 0, m[:, None] * log_rest[None, :], 0.0)
        exponent = log_prefix[:, None] + np.outer(a, k) * log_q + rest
        chunk = np.exp(exponent)
        parts.append(chunk)
        acc += chunk.sum(axis=1)
        start += width
        envelope = np.exp(log_prefix + start * a * log_q + log_tail_factor)
        if np.all((envelope < tol * acc) | (envelope == 0.0)):
            break
        width = min(2 * width, max(1, 4_000_000 // len(a)))
    # nonnegative terms: pairwise summation is accurate to a few ulps
    return np.concatenate(parts, axis=1).sum(axis=1)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def survivor_pmf_series(
    n: int, param: GeoParam | float, a: int, tol: float = _SERIES_TOL
) -> float:
    """``C(n,a) p^a sum_{k>=0} q^(ka) (1 - q^k)^(n-a)``, all terms nonnegative.

    The ``k``-th term is the probability that exactly ``a`` variates equal
    ``k + 1`` and the rest are smaller. Summation stops once the geometric
    envelope ``q^(ka) / (1 - q^a)`` of the remaining tail is below ``tol``
    times the running sum.
    """
    param = _param(param)
    _check_na(n, a)
    if n == 1:
        return 1.0
    if tol <= 0:
        raise ValueError("tol must be positive")
    return float(_series_table(n, param, np.array([a]), tol)[0])


def survivor_pmf(
    n: int, param: GeoParam | float, method: Literal["series", "alternating"] = "series"
) -> SurvivorPmf:
    """Full table ``Pr[W = a]`` for ``a = 1..n``."""
    param = _param(param)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        probs = np.ones(1)
    elif method == "series":
        # rows with larger a converge geometrically faster; block them by octave
        probs = np.concatenate([
            _series_table(n, param, np.arange(lo, min(2 * lo, n + 1)), _SERIES_TOL)
            for lo in (2**i for i in range(n.bit_length()))
            if lo <= n
        ])
    elif method == "alternating":
        probs = np.array([survivor_pmf_alternating(n, param, a) for a in range(1, n + 1)])
    else:
        raise ValueError(f"unknown method {method!r}")
    return SurvivorPmf(n=n, param=param, probs=probs, method=method)


def expected_survivors(n: int, param: GeoParam | float) -> float:
    """``E[W] = (n p / q) sum_b C(n-1,b) (-1)^b / (1 - q^(b+1))``.

    The alternating form is used while it keeps roughly eleven significant
    digits. Otherwise the mean of the series-evaluated pmf is returned.
    """
    param = _param(param)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1.0
    try:
        terms = [
            math.comb(n - 1, b) * (-1) ** b / -math.expm1((b + 1) * param.log_q)
            for b in range(n)
        ]
        s = math.fsum(terms)
        amplification = max(abs(t) for t in terms) / abs(s)
    except (OverflowError, ZeroDivisionError):
        amplification = math.inf
    if amplification <= _EXPECTATION_CANCELLATION_LIMIT:
        return n * param.p / param.q * s
    return survivor_pmf(n, param).mean()


# -- asymptotics and bounds ---------------------------------------------------


def _rice_bound(param: GeoParam, a: int) -> float:
    return (a + 1) ** 2 / (12 * a) * param.p**a * param.log_Q


def pmf_rice_approx(
    n: int, param: GeoParam | float, a: int, truncation_k: int = 20
) -> RiceApprox:
    """Central value, proven error bound and truncated oscillating correction.

    ``fluctuation = 2 sum_{k=1..K} Re prod_{j=a..n} (1 - i c_k / j)^(-1)`` with
    ``c_k = 2 k pi / ln q``, so that ``Pr[W = a] = central * (1 + fluctuation)``
    up to the truncation residual.
    """
    param = _param(param)
    if not 0 < a < n:
        raise ValueError(f"requires 0 < a < n, got a={a}, n={n}")
    if truncation_k < 1:
        raise ValueError("truncation_k must be positive")
    central = param.p**a / (a * param.log_Q)
    k = np.arange(1, truncation_k + 1, dtype=np.float64)[:, None]
    j = np.arange(a, n + 1, dtype=np.float64)[None, :]
    c = 2.0 * math.pi * k / param.log_q
    log_prod = np.log1p(-1j * c / j).sum(axis=1)
    fluctuation = 2.0 * float(np.exp(-log_prod).real.sum())
    # |k-th term| <= (a+1)^2 ln(q)^2 / (4 pi^2 k^2) and sum_{k>K} 1/k^2 < 1/K
    residual = central * (a + 1) ** 2 * param.log_Q**2 / (2 * math.pi**2 * truncation_k)
    return RiceApprox(
        n=n,
        a=a,
        central=central,
        error_bound=_rice_bound(param, a),
        fluctuation=fluctuation,
        truncation_k=truncation_k,
        truncation_residual=residual,
    )


def phi_bound(param: GeoParam | float, a: int) -> float:
    """Upper envelope on ``Pr[W = a]`` valid for every ``n > a``."""
    param = _param(param)
    if a < 1:
        raise ValueError("a must be positive")
    return param.p**a / (a * param.log_Q) + _rice_bound(param, a)


def survivor_tail_bound(param: GeoParam | float, k: int) -> float:
    """``Pr[W >= k] < phi(k) / (1 - 2p)``; only meaningful for ``p < 1/2``."""
    param = _param(param)
    if param.p >= 0.5:
        raise ValueError(f"bound inapplicable: requires p < 1/2, got p={param.p}")
    return phi_bound(param, k) / (1.0 - 2.0 * param.p)
