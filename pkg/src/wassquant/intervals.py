"""Exact Clopper-Pearson binomial confidence intervals, one per region.

The defining tail equations are inverted by bisection on the exact
binomial tail. For moderate N the tail is evaluated as a log-sum-exp
over log-gamma binomial coefficients; above ``_BETAINC_SWITCH_N`` the
O(N) summation is replaced by the regularized-incomplete-beta identity
evaluated with a Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BISECTION_TOL = 1e-12
MAX_BISECTIONS = 200
_BETAINC_SWITCH_N = 100_000

_LOG_COEF_CACHE: dict[int, np.ndarray] = {}


def _log_binom_coefs(n: int) -> np.ndarray:
    """log C(n, j) for j = 0..n, cached per n."""
    coefs = _LOG_COEF_CACHE.get(n)
    if coefs is None:
        j = np.arange(n + 1, dtype=float)
        coefs = (
            math.lgamma(n + 1)
            - np.array([math.lgamma(v + 1) for v in j])
            - np.array([math.lgamma(n - v + 1) for v in j])
        )
        _LOG_COEF_CACHE[n] = coefs
    return coefs


def _logsumexp(a: np.ndarray) -> float:
    m = a.max()
    if m == -math.inf:
        return -math.inf
    return float(m + math.log(np.exp(a - m).sum()))


def _betainc_cf(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) via modified Lentz continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    # Use the symmetry relation in the regime where the fraction converges fast.
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - _betainc_cf(b, a, 1.0 - x)
    log_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - math.log(a)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    )
    tiny = 1e-300
    c = 1.0
    d = 1.0 - (a + b) * x / (a + 1.0)
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return math.exp(log_front) * h


def binom_tail_upper(count: int, n: int, p: float) -> float:
    """P(X >= count) for X ~ Binomial(n, p); equals 1 when count = 0."""
    if count <= 0:
        return 1.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    if n > _BETAINC_SWITCH_N:
        return _betainc_cf(count, n - count + 1, p)
    j = np.arange(count, n + 1, dtype=float)
    logs = _log_binom_coefs(n)[count:] + j * math.log(p) + (n - j) * math.log1p(-p)
    return min(1.0, math.exp(_logsumexp(logs)))


def binom_tail_lower(count: int, n: int, p: float) -> float:
    """P(X <= count) for X ~ Binomial(n, p); equals 1 when count = n."""
    if count >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    if n > _BETAINC_SWITCH_N:
        return 1.0 - _betainc_cf(count + 1, n - count, p)
    j = np.arange(0, count + 1, dtype=float)
    logs = _log_binom_coefs(n)[: count + 1] + j * math.log(p) + (n - j) * math.log1p(-p)
    return min(1.0, math.exp(_logsumexp(logs)))


def _bisect(f, lo: float, hi: float) -> float:
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if f(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo < BISECTION_TOL:
            break
    return 0.5 * (lo + hi)


def _validate(count: int, n: int, alpha: float) -> None:
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if not 0 <= count <= n:
        raise ValueError(f"count {count} outside [0, {n}]")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def cp_lower(count: int, n: int, alpha: float) -> float:
    """Lower Clopper-Pearson limit: P(X >= count | p) = alpha, or 0 when count = 0."""
    _validate(count, n, alpha)
    if count == 0:
        return 0.0
    if count == n:
        # Tail collapses to p**n = alpha.
        return alpha ** (1.0 / n)
    return _bisect(lambda p: binom_tail_upper(count, n, p) >= alpha, 0.0, 1.0)


def cp_upper(count: int, n: int, alpha: float) -> float:
    """Upper Clopper-Pearson limit: P(X <= count | p) = alpha, or 1 when count = n."""
    _validate(count, n, alpha)
    if count == n:
        return 1.0
    if count == 0:
        # Tail collapses to (1 - p)**n = alpha.
        return 1.0 - alpha ** (1.0 / n)
    return _bisect(lambda p: binom_tail_lower(count, n, p) <= alpha, 0.0, 1.0)


@dataclass(frozen=True)
class ProbabilityBox:
    """Per-region probability intervals [p_l, p_u] at global confidence 1 - beta."""

    lower: np.ndarray
    upper: np.ndarray
    per_region_alpha: float

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        up = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != up.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lo < -1e-15) or np.any(up > 1.0 + 1e-15) or np.any(lo > up + 1e-15):
            raise ValueError("box must satisfy 0 <= lower <= upper <= 1")
        lo.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def size(self) -> int:
        return self.lower.shape[0]

    def contains(self, weights, atol: float = 1e-12) -> bool:
        w = np.asarray(weights, dtype=float).ravel()
        return bool(
            np.all(w >= self.lower - atol) and np.all(w <= self.upper + atol)
        )

    def widths(self) -> np.ndarray:
        return self.upper - self.lower


def build_probability_box(counts, n: int, beta: float) -> ProbabilityBox:
    """Clopper-Pearson box over all regions at per-region level beta / (2M)."""
    counts = np.asarray(counts)
    if not np.issubdtype(counts.dtype, np.integer):
        rounded = np.rint(counts)
        if np.any(np.abs(counts - rounded) > 1e-9):
            raise ValueError("counts must be integers")
        counts = rounded.astype(int)
    if counts.sum() != n:
        raise ValueError(f"counts sum to {counts.sum()}, expected {n}")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    m = counts.shape[0]
    alpha = beta / (2.0 * m)
    cache: dict[int, tuple[float, float]] = {}
    lower = np.empty(m)
    upper = np.empty(m)
    for i, c in enumerate(counts):
        c = int(c)
        if c not in cache:
            cache[c] = (cp_lower(c, n, alpha), cp_upper(c, n, alpha))
        lower[i], upper[i] = cache[c]
    box = ProbabilityBox(lower, upper, alpha)
    if not box.contains(counts / n):
        raise AssertionError("empirical weights fell outside their own box")
    return box
