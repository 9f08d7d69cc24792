"""Welch's unequal-variance t-test from summary statistics.

Implemented from scratch (including the regularized incomplete beta behind
the Student-t tail) so the package has no runtime dependency on a stats
library; the test suite checks every piece against an independent reference
implementation.
"""

from __future__ import annotations

import math

from .core import ContractError

_CF_MAX_ITER = 300
_CF_EPS = 3e-16
_CF_TINY = 1e-300


def welch_statistic(
    mean_a: float, var_a: float, n_a: int, mean_b: float, var_b: float, n_b: int
) -> float:
    """Welch t statistic for two summarized samples.

    When both standard errors vanish the statistic degenerates: equal means
    give 0, differing means give a signed infinity (always significant).
    """
    if n_a < 1 or n_b < 1:
        raise ContractError("welch_statistic needs at least one value per side")
    pooled = var_a / n_a + var_b / n_b
    diff = mean_a - mean_b
    if pooled <= 0.0:
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)
    return diff / math.sqrt(pooled)


def welch_satterthwaite_df(var_a: float, n_a: int, var_b: float, n_b: int) -> float:
    """Welch-Satterthwaite effective degrees of freedom.

    Both samples need n >= 2.  Degenerate zero-variance inputs fall back to
    the pooled n_a + n_b - 2, which only matters alongside the infinite-t
    sentinel from :func:`welch_statistic`.
    """
    if n_a < 2 or n_b < 2:
        raise ContractError("welch_satterthwaite_df needs at least two values per side")
    sa = var_a / n_a
    sb = var_b / n_b
    denom = sa * sa / (n_a - 1) + sb * sb / (n_b - 1)
    if denom == 0.0:
        return float(n_a + n_b - 2)
    return (sa + sb) ** 2 / denom


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, evaluated by Lentz's method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ContractError("incomplete beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the representation that converges fastest on each side of the mode.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_pvalue(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0.0:
        raise ContractError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def welch_significant(t: float, df: float, alpha: float) -> bool:
    """Two-sided Welch test decision at level alpha (alpha 0 never fires)."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractError(f"alpha must lie in [0, 1], got {alpha}")
    return student_t_two_sided_pvalue(t, df) < alpha
