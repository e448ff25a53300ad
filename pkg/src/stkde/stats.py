"""One-way ANOVA and Welch's t-test with in-repo p-values.

p-values come from the regularized incomplete beta function, evaluated by
the modified Lentz continued fraction.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence, Tuple

from .domain import ValidationError


class AnovaResult(NamedTuple):
    statistic: float
    pvalue: float
    df_between: int
    df_within: int


class TTestResult(NamedTuple):
    statistic: float
    pvalue: float
    df: float


_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the continued fraction converges fast only below the mean of the beta law
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail probability of the F distribution."""
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


def t_two_sided(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


def _mean_var(xs: Sequence[float]) -> Tuple[float, float, int]:
    n = len(xs)
    m = math.fsum(xs) / n
    v = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return m, v, n


def anova_one_way(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classical one-way ANOVA (F = MSB / MSW)."""
    if len(groups) < 2 or any(len(g) < 2 for g in groups):
        raise ValidationError("ANOVA needs at least two groups of at least two values")
    groups = [[float(v) for v in g] for g in groups]
    k = len(groups)
    n_total = sum(len(g) for g in groups)
    grand = math.fsum(v for g in groups for v in g) / n_total
    means = [math.fsum(g) / len(g) for g in groups]
    ssb = math.fsum(len(g) * (m - grand) ** 2 for g, m in zip(groups, means))
    ssw = math.fsum((v - m) ** 2 for g, m in zip(groups, means) for v in g)
    df1, df2 = k - 1, n_total - k
    if ssw == 0.0:
        if ssb == 0.0:
            return AnovaResult(0.0, 1.0, df1, df2)
        return AnovaResult(math.inf, 0.0, df1, df2)
    f = (ssb / df1) / (ssw / df2)
    return AnovaResult(f, f_sf(f, df1, df2), df1, df2)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t-test with a two-sided p-value."""
    if len(a) < 2 or len(b) < 2:
        raise ValidationError("t-test needs at least two values per sample")
    ma, va, na = _mean_var([float(v) for v in a])
    mb, vb, nb = _mean_var([float(v) for v in b])
    sa, sb = va / na, vb / nb
    se2 = sa + sb
    if se2 == 0.0:
        if ma == mb:
            return TTestResult(0.0, 1.0, float(na + nb - 2))
        return TTestResult(math.copysign(math.inf, ma - mb), 0.0, float(na + nb - 2))
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    return TTestResult(t, t_two_sided(t, df), df)
