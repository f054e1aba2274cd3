"""F-distribution CDF and quantile via the regularized incomplete beta function."""
import math

from .errors import InputError

_EPS = 1e-16
_TINY = 1e-300


def _betacf(a, b, x, max_iter=500):
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
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


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise InputError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the continued fraction converges fast only on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_cdf(x, dfn, dfd):
    if dfn <= 0 or dfd <= 0:
        raise InputError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return betainc(dfn / 2.0, dfd / 2.0, dfn * x / (dfn * x + dfd))


def _solve_betainc(a, b, target):
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if betainc(a, b, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def f_ppf(q, dfn, dfd):
    """Quantile of the F(dfn, dfd) distribution.

    Solves I_y(dfn/2, dfd/2) = q by bisection and maps y to
    x = dfd * y / (dfn * (1 - y)). Upper quantiles bisect on 1 - y through
    the symmetry I_y(a, b) = 1 - I_{1-y}(b, a), which keeps x accurate when
    y is close to 1.
    """
    if not 0.0 < q < 1.0:
        raise InputError(f"quantile level must be in (0, 1), got {q}")
    if dfn <= 0 or dfd <= 0:
        raise InputError("degrees of freedom must be positive")
    a, b = dfn / 2.0, dfd / 2.0
    if q <= 0.5:
        y = _solve_betainc(a, b, q)
        return dfd * y / (dfn * (1.0 - y))
    w = _solve_betainc(b, a, 1.0 - q)
    return dfd * (1.0 - w) / (dfn * w)
