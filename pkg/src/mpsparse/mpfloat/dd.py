"""Double-double arithmetic on ``(hi, lo)`` tuples.

Multiplication is the "sloppy" variant: one TwoProd on the leading
components, plain binary64 arithmetic on the rest and a final QuickTwoSum.
Addition applies TwoSum to both component pairs, which keeps its relative
error near ``3 * 2^-106`` even under cancellation; the cheaper one-TwoSum
form is kept as :func:`dd_add_sloppy`.
"""

import math

from numba import njit

from .eft import quick_two_sum, two_prod_fma, two_sum


@njit(cache=True)
def dd_add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


@njit(cache=True)
def dd_add_sloppy(x, y):
    """Error bounded by ``2^-104 (|x| + |y|)``, not by ``|x + y|``."""
    s, e = two_sum(x[0], y[0])
    w = x[1] + y[1]
    e = e + w
    return quick_two_sum(s, e)


@njit(cache=True)
def dd_neg(x):
    return -x[0], -x[1]


@njit(cache=True)
def dd_sub(x, y):
    return dd_add(x, (-y[0], -y[1]))


@njit(cache=True)
def dd_mul(x, y):
    p1, p2 = two_prod_fma(x[0], y[0])
    w1 = x[0] * y[1]
    w2 = x[1] * y[0]
    w3 = w1 + w2
    p2 = p2 + w3
    return quick_two_sum(p1, p2)


@njit(cache=True)
def dd_mul_d(x, y):
    """Double-double times binary64."""
    p1, p2 = two_prod_fma(x[0], y)
    p2 = p2 + x[1] * y
    return quick_two_sum(p1, p2)


@njit(cache=True)
def dd_div(x, y):
    q1 = x[0] / y[0]
    r = dd_mul_d(y, q1)
    s1, s2 = two_sum(x[0], -r[0])
    s2 -= r[1]
    s2 += x[1]
    q2 = (s1 + s2) / y[0]
    return quick_two_sum(q1, q2)


@njit(cache=True)
def dd_sqrt(x):
    """Square root by one Newton step on ``1/sqrt(x)`` (Karp's trick)."""
    if x[0] == 0.0:
        return 0.0, 0.0
    if x[0] < 0.0:
        return math.nan, math.nan
    r = 1.0 / math.sqrt(x[0])
    ax = x[0] * r
    sq = two_prod_fma(ax, ax)
    diff = dd_sub(x, sq)
    return two_sum(ax, diff[0] * (r * 0.5))
