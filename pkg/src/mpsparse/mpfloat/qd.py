"""Quad-double and triple-double arithmetic.

QD addition and multiplication follow the sloppy quad-double algorithms.
Triple-double add/mul are computed by zero-extending both operands to four
components, running the QD routine and renormalizing back to three
components.  The mixed products ``qd_mul_d`` / ``td_mul_d`` have their own
shorter operation chains.
"""

import math

from numba import njit

from .eft import (renorm4_3, renorm5_4, three_sum, three_sum2, two_prod_fma,
                  two_sum)


@njit(cache=True)
def qd_add(x, y):
    s0, t0 = two_sum(x[0], y[0])
    s1, t1 = two_sum(x[1], y[1])
    s2, t2 = two_sum(x[2], y[2])
    s3, t3 = two_sum(x[3], y[3])

    s1, t0 = two_sum(s1, t0)
    s2, t0, t1 = three_sum(s2, t0, t1)
    s3, t0 = three_sum2(s3, t0, t2)
    t0 = t0 + t1 + t3

    return renorm5_4(s0, s1, s2, s3, t0)


@njit(cache=True)
def qd_neg(x):
    return -x[0], -x[1], -x[2], -x[3]


@njit(cache=True)
def qd_sub(x, y):
    return qd_add(x, (-y[0], -y[1], -y[2], -y[3]))


@njit(cache=True)
def qd_mul(x, y):
    p0, q0 = two_prod_fma(x[0], y[0])

    p1, q1 = two_prod_fma(x[0], y[1])
    p2, q2 = two_prod_fma(x[1], y[0])

    p3, q3 = two_prod_fma(x[0], y[2])
    p4, q4 = two_prod_fma(x[1], y[1])
    p5, q5 = two_prod_fma(x[2], y[0])

    p1, p2, q0 = three_sum(p1, p2, q0)

    # six-three sum of (p2, q1, q2) and (p3, p4, p5)
    p2, q1, q2 = three_sum(p2, q1, q2)
    p3, p4, p5 = three_sum(p3, p4, p5)
    s0, t0 = two_sum(p2, p3)
    s1, t1 = two_sum(q1, p4)
    s2 = q2 + p5
    s1, t0 = two_sum(s1, t0)
    s2 += t0 + t1

    # third-order terms
    s1 += (x[0] * y[3] + x[1] * y[2] + x[2] * y[1] + x[3] * y[0]
           + q0 + q3 + q4 + q5)
    return renorm5_4(p0, p1, s0, s1, s2)


@njit(cache=True)
def qd_mul_d(x, y):
    """Quad-double times binary64."""
    p0, q0 = two_prod_fma(x[0], y)
    p1, q1 = two_prod_fma(x[1], y)
    p2, q2 = two_prod_fma(x[2], y)
    p3 = x[3] * y
    s0 = p0
    s1, s2 = two_sum(q0, p1)
    s2, q1, p2 = three_sum(s2, q1, p2)
    q1, p2 = three_sum2(q1, p2, p3)
    s3 = q1
    s4 = q2 + p2
    return renorm5_4(s0, s1, s2, s3, s4)


@njit(cache=True)
def qd_div(x, y):
    """Long division producing five quotient terms."""
    q0 = x[0] / y[0]
    r = qd_sub(x, qd_mul_d(y, q0))
    q1 = r[0] / y[0]
    r = qd_sub(r, qd_mul_d(y, q1))
    q2 = r[0] / y[0]
    r = qd_sub(r, qd_mul_d(y, q2))
    q3 = r[0] / y[0]
    r = qd_sub(r, qd_mul_d(y, q3))
    q4 = r[0] / y[0]
    return renorm5_4(q0, q1, q2, q3, q4)


@njit(cache=True)
def qd_sqrt(x):
    """Newton iteration on ``1/sqrt(x)``, three steps, then one product."""
    if x[0] == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    if x[0] < 0.0:
        return math.nan, math.nan, math.nan, math.nan
    r = (1.0 / math.sqrt(x[0]), 0.0, 0.0, 0.0)
    h = (x[0] * 0.5, x[1] * 0.5, x[2] * 0.5, x[3] * 0.5)
    half = (0.5, 0.0, 0.0, 0.0)
    for _ in range(3):
        t = qd_sub(half, qd_mul(h, qd_mul(r, r)))
        r = qd_add(r, qd_mul(t, r))
    return qd_mul(r, x)


@njit(cache=True)
def td_add(x, y):
    r = qd_add((x[0], x[1], x[2], 0.0), (y[0], y[1], y[2], 0.0))
    return renorm4_3(r[0], r[1], r[2], r[3])


@njit(cache=True)
def td_neg(x):
    return -x[0], -x[1], -x[2]


@njit(cache=True)
def td_sub(x, y):
    return td_add(x, (-y[0], -y[1], -y[2]))


@njit(cache=True)
def td_mul(x, y):
    r = qd_mul((x[0], x[1], x[2], 0.0), (y[0], y[1], y[2], 0.0))
    return renorm4_3(r[0], r[1], r[2], r[3])


@njit(cache=True)
def td_mul_d(x, y):
    """Triple-double times binary64."""
    p0, q0 = two_prod_fma(x[0], y)
    p1, q1 = two_prod_fma(x[1], y)
    p2, q2 = two_prod_fma(x[2], y)
    s0 = p0
    s1, s2 = two_sum(q0, p1)
    s2, q1, p2 = three_sum(s2, q1, p2)
    s3 = q2 + p2
    return renorm4_3(s0, s1, s2, s3)


@njit(cache=True)
def td_div(x, y):
    q0 = x[0] / y[0]
    r = td_sub(x, td_mul_d(y, q0))
    q1 = r[0] / y[0]
    r = td_sub(r, td_mul_d(y, q1))
    q2 = r[0] / y[0]
    r = td_sub(r, td_mul_d(y, q2))
    q3 = r[0] / y[0]
    return renorm4_3(q0, q1, q2, q3)


@njit(cache=True)
def td_sqrt(x):
    if x[0] == 0.0:
        return 0.0, 0.0, 0.0
    if x[0] < 0.0:
        return math.nan, math.nan, math.nan
    # Heron iteration from the binary64 root: exact roots stay exact
    s = (math.sqrt(x[0]), 0.0, 0.0)
    for _ in range(2):
        s = td_mul_d(td_add(s, td_div(x, s)), 0.5)
    return s
