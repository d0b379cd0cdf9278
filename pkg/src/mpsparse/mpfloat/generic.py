"""Component-count dispatch over padded 4-tuples.

Kernels and vector routines carry every value as a 4-tuple and pass the
active component count ``k`` (1 = binary64, 2 = DD, 3 = TD, 4 = QD) at run
time; unused slots are zero.  The branch on ``k`` is uniform across a kernel
call so it predicts perfectly.
"""

import math

from numba import njit

from .dd import dd_add, dd_div, dd_mul, dd_mul_d, dd_sqrt
from .qd import (qd_add, qd_div, qd_mul, qd_mul_d, qd_sqrt, td_add, td_div,
                 td_mul, td_mul_d, td_sqrt)

ZERO4 = (0.0, 0.0, 0.0, 0.0)


@njit(cache=True)
def mp_add(k, a, b):
    if k == 2:
        r = dd_add((a[0], a[1]), (b[0], b[1]))
        return r[0], r[1], 0.0, 0.0
    if k == 3:
        r = td_add((a[0], a[1], a[2]), (b[0], b[1], b[2]))
        return r[0], r[1], r[2], 0.0
    if k == 4:
        return qd_add(a, b)
    return a[0] + b[0], 0.0, 0.0, 0.0


@njit(cache=True)
def mp_neg(a):
    return -a[0], -a[1], -a[2], -a[3]


@njit(cache=True)
def mp_sub(k, a, b):
    return mp_add(k, a, mp_neg(b))


@njit(cache=True)
def mp_mul(k, a, b):
    if k == 2:
        r = dd_mul((a[0], a[1]), (b[0], b[1]))
        return r[0], r[1], 0.0, 0.0
    if k == 3:
        r = td_mul((a[0], a[1], a[2]), (b[0], b[1], b[2]))
        return r[0], r[1], r[2], 0.0
    if k == 4:
        return qd_mul(a, b)
    return a[0] * b[0], 0.0, 0.0, 0.0


@njit(cache=True)
def mp_mul_d(k, a, d):
    """Multiply a k-component value by a binary64 scalar ``d``."""
    if k == 2:
        r = dd_mul_d((a[0], a[1]), d)
        return r[0], r[1], 0.0, 0.0
    if k == 3:
        r = td_mul_d((a[0], a[1], a[2]), d)
        return r[0], r[1], r[2], 0.0
    if k == 4:
        return qd_mul_d(a, d)
    return a[0] * d, 0.0, 0.0, 0.0


@njit(cache=True)
def mp_div(k, a, b):
    if k == 2:
        r = dd_div((a[0], a[1]), (b[0], b[1]))
        return r[0], r[1], 0.0, 0.0
    if k == 3:
        r = td_div((a[0], a[1], a[2]), (b[0], b[1], b[2]))
        return r[0], r[1], r[2], 0.0
    if k == 4:
        return qd_div(a, b)
    return a[0] / b[0], 0.0, 0.0, 0.0


@njit(cache=True)
def mp_sqrt(k, a):
    if k == 2:
        r = dd_sqrt((a[0], a[1]))
        return r[0], r[1], 0.0, 0.0
    if k == 3:
        r = td_sqrt((a[0], a[1], a[2]))
        return r[0], r[1], r[2], 0.0
    if k == 4:
        return qd_sqrt(a)
    if a[0] < 0.0:
        return math.nan, 0.0, 0.0, 0.0
    return math.sqrt(a[0]), 0.0, 0.0, 0.0


@njit(cache=True)
def load(arr, k, j):
    """Read column ``j`` of a ``(k, n)`` component-major array as a 4-tuple."""
    c1 = arr[1, j] if k > 1 else 0.0
    c2 = arr[2, j] if k > 2 else 0.0
    c3 = arr[3, j] if k > 3 else 0.0
    return arr[0, j], c1, c2, c3


@njit(cache=True)
def store(arr, k, j, v):
    arr[0, j] = v[0]
    if k > 1:
        arr[1, j] = v[1]
    if k > 2:
        arr[2, j] = v[2]
    if k > 3:
        arr[3, j] = v[3]
