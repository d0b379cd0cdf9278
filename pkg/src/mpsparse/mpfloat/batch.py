"""Lane-batched multi-component arithmetic on component-major numpy arrays.

A batch of ``W`` values with ``K`` components is a ``(K, W)`` float64 array:
row ``j`` holds component ``j`` of every lane, which is the layout a 256-bit
SIMD register file sees (``W = 4``).  Each routine issues the same sequence of
IEEE operations as its scalar counterpart, lane-wise, so results are
bit-identical to the scalar path.  Data-dependent branches in the
renormalization are evaluated per lane with masks.

The functions accept any ``W``; :class:`LaneBatch` pins ``W = 4``.
"""

from __future__ import annotations

import numpy as np

from .eft import fma_ufunc

LANES = 4


class LaneBatch:
    """``LANES`` independent K-component values stored component-major."""

    __slots__ = ("components",)

    def __init__(self, components):
        arr = np.array(components, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != LANES or not 1 <= arr.shape[0] <= 4:
            raise ValueError(f"expected a (K, {LANES}) array with 1 <= K <= 4, got {arr.shape}")
        self.components = arr

    @classmethod
    def from_values(cls, values) -> "LaneBatch":
        """Build from ``LANES`` tuples (or MultiComponent values) of equal length."""
        rows = [tuple(v) for v in values]
        return cls(np.array(rows, dtype=np.float64).T)

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def lane(self, i: int) -> tuple:
        return tuple(float(c) for c in self.components[:, i])

    def lanes(self) -> list:
        return [self.lane(i) for i in range(LANES)]

    def __repr__(self) -> str:
        return f"LaneBatch(k={self.k}, lanes={self.lanes()!r})"


def _arr(x):
    return x.components if isinstance(x, LaneBatch) else np.asarray(x, dtype=np.float64)


def _wrap(like, out):
    return LaneBatch(out) if isinstance(like, LaneBatch) else out


# -- error-free transformations ------------------------------------------------

def batch_two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def batch_quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


def batch_two_prod(a, b):
    p = a * b
    return p, fma_ufunc(a, b, -p)


def batch_three_sum(a, b, c):
    t1, t2 = batch_two_sum(a, b)
    a, t3 = batch_two_sum(c, t1)
    b, c = batch_two_sum(t2, t3)
    return a, b, c


def batch_three_sum2(a, b, c):
    t1, t2 = batch_two_sum(a, b)
    a, t3 = batch_two_sum(c, t1)
    return a, t2 + t3


def _renorm(terms, nslots):
    """Renormalize ``len(terms)`` arrays into ``nslots`` non-overlapping ones."""
    c = list(terms)
    first = c[0]
    # bottom-up compression
    s0 = c[-1]
    for i in range(len(c) - 2, -1, -1):
        s0, c[i + 1] = batch_quick_two_sum(c[i], s0)
    c[0] = s0

    width = first.shape[0]
    lanes = np.arange(width)
    s = np.zeros((nslots, width))
    s[0] = c[0]
    s[1] = c[1]
    k = np.where(c[1] != 0.0, 1, 0)
    for term in c[2:]:
        cur = s[k, lanes]
        qs, e = batch_quick_two_sum(cur, term)
        last = k == nslots - 1
        s[k, lanes] = np.where(last, cur + term, qs)
        open_ = ~last
        s[k[open_] + 1, lanes[open_]] = e[open_]
        k = np.where(open_ & (e != 0.0), k + 1, k)

    inf = np.isinf(first)
    if inf.any():
        for j in range(nslots):
            s[j] = np.where(inf, terms[j], s[j])
    return s


# -- double-double -------------------------------------------------------------

def _dd_add(x, y):
    s, e = batch_two_sum(x[0], y[0])
    t, f = batch_two_sum(x[1], y[1])
    e = e + t
    s, e = batch_quick_two_sum(s, e)
    e = e + f
    return np.array(batch_quick_two_sum(s, e))


def _dd_mul(x, y):
    p1, p2 = batch_two_prod(x[0], y[0])
    w1 = x[0] * y[1]
    w2 = x[1] * y[0]
    w3 = w1 + w2
    p2 = p2 + w3
    return np.array(batch_quick_two_sum(p1, p2))


def _dd_mul_d(x, y):
    p1, p2 = batch_two_prod(x[0], y)
    p2 = p2 + x[1] * y
    return np.array(batch_quick_two_sum(p1, p2))


# -- quad-double ---------------------------------------------------------------

def _qd_add(x, y):
    s0, t0 = batch_two_sum(x[0], y[0])
    s1, t1 = batch_two_sum(x[1], y[1])
    s2, t2 = batch_two_sum(x[2], y[2])
    s3, t3 = batch_two_sum(x[3], y[3])
    s1, t0 = batch_two_sum(s1, t0)
    s2, t0, t1 = batch_three_sum(s2, t0, t1)
    s3, t0 = batch_three_sum2(s3, t0, t2)
    t0 = t0 + t1 + t3
    return _renorm((s0, s1, s2, s3, t0), 4)


def _qd_mul(x, y):
    p0, q0 = batch_two_prod(x[0], y[0])
    p1, q1 = batch_two_prod(x[0], y[1])
    p2, q2 = batch_two_prod(x[1], y[0])
    p3, q3 = batch_two_prod(x[0], y[2])
    p4, q4 = batch_two_prod(x[1], y[1])
    p5, q5 = batch_two_prod(x[2], y[0])

    p1, p2, q0 = batch_three_sum(p1, p2, q0)
    p2, q1, q2 = batch_three_sum(p2, q1, q2)
    p3, p4, p5 = batch_three_sum(p3, p4, p5)
    s0, t0 = batch_two_sum(p2, p3)
    s1, t1 = batch_two_sum(q1, p4)
    s2 = q2 + p5
    s1, t0 = batch_two_sum(s1, t0)
    s2 = s2 + (t0 + t1)

    s1 = s1 + (x[0] * y[3] + x[1] * y[2] + x[2] * y[1] + x[3] * y[0]
               + q0 + q3 + q4 + q5)
    return _renorm((p0, p1, s0, s1, s2), 4)


def _qd_mul_d(x, y):
    p0, q0 = batch_two_prod(x[0], y)
    p1, q1 = batch_two_prod(x[1], y)
    p2, q2 = batch_two_prod(x[2], y)
    p3 = x[3] * y
    s0 = p0
    s1, s2 = batch_two_sum(q0, p1)
    s2, q1, p2 = batch_three_sum(s2, q1, p2)
    q1, p2 = batch_three_sum2(q1, p2, p3)
    s3 = q1
    s4 = q2 + p2
    return _renorm((s0, s1, s2, s3, s4), 4)


# -- triple-double -------------------------------------------------------------

def _extend(x):
    return np.vstack([x, np.zeros_like(x[:1])])


def _td_add(x, y):
    r = _qd_add(_extend(x), _extend(y))
    return _renorm(tuple(r), 3)


def _td_mul(x, y):
    r = _qd_mul(_extend(x), _extend(y))
    return _renorm(tuple(r), 3)


def _td_mul_d(x, y):
    p0, q0 = batch_two_prod(x[0], y)
    p1, q1 = batch_two_prod(x[1], y)
    p2, q2 = batch_two_prod(x[2], y)
    s0 = p0
    s1, s2 = batch_two_sum(q0, p1)
    s2, q1, p2 = batch_three_sum(s2, q1, p2)
    s3 = q2 + p2
    return _renorm((s0, s1, s2, s3), 3)


# -- public lane-batched entry points -----------------------------------------

def _binary(fn, k):
    def op(x, y):
        xa, ya = _arr(x), _arr(y)
        if xa.shape[0] != k or ya.shape[0] != k:
            raise ValueError(f"expected {k}-component batches")
        return _wrap(x, fn(xa, ya))
    op.__name__ = fn.__name__.lstrip("_")
    return op


def _mixed(fn, k):
    def op(x, d):
        xa = _arr(x)
        if xa.shape[0] != k:
            raise ValueError(f"expected a {k}-component batch")
        return _wrap(x, fn(xa, np.asarray(d, dtype=np.float64)))
    op.__name__ = fn.__name__.lstrip("_")
    return op


def _negate(x):
    return -x


batch_dd_add = _binary(_dd_add, 2)
batch_dd_sub = _binary(lambda x, y: _dd_add(x, _negate(y)), 2)
batch_dd_mul = _binary(_dd_mul, 2)
batch_dd_mul_d = _mixed(_dd_mul_d, 2)
batch_td_add = _binary(_td_add, 3)
batch_td_sub = _binary(lambda x, y: _td_add(x, _negate(y)), 3)
batch_td_mul = _binary(_td_mul, 3)
batch_td_mul_d = _mixed(_td_mul_d, 3)
batch_qd_add = _binary(_qd_add, 4)
batch_qd_sub = _binary(lambda x, y: _qd_add(x, _negate(y)), 4)
batch_qd_mul = _binary(_qd_mul, 4)
batch_qd_mul_d = _mixed(_qd_mul_d, 4)
