"""Element-wise and reduction kernels on ``(k, n)`` component arrays."""

from numba import njit

from ..mpfloat.generic import ZERO4, load, mp_add, mp_mul, mp_sub, store


@njit(cache=True)
def vec_add(k, x, y, out):
    for j in range(x.shape[1]):
        store(out, k, j, mp_add(k, load(x, k, j), load(y, k, j)))


@njit(cache=True)
def vec_sub(k, x, y, out):
    for j in range(x.shape[1]):
        store(out, k, j, mp_sub(k, load(x, k, j), load(y, k, j)))


@njit(cache=True)
def vec_axpy(k, alpha, x, y, out):
    """``out = alpha*x + y``; ``out`` may alias ``y``."""
    for j in range(x.shape[1]):
        store(out, k, j, mp_add(k, mp_mul(k, alpha, load(x, k, j)), load(y, k, j)))


@njit(cache=True)
def vec_scale(k, alpha, x, out):
    for j in range(x.shape[1]):
        store(out, k, j, mp_mul(k, alpha, load(x, k, j)))


@njit(cache=True)
def vec_dot(k, x, y):
    """Sequential left-to-right dot product."""
    acc = ZERO4
    for j in range(x.shape[1]):
        acc = mp_add(k, acc, mp_mul(k, load(x, k, j), load(y, k, j)))
    return acc
