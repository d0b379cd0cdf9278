"""Helpers over component-major ``(K, n)`` float64 arrays."""

import numpy as np
from numba import njit

from .generic import load, mp_add, store


@njit(cache=True)
def _narrow(src, k, out):
    ksrc = src.shape[0]
    for j in range(src.shape[1]):
        if k == 1:
            t = src[ksrc - 1, j]
            for i in range(ksrc - 2, -1, -1):
                t = src[i, j] + t
            out[0, j] = t
            continue
        acc = load(src, k, j)
        for i in range(k, ksrc):
            acc = mp_add(k, acc, (src[i, j], 0.0, 0.0, 0.0))
        store(out, k, j, acc)


def narrow_components(src: np.ndarray, k: int) -> np.ndarray:
    """Round ``(K, n)`` values to ``k <= K`` components (round to nearest)."""
    src = np.ascontiguousarray(np.atleast_2d(src), dtype=np.float64)
    out = np.zeros((k, src.shape[1]))
    if src.shape[0] <= k:
        out[:src.shape[0]] = src
        return out
    _narrow(src, k, out)
    return out


def widen_components(src: np.ndarray, k: int) -> np.ndarray:
    src = np.atleast_2d(src)
    out = np.zeros((k, src.shape[1]))
    out[:src.shape[0]] = src
    return out
