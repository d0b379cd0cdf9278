"""Test vectors ``v_j = sqrt(2)*j`` and ``v_j = sqrt(2+3i)*j``."""

from __future__ import annotations

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ..kernels.vector import ComplexVector, DenseVector
from ..mpfloat.precision import DD, Precision

KINDS = ("real", "complex")


def _work_bits(precision: Precision) -> int:
    return max(precision.mantissa_bits, 212) + 64


def _round_all(values, precision: Precision) -> DenseVector:
    if precision.is_bigfloat:
        bits = precision.mantissa_bits
        return DenseVector(np.array([mpfr(v, bits) for v in values], dtype=object), precision)
    return DenseVector.from_values(values, precision)


def make_vector(n: int, kind: str = "real", precision: Precision = DD):
    """Build the benchmark vector of length ``n`` at ``precision``.

    Each entry is formed at a working precision well above the target and
    rounded once, so the result is deterministic and correctly rounded per
    component split.  ``kind="complex"`` uses the principal square root of
    ``2 + 3i`` and returns a :class:`ComplexVector`.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    with gmpy2.context(gmpy2.get_context(), precision=_work_bits(precision)):
        if kind == "real":
            s = gmpy2.sqrt(mpfr(2))
            return _round_all([s * j for j in range(1, n + 1)], precision)
        root = gmpy2.sqrt(mpc(2, 3))
        vals = [root * j for j in range(1, n + 1)]
        return ComplexVector(_round_all([v.real for v in vals], precision),
                             _round_all([v.imag for v in vals], precision))
