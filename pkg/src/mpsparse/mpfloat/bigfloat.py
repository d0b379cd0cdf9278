"""Arbitrary-precision backend: a thin layer over gmpy2's MPFR binding.

Every value is a ``gmpy2.mpfr``.  Arithmetic is correctly rounded to the
precision of the active gmpy2 context, so callers run arithmetic inside
:func:`bigfloat_context`.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from .precision import MIN_MPFR_BITS

DEFAULT_BITS = 256

BigFloat = type(mpfr(0))


def _check_bits(bits: int) -> int:
    bits = int(bits)
    if bits < MIN_MPFR_BITS:
        raise ValueError(f"mantissa_bits must be >= {MIN_MPFR_BITS}, got {bits}")
    return bits


def bigfloat_context(bits: int = DEFAULT_BITS):
    """Context manager setting the working precision to ``bits``."""
    return gmpy2.context(gmpy2.get_context(), precision=_check_bits(bits))


def bigfloat(value, bits: int = DEFAULT_BITS) -> BigFloat:
    """Round ``value`` (float, int, str, mpq, mpfr) to ``bits`` mantissa bits."""
    return mpfr(value, _check_bits(bits))


def bigfloat_sum(values, bits: int = DEFAULT_BITS) -> BigFloat:
    """Correctly rounded sum of ``values`` at ``bits`` precision."""
    with bigfloat_context(bits):
        return gmpy2.fsum([mpfr(v) if not isinstance(v, BigFloat) else v for v in values])
