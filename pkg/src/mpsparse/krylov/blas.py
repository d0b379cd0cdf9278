"""Vector building blocks for the solvers, evaluated at one precision."""

from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

from ..kernels import _vecops
from ..kernels.spmv import DimensionError
from ..kernels.vector import DenseVector
from ..mpfloat.bigfloat import bigfloat_context
from ..mpfloat.number import MultiComponent, convert
from ..mpfloat.precision import Precision


class VectorOps:
    """Level-1 operations on :class:`DenseVector` at a fixed precision.

    Scalars are ``float`` for binary64, :class:`MultiComponent` for DD/TD/QD
    and ``gmpy2.mpfr`` for MPFR.  MPFR arithmetic uses the context that is
    active when the method is called.
    """

    def __init__(self, precision: Precision):
        self.precision = precision
        self.k = precision.components
        self.big = precision.is_bigfloat

    # scalars
    def scalar(self, value):
        return convert(value, self.precision)

    def zero(self):
        return self.scalar(0.0)

    def _padded(self, alpha) -> tuple:
        if isinstance(alpha, MultiComponent):
            return alpha.padded()
        return (float(alpha), 0.0, 0.0, 0.0)

    def _wrap(self, t):
        if self.k == 1:
            return float(t[0])
        return MultiComponent._from_padded(t, self.k)

    def sqrt(self, s):
        if self.big:
            return gmpy2.sqrt(s)
        if self.k == 1:
            return math.sqrt(s) if s >= 0 else math.nan
        return s.sqrt()

    # vectors
    def _check(self, x: DenseVector, y: DenseVector) -> None:
        if len(x) != len(y):
            raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")

    def _new(self, out) -> DenseVector:
        return DenseVector(out if self.k > 1 else out[0], self.precision)

    def dot(self, x: DenseVector, y: DenseVector):
        """Sequential left-to-right inner product."""
        self._check(x, y)
        if self.big:
            acc = mpfr(0)
            for a, b in zip(x.data.tolist(), y.data.tolist()):
                acc = acc + a * b
            return acc
        return self._wrap(_vecops.vec_dot(self.k, x.components, y.components))

    def norm2(self, x: DenseVector):
        return self.sqrt(self.dot(x, x))

    def axpy(self, alpha, x: DenseVector, y: DenseVector) -> DenseVector:
        """Return ``alpha*x + y``."""
        self._check(x, y)
        if self.big:
            return DenseVector(np.array([alpha * a + b for a, b in zip(x.data, y.data)],
                                        dtype=object), self.precision)
        out = np.empty((self.k, len(x)))
        _vecops.vec_axpy(self.k, self._padded(alpha), x.components, y.components, out)
        return self._new(out)

    def scale(self, alpha, x: DenseVector) -> DenseVector:
        if self.big:
            return DenseVector(np.array([alpha * a for a in x.data], dtype=object), self.precision)
        out = np.empty((self.k, len(x)))
        _vecops.vec_scale(self.k, self._padded(alpha), x.components, out)
        return self._new(out)

    def add(self, x: DenseVector, y: DenseVector) -> DenseVector:
        self._check(x, y)
        if self.big:
            return DenseVector(np.array([a + b for a, b in zip(x.data, y.data)], dtype=object),
                               self.precision)
        out = np.empty((self.k, len(x)))
        _vecops.vec_add(self.k, x.components, y.components, out)
        return self._new(out)

    def sub(self, x: DenseVector, y: DenseVector) -> DenseVector:
        self._check(x, y)
        if self.big:
            return DenseVector(np.array([a - b for a, b in zip(x.data, y.data)], dtype=object),
                               self.precision)
        out = np.empty((self.k, len(x)))
        _vecops.vec_sub(self.k, x.components, y.components, out)
        return self._new(out)


def _ops_for(u: DenseVector, precision: Precision | None):
    precision = precision or u.precision
    return VectorOps(precision), precision


def dot(u: DenseVector, v: DenseVector, precision: Precision | None = None):
    """Inner product accumulated at ``precision`` (default: that of ``u``)."""
    ops, prec = _ops_for(u, precision)
    with bigfloat_context(prec.mantissa_bits):
        return ops.dot(u.astype(prec), v.astype(prec))


def norm2(v: DenseVector, precision: Precision | None = None):
    """Euclidean norm, ``sqrt(dot(v, v))`` with the precision's square root."""
    ops, prec = _ops_for(v, precision)
    with bigfloat_context(prec.mantissa_bits):
        return ops.norm2(v.astype(prec))


def axpy(alpha, x: DenseVector, y: DenseVector) -> DenseVector:
    """Return ``alpha*x + y`` at the precision of ``x``."""
    ops = VectorOps(x.precision)
    with bigfloat_context(x.precision.mantissa_bits):
        return ops.axpy(ops.scalar(alpha), x, y.astype(x.precision))
