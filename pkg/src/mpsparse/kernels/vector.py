from __future__ import annotations

import hashlib

import numpy as np
from gmpy2 import mpfr

from ..mpfloat.arrays import narrow_components, widen_components
from ..mpfloat.bigfloat import bigfloat_context
from ..mpfloat.number import MultiComponent, convert
from ..mpfloat.precision import F64, Precision


class DenseVector:
    """A dense vector at a given precision.

    Storage mirrors :class:`~mpsparse.sparsemat.CsrMatrix`: ``(n,)`` float64
    for binary64, ``(K, n)`` component-major float64 for DD/TD/QD and an
    ``(n,)`` object array of ``gmpy2.mpfr`` for MPFR.
    """

    __slots__ = ("data", "precision")

    def __init__(self, data, precision: Precision = F64):
        self.precision = precision
        if precision.is_bigfloat:
            self.data = np.asarray(data, dtype=object).reshape(-1)
        elif precision.components == 1:
            self.data = np.ascontiguousarray(data, dtype=np.float64).reshape(-1)
        else:
            arr = np.ascontiguousarray(data, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[0] != precision.components:
                raise ValueError(f"{precision} vector needs a ({precision.components}, n) array")
            self.data = arr

    @classmethod
    def zeros(cls, n: int, precision: Precision = F64) -> "DenseVector":
        if precision.is_bigfloat:
            with bigfloat_context(precision.mantissa_bits):
                return cls(np.array([mpfr(0)] * n, dtype=object), precision)
        if precision.components == 1:
            return cls(np.zeros(n), precision)
        return cls(np.zeros((precision.components, n)), precision)

    @classmethod
    def from_float(cls, values, precision: Precision = F64) -> "DenseVector":
        """Exact widening of binary64 values."""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if precision.is_bigfloat:
            bits = precision.mantissa_bits
            return cls(np.array([mpfr(x, bits) for x in values.tolist()], dtype=object), precision)
        if precision.components == 1:
            return cls(values.copy(), precision)
        out = np.zeros((precision.components, values.size))
        out[0] = values
        return cls(out, precision)

    @classmethod
    def from_values(cls, values, precision: Precision) -> "DenseVector":
        """Build from scalars (float, MultiComponent, mpfr), converting each."""
        conv = [convert(v, precision) for v in values]
        if precision.is_bigfloat:
            return cls(np.array(conv, dtype=object), precision)
        if precision.components == 1:
            return cls(np.array(conv, dtype=np.float64), precision)
        return cls(np.array([c.components for c in conv], dtype=np.float64).T.copy(), precision)

    def __len__(self) -> int:
        return int(self.data.shape[-1])

    @property
    def n(self) -> int:
        return len(self)

    @property
    def components(self) -> np.ndarray:
        if self.precision.is_bigfloat:
            raise TypeError("MPFR vectors have no binary64 components")
        return self.data.reshape(self.precision.components, -1)

    def __getitem__(self, i):
        if self.precision.is_bigfloat:
            return self.data[i]
        if self.precision.components == 1:
            return float(self.data[i])
        return MultiComponent(*self.data[:, i].tolist())

    def leading(self) -> np.ndarray:
        """Values rounded to binary64."""
        if self.precision.is_bigfloat:
            return np.array([float(x) for x in self.data], dtype=np.float64)
        return self.components[0].copy()

    def to_bigfloat(self, bits: int = 256) -> list:
        if self.precision.is_bigfloat:
            return list(self.data)
        return [convert(self[i], Precision.mpfr(bits)) if self.precision.components > 1
                else mpfr(float(self.data[i]), bits) for i in range(len(self))]

    def astype(self, precision: Precision) -> "DenseVector":
        """Convert to ``precision``; widening is exact, narrowing rounds."""
        if precision == self.precision:
            return self.copy()
        if self.precision.is_bigfloat or precision.is_bigfloat:
            return DenseVector.from_values([self[i] for i in range(len(self))], precision)
        src = self.components
        k = precision.components
        out = widen_components(src, k) if src.shape[0] < k else narrow_components(src, k)
        return DenseVector(out if k > 1 else out[0], precision)

    def copy(self) -> "DenseVector":
        return DenseVector(self.data.copy(), self.precision)

    def checksum(self) -> str:
        """Hash of the exact stored values; equal iff bitwise equal."""
        h = hashlib.blake2b(digest_size=8)
        if self.precision.is_bigfloat:
            for x in self.data:
                h.update(x.digits(16)[0].encode())
                h.update(str(x.digits(16)[1]).encode())
        else:
            h.update(np.ascontiguousarray(self.data).tobytes())
        return h.hexdigest()

    def bit_equal(self, other: "DenseVector") -> bool:
        if self.precision != other.precision or len(self) != len(other):
            return False
        if self.precision.is_bigfloat:
            return all(a == b or (a != a and b != b) for a, b in zip(self.data, other.data))
        return self.data.tobytes() == other.data.tobytes()

    def __repr__(self) -> str:
        return f"DenseVector(n={len(self)}, precision={self.precision})"


class ComplexVector:
    """``v = re + i*im`` stored as two real vectors of equal length."""

    __slots__ = ("re", "im")

    def __init__(self, re: DenseVector, im: DenseVector):
        if len(re) != len(im):
            raise ValueError("real and imaginary parts must have equal length")
        if re.precision != im.precision:
            raise ValueError("real and imaginary parts must share a precision")
        self.re = re
        self.im = im

    @property
    def precision(self) -> Precision:
        return self.re.precision

    def __len__(self) -> int:
        return len(self.re)

    @classmethod
    def from_complex(cls, values, precision: Precision = F64) -> "ComplexVector":
        values = np.asarray(values, dtype=np.complex128)
        return cls(DenseVector.from_float(values.real, precision),
                   DenseVector.from_float(values.imag, precision))

    def leading(self) -> np.ndarray:
        return self.re.leading() + 1j * self.im.leading()

    def checksum(self) -> str:
        return self.re.checksum() + self.im.checksum()

    def bit_equal(self, other: "ComplexVector") -> bool:
        return self.re.bit_equal(other.re) and self.im.bit_equal(other.im)
