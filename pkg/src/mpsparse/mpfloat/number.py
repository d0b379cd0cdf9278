from __future__ import annotations

import math
from numbers import Real

import gmpy2
from gmpy2 import mpfr

from .bigfloat import BigFloat, bigfloat_context
from .generic import mp_add, mp_div, mp_mul, mp_mul_d, mp_sqrt
from .precision import F64, Precision, from_components

_PAD = (0.0, 0.0, 0.0, 0.0)


def _pad(t):
    return tuple(t) + _PAD[len(t):]


class MultiComponent:
    """A DD, TD or QD value: an unevaluated sum of 2, 3 or 4 binary64 values.

    Supports the arithmetic operators with other values of the same component
    count and with Python floats (multiplication by a float uses the mixed
    binary64 product).
    """

    __slots__ = ("components",)

    def __init__(self, *components: float):
        if not 1 <= len(components) <= 4:
            raise ValueError("a multi-component value has 1 to 4 components")
        self.components = tuple(float(c) for c in components)

    @classmethod
    def from_float(cls, x: float, k: int) -> "MultiComponent":
        return cls(float(x), *([0.0] * (k - 1)))

    @classmethod
    def _from_padded(cls, t, k: int) -> "MultiComponent":
        obj = cls.__new__(cls)
        obj.components = tuple(t[:k])
        return obj

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def precision(self) -> Precision:
        return from_components(self.k)

    def padded(self) -> tuple:
        return _pad(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return self.k

    def __iter__(self):
        return iter(self.components)

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self.components!r}"

    def __float__(self) -> float:
        return self.components[0]

    def to_bigfloat(self, bits: int = 256) -> BigFloat:
        with bigfloat_context(bits):
            return gmpy2.fsum([mpfr(c, 53) for c in self.components])

    def _coerce(self, other):
        if isinstance(other, MultiComponent):
            if other.k != self.k:
                raise ValueError(f"component count mismatch: {self.k} vs {other.k}")
            return other.padded()
        if isinstance(other, BigFloat):
            return None
        if isinstance(other, Real):
            return (float(other), 0.0, 0.0, 0.0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._from_padded(mp_add(self.k, self.padded(), o), self.k)

    __radd__ = __add__

    def __neg__(self):
        return self._from_padded(tuple(-c for c in self.padded()), self.k)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.components[0] < 0.0 else self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._from_padded(mp_add(self.k, self.padded(), tuple(-c for c in o)), self.k)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Real) and not isinstance(other, (MultiComponent, BigFloat)):
            return self._from_padded(mp_mul_d(self.k, self.padded(), float(other)), self.k)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._from_padded(mp_mul(self.k, self.padded(), o), self.k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._from_padded(mp_div(self.k, self.padded(), o), self.k)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._from_padded(mp_div(self.k, o, self.padded()), self.k)

    def sqrt(self) -> "MultiComponent":
        return self._from_padded(mp_sqrt(self.k, self.padded()), self.k)

    def _cmp(self, other) -> float:
        # sign of the leading component of the difference
        d = self - other
        return d.components[0]

    def __lt__(self, other):
        return self._cmp(other) < 0.0

    def __le__(self, other):
        return self._cmp(other) <= 0.0

    def __gt__(self, other):
        return self._cmp(other) > 0.0

    def __ge__(self, other):
        return self._cmp(other) >= 0.0

    def __eq__(self, other):
        if isinstance(other, MultiComponent):
            return self.components == other.components
        if isinstance(other, Real):
            return self.components[0] == other and not any(self.components[1:])
        return NotImplemented

    def __hash__(self):
        return hash(self.components)

    def isfinite(self) -> bool:
        return all(math.isfinite(c) for c in self.components)


def _split_bigfloat(x, k: int) -> tuple:
    """Greedy round-to-nearest extraction of ``k`` binary64 components."""
    comps = []
    with gmpy2.context(gmpy2.get_context(), precision=max(x.precision, 64) + 64):
        rest = mpfr(x)
        for _ in range(k):
            c = float(rest)
            comps.append(c)
            rest = rest - c
    return tuple(comps)


def convert(value, target: Precision):
    """Convert a float, :class:`MultiComponent` or BigFloat to ``target``.

    Returns a ``float`` for binary64, a :class:`MultiComponent` for DD/TD/QD
    and a ``gmpy2.mpfr`` for MPFR targets.  Widening is exact; narrowing
    rounds to nearest.
    """
    if target.is_bigfloat:
        bits = target.mantissa_bits
        if isinstance(value, MultiComponent):
            return value.to_bigfloat(bits)
        return mpfr(value, bits)

    k = target.components
    if isinstance(value, BigFloat):
        comps = _split_bigfloat(value, k)
        return comps[0] if k == 1 else MultiComponent(*comps)
    if isinstance(value, MultiComponent):
        if value.k <= k:
            comps = value.components + (0.0,) * (k - value.k)
        else:
            acc = _pad(value.components[:k])
            for c in value.components[k:]:
                acc = mp_add(k, acc, (c, 0.0, 0.0, 0.0))
            comps = acc[:k]
        return comps[0] if k == 1 else MultiComponent(*comps)
    x = float(value)
    return x if target == F64 else MultiComponent.from_float(x, k)
