from __future__ import annotations

from dataclasses import dataclass

MIN_MPFR_BITS = 24


@dataclass(frozen=True, order=True)
class Precision:
    """A working precision: binary64, a multi-component format or MPFR.

    Instances order by effective mantissa bits, so ``F64 < DD < TD < QD``.
    ``components`` is 1..4 for the binary64-based formats and 0 for MPFR.
    """

    mantissa_bits: int
    name: str
    components: int

    @property
    def is_bigfloat(self) -> bool:
        return self.components == 0

    @property
    def is_multicomponent(self) -> bool:
        return self.components >= 2

    @classmethod
    def mpfr(cls, bits: int = 256) -> "Precision":
        bits = int(bits)
        if bits < MIN_MPFR_BITS:
            raise ValueError(f"MPFR mantissa must be >= {MIN_MPFR_BITS} bits, got {bits}")
        return cls(bits, "mpfr", 0)

    @classmethod
    def parse(cls, text: str) -> "Precision":
        """Parse ``f64``, ``dd``, ``td``, ``qd``, ``mpfr`` or ``mpfr:<bits>``."""
        key = text.strip().lower()
        if key in _BY_NAME:
            return _BY_NAME[key]
        if key == "mpfr":
            return cls.mpfr()
        if key.startswith("mpfr:"):
            return cls.mpfr(int(key[5:]))
        raise ValueError(f"unknown precision {text!r}")

    def __str__(self) -> str:
        if self.is_bigfloat:
            return f"mpfr:{self.mantissa_bits}"
        return self.name


F64 = Precision(53, "f64", 1)
DD = Precision(106, "dd", 2)
TD = Precision(159, "td", 3)
QD = Precision(212, "qd", 4)

_BY_NAME = {"f64": F64, "d": F64, "double": F64, "dd": DD, "td": TD, "qd": QD}


def from_components(k: int) -> Precision:
    return {1: F64, 2: DD, 3: TD, 4: QD}[k]
