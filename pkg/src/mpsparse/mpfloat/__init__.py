"""Multi-component (DD/TD/QD) arithmetic, lane batches and an MPFR backend."""

from .arrays import narrow_components, widen_components
from .batch import (LANES, LaneBatch, batch_dd_add, batch_dd_mul,
                    batch_dd_mul_d, batch_dd_sub, batch_qd_add, batch_qd_mul,
                    batch_qd_mul_d, batch_qd_sub, batch_td_add, batch_td_mul,
                    batch_td_mul_d, batch_td_sub)
from .bigfloat import (DEFAULT_BITS, BigFloat, bigfloat, bigfloat_context,
                       bigfloat_sum)
from .dd import dd_add, dd_add_sloppy, dd_div, dd_mul, dd_mul_d, dd_neg, dd_sqrt, dd_sub
from .eft import (fma, quick_two_sum, renorm4_3, renorm5_4, three_sum,
                  three_sum2, two_prod_fma, two_sum)
from .number import MultiComponent, convert
from .precision import DD, F64, QD, TD, Precision, from_components
from .qd import (qd_add, qd_div, qd_mul, qd_mul_d, qd_neg, qd_sqrt, qd_sub,
                 td_add, td_div, td_mul, td_mul_d, td_neg, td_sqrt, td_sub)


def renorm(components, k: int) -> MultiComponent:
    """Renormalize ``k + 1`` roughly ordered terms into a ``k``-component value."""
    terms = tuple(float(c) for c in components)
    if len(terms) != k + 1:
        raise ValueError(f"renorm to {k} components takes {k + 1} terms")
    if k == 2:
        s, e = quick_two_sum(terms[1], terms[2])
        hi, lo = quick_two_sum(terms[0], s)
        return MultiComponent(*quick_two_sum(hi, lo + e))
    if k == 3:
        return MultiComponent(*renorm4_3(*terms))
    if k == 4:
        return MultiComponent(*renorm5_4(*terms))
    raise ValueError(f"unsupported component count {k}")
