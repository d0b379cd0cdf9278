"""Error-free transformations on binary64 values.

All functions are numba-compiled so they can be inlined into the
multi-component routines and the sparse kernels, and are also callable from
plain Python.  None of them is compiled with ``fastmath``: contraction of
``a*b + c`` into an FMA, or reassociation, would break exactness.
"""

import math

from llvmlite import ir
from numba import njit, types, vectorize
from numba.extending import intrinsic


@intrinsic
def _llvm_fma(typingctx, a, b, c):
    sig = types.float64(types.float64, types.float64, types.float64)

    def codegen(context, builder, signature, args):
        t = args[0].type
        fn = builder.module.declare_intrinsic(
            "llvm.fma", [t], ir.FunctionType(t, [t, t, t]))
        return builder.call(fn, args)

    return sig, codegen


@njit(cache=True)
def fma(a, b, c):
    """Fused multiply-add ``a*b + c`` with a single rounding."""
    return _llvm_fma(a, b, c)


@vectorize(["float64(float64, float64, float64)"], cache=True)
def fma_ufunc(a, b, c):
    return _llvm_fma(a, b, c)


@njit(cache=True)
def two_sum(a, b):
    """Knuth's TwoSum: ``s = fl(a+b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@njit(cache=True)
def quick_two_sum(a, b):
    """Dekker's FastTwoSum.  Requires ``|a| >= |b|`` (or ``a == 0``)."""
    s = a + b
    e = b - (s - a)
    return s, e


@njit(cache=True)
def two_prod_fma(a, b):
    """``p = fl(a*b)`` and ``p + e == a*b`` exactly."""
    p = a * b
    e = _llvm_fma(a, b, -p)
    return p, e


@njit(cache=True)
def three_sum(a, b, c):
    """Exact three-term redistribution; returns ``(a', b', c')`` with the same sum."""
    t1, t2 = two_sum(a, b)
    a, t3 = two_sum(c, t1)
    b, c = two_sum(t2, t3)
    return a, b, c


@njit(cache=True)
def three_sum2(a, b, c):
    """Like :func:`three_sum` but folds the two tails into one (not exact)."""
    t1, t2 = two_sum(a, b)
    a, t3 = two_sum(c, t1)
    return a, t2 + t3


@njit(cache=True)
def renorm4_3(c0, c1, c2, c3):
    """Renormalize four terms into a non-overlapping triple."""
    if math.isinf(c0):
        return c0, c1, c2
    s0, c3 = quick_two_sum(c2, c3)
    s0, c2 = quick_two_sum(c1, s0)
    c0, c1 = quick_two_sum(c0, s0)

    s0 = c0
    s1 = c1
    s2 = 0.0
    if s1 != 0.0:
        s1, s2 = quick_two_sum(s1, c2)
        if s2 != 0.0:
            s2 += c3
        else:
            s1, s2 = quick_two_sum(s1, c3)
    else:
        s0, s1 = quick_two_sum(s0, c2)
        if s1 != 0.0:
            s1, s2 = quick_two_sum(s1, c3)
        else:
            s0, s1 = quick_two_sum(s0, c3)
    return s0, s1, s2


@njit(cache=True)
def renorm5_4(c0, c1, c2, c3, c4):
    """Renormalize five terms into a non-overlapping quadruple."""
    if math.isinf(c0):
        return c0, c1, c2, c3
    s0, c4 = quick_two_sum(c3, c4)
    s0, c3 = quick_two_sum(c2, s0)
    s0, c2 = quick_two_sum(c1, s0)
    c0, c1 = quick_two_sum(c0, s0)

    s0 = c0
    s1 = c1
    s2 = 0.0
    s3 = 0.0
    if s1 != 0.0:
        s1, s2 = quick_two_sum(s1, c2)
        if s2 != 0.0:
            s2, s3 = quick_two_sum(s2, c3)
            if s3 != 0.0:
                s3 += c4
            else:
                s2, s3 = quick_two_sum(s2, c4)
        else:
            s1, s2 = quick_two_sum(s1, c3)
            if s2 != 0.0:
                s2, s3 = quick_two_sum(s2, c4)
            else:
                s1, s2 = quick_two_sum(s1, c4)
    else:
        s0, s1 = quick_two_sum(s0, c2)
        if s1 != 0.0:
            s1, s2 = quick_two_sum(s1, c3)
            if s2 != 0.0:
                s2, s3 = quick_two_sum(s2, c4)
            else:
                s1, s2 = quick_two_sum(s1, c4)
        else:
            s0, s1 = quick_two_sum(s0, c3)
            if s1 != 0.0:
                s1, s2 = quick_two_sum(s1, c4)
            else:
                s0, s1 = quick_two_sum(s0, c4)
    return s0, s1, s2, s3
