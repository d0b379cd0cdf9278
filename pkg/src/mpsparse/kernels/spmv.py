"""CSR sparse matrix-vector products.

Row-internal accumulation order
-------------------------------
With lanes enabled, each row is processed four entries at a time: lane ``l``
accumulates entries ``start + 4*c + l`` for ``c = 0, 1, ...``.  The four lane
sums are then reduced left to right, ``((l0 + l1) + l2) + l3``, and the
remaining ``nnz % 4`` entries are added one by one.  With lanes disabled the
row is summed sequentially from zero.  Rows with fewer than four entries
therefore give identical results in both orders.

Parallel partitioning
---------------------
Rows are split into contiguous blocks with roughly equal nonzero counts.  A
row is never split, so SpMV results do not depend on the thread count.  For
the transposed product each block scatters into a private accumulator and the
accumulators are merged in ascending block order.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numba
import numpy as np
from gmpy2 import mpfr
from numba import njit, prange

from ..mpfloat.batch import LaneBatch
from ..mpfloat.bigfloat import bigfloat_context
from ..mpfloat.generic import ZERO4, load, mp_add, mp_mul, mp_mul_d, store
from ..mpfloat.precision import F64, Precision
from ..sparsemat.formats import ComplexSparseMatrix, CsrMatrix
from ..sparsemat.ops import convert_precision
from . import _vecops
from .vector import ComplexVector, DenseVector


if not {"NUMBA_THREADING_LAYER", "NUMBA_THREADING_LAYER_PRIORITY"} & os.environ.keys():
    # Probe OpenMP before TBB; old TBB builds only emit a version warning.
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class MatrixMode(str, enum.Enum):
    PURE = "p"
    MIXED = "m"

    @classmethod
    def parse(cls, value) -> "MatrixMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"p": cls.PURE, "pure": cls.PURE, "m": cls.MIXED, "mixed": cls.MIXED,
                   "mixedbinary64": cls.MIXED}
        if key not in aliases:
            raise ValueError(f"unknown matrix mode {value!r}; expected 'p' or 'm'")
        return aliases[key]


@dataclass(frozen=True)
class KernelMode:
    """Settings of one kernel invocation.

    Parameters
    ----------
    precision : Precision
        Precision of the vectors and of the accumulation.
    matrix_precision : MatrixMode
        ``PURE`` stores the matrix at ``precision``; ``MIXED`` keeps it in
        binary64 and forms products with the multi-by-double operation.
    transposed : bool
        Used by :func:`apply` to choose between SpMV and SpTMV.
    threads : int
        Number of row partitions; numba runs them on at most this many
        threads.
    lanes_enabled : bool
        Use the 4-wide lane accumulation order.
    """

    precision: Precision = F64
    matrix_precision: MatrixMode = MatrixMode.PURE
    transposed: bool = False
    threads: int = 1
    lanes_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "matrix_precision", MatrixMode.parse(self.matrix_precision))
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.matrix_precision is MatrixMode.MIXED and self.precision.components == 1:
            raise ValueError("mixed mode needs a DD, TD, QD or MPFR vector precision")

    @property
    def mixed(self) -> bool:
        return self.matrix_precision is MatrixMode.MIXED


def partition_rows(indptr: np.ndarray, parts: int) -> np.ndarray:
    """Split rows into ``parts`` contiguous blocks of similar nonzero count.

    Returns block boundaries ``b`` (length ``parts + 1``); block ``p`` covers
    rows ``b[p]:b[p+1]``.  Blocks may be empty.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    nrows = indptr.size - 1
    parts = max(1, int(parts))
    nnz = int(indptr[-1])
    targets = (nnz * np.arange(1, parts, dtype=np.float64)) / parts
    cuts = np.searchsorted(indptr, targets, side="left")
    bounds = np.concatenate([[0], np.clip(cuts, 0, nrows), [nrows]]).astype(np.int64)
    return np.maximum.accumulate(bounds)


@njit(inline="always")
def _product(k, mixed, data, j, vj):
    if mixed:
        return mp_mul_d(k, vj, data[0, j])
    return mp_mul(k, load(data, k, j), vj)


@njit(inline="always")
def _row_sum(k, mixed, lanes, data, indices, start, end, v):
    j0 = start
    acc = ZERO4
    if lanes:
        q = (end - start) // 4
        l0 = ZERO4
        l1 = ZERO4
        l2 = ZERO4
        l3 = ZERO4
        for c in range(q):
            b = start + 4 * c
            l0 = mp_add(k, l0, _product(k, mixed, data, b, load(v, k, indices[b])))
            l1 = mp_add(k, l1, _product(k, mixed, data, b + 1, load(v, k, indices[b + 1])))
            l2 = mp_add(k, l2, _product(k, mixed, data, b + 2, load(v, k, indices[b + 2])))
            l3 = mp_add(k, l3, _product(k, mixed, data, b + 3, load(v, k, indices[b + 3])))
        acc = mp_add(k, mp_add(k, mp_add(k, l0, l1), l2), l3)
        j0 = start + 4 * q
    for j in range(j0, end):
        acc = mp_add(k, acc, _product(k, mixed, data, j, load(v, k, indices[j])))
    return acc


@njit(parallel=True, cache=True)
def _spmv_kernel(k, mixed, lanes, data, indices, indptr, v, out, bounds):
    for p in prange(bounds.size - 1):
        for i in range(bounds[p], bounds[p + 1]):
            store(out, k, i, _row_sum(k, mixed, lanes, data, indices, indptr[i], indptr[i + 1], v))


@njit(parallel=True, cache=True)
def _sptmv_scatter(k, mixed, data, indices, indptr, v, acc, bounds):
    for p in prange(bounds.size - 1):
        local = acc[p]
        for i in range(bounds[p], bounds[p + 1]):
            vi = load(v, k, i)
            for j in range(indptr[i], indptr[i + 1]):
                col = indices[j]
                store(local, k, col, mp_add(k, load(local, k, col), _product(k, mixed, data, j, vi)))


@njit(cache=True)
def _merge(k, acc, out):
    out[:, :] = acc[0]
    for p in range(1, acc.shape[0]):
        part = acc[p]
        for j in range(out.shape[1]):
            store(out, k, j, mp_add(k, load(out, k, j), load(part, k, j)))


def _set_threads(threads: int) -> None:
    numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))


def prepare_matrix(A: CsrMatrix, mode: KernelMode) -> CsrMatrix:
    """Return ``A`` in the storage precision ``mode`` expects.

    Pure mode widens (exactly) or narrows to the vector precision.  Mixed
    mode requires a binary64 matrix.
    """
    if mode.mixed:
        if A.precision != F64:
            raise TypeError("mixed mode needs a binary64 matrix")
        return A
    return A if A.precision == mode.precision else convert_precision(A, mode.precision)


def _check_vector(v: DenseVector, mode: KernelMode, n: int) -> None:
    if v.precision != mode.precision:
        raise TypeError(f"vector precision {v.precision} differs from mode precision {mode.precision}")
    if len(v) != n:
        raise DimensionError(f"vector length {len(v)} does not match matrix dimension {n}")


def _spmv_bigfloat(A: CsrMatrix, v: DenseVector, bits: int) -> np.ndarray:
    data, ind, ip, x = A.data.tolist(), A.indices.tolist(), A.indptr.tolist(), v.data.tolist()
    out = np.empty(A.nrows, dtype=object)
    with bigfloat_context(bits):
        for i in range(A.nrows):
            acc = mpfr(0)
            for j in range(ip[i], ip[i + 1]):
                acc = acc + data[j] * x[ind[j]]
            out[i] = acc
    return out


def _sptmv_bigfloat(A: CsrMatrix, v: DenseVector, bits: int, bounds: np.ndarray) -> np.ndarray:
    data, ind, ip, x = A.data.tolist(), A.indices.tolist(), A.indptr.tolist(), v.data.tolist()
    with bigfloat_context(bits):
        zero = mpfr(0)
        total = None
        for p in range(bounds.size - 1):
            local = [zero] * A.ncols
            for i in range(int(bounds[p]), int(bounds[p + 1])):
                xi = x[i]
                for j in range(ip[i], ip[i + 1]):
                    local[ind[j]] = local[ind[j]] + data[j] * xi
            total = local if total is None else [a + b for a, b in zip(total, local)]
        out = np.empty(A.ncols, dtype=object)
        out[:] = total if total is not None else [zero] * A.ncols
    return out


def spmv(A: CsrMatrix, v: DenseVector, mode: KernelMode | None = None) -> DenseVector:
    """Compute ``y = A v`` at ``mode.precision``.

    Raises
    ------
    DimensionError
        If ``A.ncols != len(v)``.
    """
    mode = mode or KernelMode(precision=v.precision)
    _check_vector(v, mode, A.ncols)
    A = prepare_matrix(A, mode)
    prec = mode.precision
    bounds = partition_rows(A.indptr, mode.threads)
    if prec.is_bigfloat:
        return DenseVector(_spmv_bigfloat(A, v, prec.mantissa_bits), prec)
    k = prec.components
    out = np.empty((k, A.nrows))
    data = A.data.reshape(-1, A.nnz)
    _set_threads(mode.threads)
    _spmv_kernel(k, mode.mixed, mode.lanes_enabled, data, A.indices, A.indptr,
                 v.components, out, bounds)
    return DenseVector(out if k > 1 else out[0], prec)


def sptmv(A: CsrMatrix, v: DenseVector, mode: KernelMode | None = None) -> DenseVector:
    """Compute ``y = A^T v`` at ``mode.precision`` without forming ``A^T``.

    Raises
    ------
    DimensionError
        If ``A.nrows != len(v)``.
    """
    mode = mode or KernelMode(precision=v.precision)
    _check_vector(v, mode, A.nrows)
    A = prepare_matrix(A, mode)
    prec = mode.precision
    bounds = partition_rows(A.indptr, mode.threads)
    if prec.is_bigfloat:
        return DenseVector(_sptmv_bigfloat(A, v, prec.mantissa_bits, bounds), prec)
    k = prec.components
    acc = np.zeros((bounds.size - 1, k, A.ncols))
    data = A.data.reshape(-1, A.nnz)
    _set_threads(mode.threads)
    _sptmv_scatter(k, mode.mixed, data, A.indices, A.indptr, v.components, acc, bounds)
    out = np.empty((k, A.ncols))
    _merge(k, acc, out)
    return DenseVector(out if k > 1 else out[0], prec)


def _combine(x: DenseVector, y: DenseVector, subtract: bool) -> DenseVector:
    prec = x.precision
    if prec.is_bigfloat:
        with bigfloat_context(prec.mantissa_bits):
            vals = [a - b if subtract else a + b for a, b in zip(x.data, y.data)]
        return DenseVector(np.array(vals, dtype=object), prec)
    k = prec.components
    out = np.empty((k, len(x)))
    (_vecops.vec_sub if subtract else _vecops.vec_add)(k, x.components, y.components, out)
    return DenseVector(out if k > 1 else out[0], prec)


def _negate(x: DenseVector) -> DenseVector:
    return DenseVector(-x.data, x.precision)


def _complex_product(A: ComplexSparseMatrix, v: ComplexVector, mode, kernel, conjugate: bool):
    if not isinstance(A, ComplexSparseMatrix):
        raise TypeError("expected a ComplexSparseMatrix")
    mode = mode or KernelMode(precision=v.precision)
    rr = kernel(A.re, v.re, mode)
    ii = kernel(A.im, v.im, mode)
    ri = kernel(A.re, v.im, mode)
    ir = kernel(A.im, v.re, mode)
    if conjugate:
        # (Are - i Aim)(vre + i vim)
        return ComplexVector(_combine(rr, ii, False), _combine(ri, ir, True))
    return ComplexVector(_combine(rr, ii, True), _combine(ri, ir, False))


def spmv_complex(A: ComplexSparseMatrix, v: ComplexVector, mode: KernelMode | None = None,
                 conjugate: bool = False) -> ComplexVector:
    """Complex ``y = A v`` from four real SpMVs.

    ``y_re = A_re v_re - A_im v_im`` and ``y_im = A_re v_im + A_im v_re``.
    With ``conjugate=True`` the entries of ``A`` are conjugated first.
    """
    return _complex_product(A, v, mode, spmv, conjugate)


def sptmv_complex(A: ComplexSparseMatrix, v: ComplexVector, mode: KernelMode | None = None,
                  conjugate: bool = False) -> ComplexVector:
    """Complex ``y = A^T v`` (plain transpose); ``conjugate=True`` gives ``A^H v``."""
    return _complex_product(A, v, mode, sptmv, conjugate)


def apply(A, v, mode: KernelMode | None = None):
    """Dispatch to the real or complex product chosen by ``mode.transposed``."""
    mode = mode or KernelMode(precision=v.precision)
    if isinstance(A, ComplexSparseMatrix):
        return (sptmv_complex if mode.transposed else spmv_complex)(A, v, mode)
    return (sptmv if mode.transposed else spmv)(A, v, mode)


def gather_lanes(v: DenseVector, indices) -> LaneBatch:
    """Load ``v[indices[l]]`` into lane ``l`` of a :class:`LaneBatch`.

    Indices may repeat.  MPFR vectors have no lane form.
    """
    if v.precision.is_bigfloat:
        raise TypeError("MPFR vectors cannot be gathered into lanes")
    idx = np.asarray(indices, dtype=np.int64)
    return LaneBatch(v.components[:, idx].copy())
