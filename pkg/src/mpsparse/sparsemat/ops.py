from __future__ import annotations

from dataclasses import asdict, dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr

from ..mpfloat.arrays import narrow_components
from ..mpfloat.number import _split_bigfloat
from ..mpfloat.bigfloat import bigfloat_context
from ..mpfloat.precision import F64, Precision
from .formats import INDEX_DTYPE, ComplexSparseMatrix, CooMatrix, CsrMatrix


def coo_to_csr(m: CooMatrix):
    """Convert COO to CSR, sorting entries and summing duplicates.

    Returns a :class:`CsrMatrix` for real input and a
    :class:`ComplexSparseMatrix` (shared structure) for complex input.
    """
    order = np.lexsort((m.col, m.row))
    row, col, data = m.row[order], m.col[order], m.data[order]
    if row.size:
        new = np.empty(row.size, dtype=bool)
        new[0] = True
        new[1:] = (row[1:] != row[:-1]) | (col[1:] != col[:-1])
        if not new.all():
            starts = np.flatnonzero(new)
            data = np.add.reduceat(data, starts)
            row, col = row[starts], col[starts]
    indptr = np.zeros(m.nrows + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(row, minlength=m.nrows), out=indptr[1:])
    if np.issubdtype(data.dtype, np.complexfloating):
        re = CsrMatrix(data.real.copy(), col, indptr, m.shape, check=False)
        im = CsrMatrix(data.imag.copy(), re.indices, re.indptr, m.shape, check=False)
        return ComplexSparseMatrix(re, im)
    return CsrMatrix(data, col, indptr, m.shape, check=False)


def csr_to_coo(m) -> CooMatrix:
    """Expand a binary64 CSR (or complex) matrix back to COO."""
    if isinstance(m, ComplexSparseMatrix):
        data = m.re.leading() + 1j * m.im.leading()
        return CooMatrix(m.nrows, m.ncols, m.re.row_of_entries(), m.indices.copy(), data)
    return CooMatrix(m.nrows, m.ncols, m.row_of_entries(), m.indices.copy(), m.leading())


def _transpose_perm(m: CsrMatrix):
    rows = m.row_of_entries()
    perm = np.argsort(m.indices, kind="stable")
    indptr = np.zeros(m.ncols + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(m.indices, minlength=m.ncols), out=indptr[1:])
    return perm, rows[perm], indptr


def transpose_csr(m):
    """Return the transpose in CSR form (column indices stay sorted)."""
    if isinstance(m, ComplexSparseMatrix):
        perm, indices, indptr = _transpose_perm(m.re)
        shape = (m.ncols, m.nrows)
        re = CsrMatrix(m.re.data[..., perm], indices, indptr, shape, m.precision, check=False)
        im = CsrMatrix(m.im.data[..., perm], indices, indptr, shape, m.precision, check=False)
        return ComplexSparseMatrix(re, im)
    perm, indices, indptr = _transpose_perm(m)
    return CsrMatrix(m.data[..., perm], indices, indptr, (m.ncols, m.nrows),
                     m.precision, check=False)


def _convert_values(data: np.ndarray, source: Precision, target: Precision):
    if source == target:
        return data.copy()
    if target.is_bigfloat:
        bits = target.mantissa_bits
        if source.is_bigfloat:
            return np.array([mpfr(v, bits) for v in data], dtype=object)
        comps = np.atleast_2d(data)
        with bigfloat_context(bits):
            out = [gmpy2.fsum([mpfr(c, 53) for c in col]) for col in comps.T.tolist()]
        return np.array(out, dtype=object)
    k = target.components
    if source.is_bigfloat:
        comps = np.array([_split_bigfloat(v, k) for v in data], dtype=np.float64).T
        return comps.reshape(k, -1) if k > 1 else comps.reshape(-1)
    src = np.atleast_2d(data)
    if src.shape[0] < k:
        out = np.zeros((k, src.shape[1]))
        out[:src.shape[0]] = src
        return out
    out = narrow_components(src, k)
    return out[0].copy() if k == 1 else out


def convert_precision(m, target: Precision):
    """Convert matrix values to ``target``; widening is exact.

    Multi-component results keep one binary64 array per component that share
    the same ``indices``/``indptr``.
    """
    if isinstance(m, ComplexSparseMatrix):
        return ComplexSparseMatrix(convert_precision(m.re, target), convert_precision(m.im, target))
    data = _convert_values(m.data, m.precision, target)
    return CsrMatrix(data, m.indices, m.indptr, m.shape, target, check=False)


@dataclass(frozen=True)
class StructureStats:
    nrows: int
    ncols: int
    nnz: int
    bandwidth: int
    nnz_per_row_min: int
    nnz_per_row_mean: float
    nnz_per_row_max: int

    def as_dict(self) -> dict:
        return asdict(self)


def structure_stats(m) -> StructureStats:
    rows = m.re.row_of_entries() if isinstance(m, ComplexSparseMatrix) else m.row_of_entries()
    per_row = np.diff(m.indptr)
    bandwidth = int(np.abs(rows - m.indices).max()) if m.nnz else 0
    return StructureStats(
        nrows=m.nrows,
        ncols=m.ncols,
        nnz=m.nnz,
        bandwidth=bandwidth,
        nnz_per_row_min=int(per_row.min()) if m.nrows else 0,
        nnz_per_row_mean=float(per_row.mean()) if m.nrows else 0.0,
        nnz_per_row_max=int(per_row.max()) if m.nrows else 0,
    )


def csr_from_dense(a, precision: Precision = F64):
    """CSR copy of a dense array; complex input gives a ComplexSparseMatrix."""
    a = np.asarray(a)
    dtype = np.complex128 if np.iscomplexobj(a) else np.float64
    m = coo_to_csr(CooMatrix.from_dense(a.astype(dtype, copy=False)))
    return m if precision == F64 else convert_precision(m, precision)
