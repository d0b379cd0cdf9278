from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..mpfloat.precision import F64, Precision

INDEX_DTYPE = np.int64


@dataclass
class CooMatrix:
    """Coordinate-list sparse matrix with 0-based indices.

    ``data`` is float64 for real matrices and complex128 for complex ones.
    Entries may be in any order and may repeat.
    """

    nrows: int
    ncols: int
    row: np.ndarray
    col: np.ndarray
    data: np.ndarray
    symmetry: str = field(default="general", compare=False)

    def __post_init__(self):
        self.row = np.asarray(self.row, dtype=INDEX_DTYPE)
        self.col = np.asarray(self.col, dtype=INDEX_DTYPE)
        data = np.asarray(self.data)
        if not np.issubdtype(data.dtype, np.complexfloating):
            data = data.astype(np.float64, copy=False)
        self.data = data
        if not (self.row.shape == self.col.shape == self.data.shape) or self.row.ndim != 1:
            raise ValueError("row, col and data must be 1-D arrays of equal length")
        if self.nnz:
            if self.row.min() < 0 or self.row.max() >= self.nrows:
                raise ValueError("row index out of range")
            if self.col.min() < 0 or self.col.max() >= self.ncols:
                raise ValueError("column index out of range")

    @property
    def nnz(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def is_complex(self) -> bool:
        return np.issubdtype(self.data.dtype, np.complexfloating)

    @classmethod
    def from_dense(cls, a) -> "CooMatrix":
        a = np.asarray(a)
        r, c = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], r, c, a[r, c])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.data.dtype)
        np.add.at(out, (self.row, self.col), self.data)
        return out


class CsrMatrix:
    """Compressed sparse row matrix.

    ``data`` layout depends on ``precision``: a 1-D float64 array for
    binary64, a ``(K, nnz)`` component-major float64 array for DD/TD/QD (one
    binary64 array per component, all sharing ``indices``/``indptr``) and a
    1-D object array of ``gmpy2.mpfr`` for MPFR.
    """

    def __init__(self, data, indices, indptr, shape, precision: Precision = F64,
                 check: bool = True):
        self.indices = np.asarray(indices, dtype=INDEX_DTYPE)
        self.indptr = np.asarray(indptr, dtype=INDEX_DTYPE)
        self.nrows, self.ncols = (int(shape[0]), int(shape[1]))
        self.precision = precision
        if precision.is_bigfloat:
            self.data = np.asarray(data, dtype=object)
        elif precision.components == 1:
            self.data = np.asarray(data, dtype=np.float64)
        else:
            self.data = np.asarray(data, dtype=np.float64).reshape(precision.components, -1)
        if check:
            self.check()

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])

    @property
    def components(self) -> np.ndarray:
        """Component-major ``(K, nnz)`` view of the values (binary64-based only)."""
        if self.precision.is_bigfloat:
            raise TypeError("MPFR matrices have no binary64 components")
        return self.data.reshape(self.precision.components, -1)

    def check(self) -> None:
        """Validate the CSR invariants; raise ``ValueError`` on violation."""
        ip, ind = self.indptr, self.indices
        if ip.shape != (self.nrows + 1,):
            raise ValueError(f"indptr must have {self.nrows + 1} entries")
        if ip[0] != 0 or ip[-1] != ind.shape[0]:
            raise ValueError("indptr must start at 0 and end at nnz")
        if np.any(np.diff(ip) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.data.shape[-1] != ind.shape[0]:
            raise ValueError("data and indices lengths differ")
        if ind.size:
            if ind.min() < 0 or ind.max() >= self.ncols:
                raise ValueError("column index out of range")
            step = np.diff(ind)
            row_start = np.zeros(ind.size, dtype=bool)
            row_start[ip[1:-1][ip[1:-1] < ind.size]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must be strictly increasing within each row")

    def row_of_entries(self) -> np.ndarray:
        return np.repeat(np.arange(self.nrows, dtype=INDEX_DTYPE), np.diff(self.indptr))

    def leading(self) -> np.ndarray:
        """Values rounded to binary64."""
        if self.precision.is_bigfloat:
            return np.array([float(v) for v in self.data], dtype=np.float64)
        return self.components[0].copy()

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_of_entries(), self.indices] = self.leading()
        return out

    def same_structure(self, other: "CsrMatrix") -> bool:
        return (self.shape == other.shape
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self) -> str:
        return (f"CsrMatrix(shape={self.shape}, nnz={self.nnz}, "
                f"precision={self.precision})")


class ComplexSparseMatrix:
    """``A = re + i*im`` with both parts sharing one sparsity structure."""

    def __init__(self, re: CsrMatrix, im: CsrMatrix):
        if not re.same_structure(im):
            raise ValueError("real and imaginary parts must share indices and indptr")
        if re.precision != im.precision:
            raise ValueError("real and imaginary parts must have the same precision")
        self.re = re
        self.im = im

    @property
    def shape(self) -> tuple[int, int]:
        return self.re.shape

    @property
    def nrows(self) -> int:
        return self.re.nrows

    @property
    def ncols(self) -> int:
        return self.re.ncols

    @property
    def nnz(self) -> int:
        return self.re.nnz

    @property
    def precision(self) -> Precision:
        return self.re.precision

    @property
    def indices(self) -> np.ndarray:
        return self.re.indices

    @property
    def indptr(self) -> np.ndarray:
        return self.re.indptr

    def to_dense(self) -> np.ndarray:
        return self.re.to_dense() + 1j * self.im.to_dense()

    def __repr__(self) -> str:
        return (f"ComplexSparseMatrix(shape={self.shape}, nnz={self.nnz}, "
                f"precision={self.precision})")
