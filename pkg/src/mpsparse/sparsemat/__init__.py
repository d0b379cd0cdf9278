"""Sparse matrix storage (COO, CSR, split complex) and Matrix Market I/O."""

from .formats import ComplexSparseMatrix, CooMatrix, CsrMatrix
from .mtx import (MtxCountError, MtxError, MtxHeaderError, MtxIndexError,
                  NotSquareError, parse_mtx, write_mtx)
from .ops import (StructureStats, convert_precision, coo_to_csr, csr_from_dense,
                  csr_to_coo, structure_stats, transpose_csr)


def load_mtx(source, require_square: bool = False):
    """Parse a Matrix Market file straight into CSR (complex files give a
    :class:`ComplexSparseMatrix`)."""
    return coo_to_csr(parse_mtx(source, require_square=require_square))
