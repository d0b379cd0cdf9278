"""Sparse matrix-vector kernels (real/complex, pure/mixed, plain/transposed)."""

from .spmv import (DimensionError, KernelMode, MatrixMode, apply, gather_lanes,
                   partition_rows, prepare_matrix, spmv, spmv_complex, sptmv,
                   sptmv_complex)
from .vector import ComplexVector, DenseVector
