"""Multiple-precision sparse linear algebra: DD/TD/QD/MPFR arithmetic, CSR
SpMV/SpTMV kernels, Krylov solvers and a benchmark harness."""

from .mpfloat import DD, F64, QD, TD, MultiComponent, Precision
from .sparsemat import CsrMatrix, ComplexSparseMatrix, load_mtx
from .kernels import ComplexVector, DenseVector, KernelMode, spmv, sptmv
from .krylov import SolverConfig, solve

__version__ = "0.1.0"
