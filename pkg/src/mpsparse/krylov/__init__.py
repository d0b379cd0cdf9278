"""Krylov subspace solvers (CG, BiCG, CGS, BiCGSTAB, GPBiCG)."""

from .blas import VectorOps, axpy, dot, norm2
from .solvers import (BreakdownError, DivergenceError, MaxItersError, Method,
                      SolverConfig, SolverError, SolverReport, solve, solve_bicg,
                      solve_bicgstab, solve_cg, solve_cgs, solve_gpbicg)
