"""Unpreconditioned Krylov solvers at a selectable precision.

Each method is written as a generator that performs one iteration per
``next()`` and yields the updated ``(x, r)``.  The driver owns the stopping
test, the divergence guard and the history, so all methods share one
convergence contract:

* converged when the recurrence residual satisfies
  ``||r_k|| <= rel_tol*||b|| + abs_tol`` and the explicitly recomputed
  ``||b - A x_k||`` satisfies the same bound;
* if the recurrence test passes but the true residual does not, the method
  restarts from ``x_k`` with the true residual (at most ``max_restarts``
  times);
* breakdown when a denominator (or rho/omega) falls below
  ``1e-3*abs_tol`` in magnitude or is not finite;
* divergence when ``||r_k|| > 1e6*||b||``.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..kernels.spmv import DimensionError, KernelMode, MatrixMode, prepare_matrix, spmv, sptmv
from ..kernels.vector import DenseVector
from ..mpfloat.bigfloat import bigfloat_context
from ..mpfloat.precision import DD, Precision
from ..sparsemat.formats import CsrMatrix
from .blas import VectorOps

DIVERGENCE_FACTOR = 1e6
BREAKDOWN_FACTOR = 1e-3


class Method(str, enum.Enum):
    CG = "cg"
    BICG = "bicg"
    CGS = "cgs"
    BICGSTAB = "bicgstab"
    GPBICG = "gpbicg"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {value!r}; expected one of {names}") from None


class SolverError(RuntimeError):
    """Base class for solver failures raised by :meth:`SolverReport.raise_for_status`."""


class BreakdownError(SolverError):
    pass


class DivergenceError(SolverError):
    pass


class MaxItersError(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Parameters
    ----------
    method : Method or str
    precision : Precision
        Working precision of vectors and scalars.
    matrix_mode : MatrixMode or str
        ``"p"`` converts the matrix to ``precision``; ``"m"`` keeps it binary64.
    rel_tol, abs_tol : float
        Stopping rule ``||r|| <= rel_tol*||b|| + abs_tol``.
    max_iters : int
    x0 : array-like or DenseVector, optional
        Initial guess; zero when omitted.
    threads, lanes_enabled :
        Forwarded to the SpMV kernels.
    record_true_residuals : bool
        Also record ``||b - A x_k||`` every iteration (one extra SpMV each).
    max_restarts : int
        Restarts allowed when the recurrence and true residuals disagree.
    """

    method: Method = Method.CG
    precision: Precision = DD
    matrix_mode: MatrixMode = MatrixMode.PURE
    rel_tol: float = 1e-13
    abs_tol: float = 1e-99
    max_iters: int = 10000
    x0: object = None
    threads: int = 1
    lanes_enabled: bool = True
    record_true_residuals: bool = False
    max_restarts: int = 5

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "matrix_mode", MatrixMode.parse(self.matrix_mode))
        if isinstance(self.precision, str):
            object.__setattr__(self, "precision", Precision.parse(self.precision))
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    def kernel_mode(self) -> KernelMode:
        return KernelMode(self.precision, self.matrix_mode, threads=self.threads,
                          lanes_enabled=self.lanes_enabled)


@dataclass
class SolverReport:
    """Outcome of one solve.

    ``residual_history[k]`` is ``||r_k||`` rounded to binary64, so its
    length is ``iterations + 1``.  ``final_true_residual`` is recomputed
    with a fresh SpMV.
    """

    method: str
    precision: str
    status: str
    iterations: int
    residual_history: list
    final_true_residual: float
    b_norm: float
    tolerance: float
    restarts: int = 0
    message: str = ""
    true_residual_history: list = field(default_factory=list)
    wall_time: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def relative_residual(self) -> float:
        return self.final_true_residual / self.b_norm if self.b_norm else self.final_true_residual

    def raise_for_status(self) -> None:
        """Raise the matching :class:`SolverError` unless converged."""
        errors = {"breakdown": BreakdownError, "diverged": DivergenceError,
                  "max_iters": MaxItersError}
        if self.status in errors:
            raise errors[self.status](f"{self.method}: {self.message or self.status}")

    def as_dict(self) -> dict:
        return {
            "method": self.method, "precision": self.precision, "status": self.status,
            "converged": self.converged, "iterations": self.iterations,
            "final_true_residual": self.final_true_residual, "b_norm": self.b_norm,
            "tolerance": self.tolerance, "restarts": self.restarts, "message": self.message,
            "wall_time": dict(self.wall_time),
        }


class _Breakdown(Exception):
    pass


class _Context:
    """Operator, vector ops and thresholds shared by the method generators."""

    def __init__(self, A: CsrMatrix, mode: KernelMode, tol: float, abs_tol: float):
        self.A = A
        self.mode = mode
        self.ops = VectorOps(mode.precision)
        self.tol = tol
        self.tiny = BREAKDOWN_FACTOR * abs_tol
        self.spmv_count = 0

    def matvec(self, x: DenseVector) -> DenseVector:
        self.spmv_count += 1
        return spmv(self.A, x, self.mode)

    def rmatvec(self, x: DenseVector) -> DenseVector:
        self.spmv_count += 1
        return sptmv(self.A, x, self.mode)

    def check(self, value, name: str, threshold: bool = False):
        # rho and omega use the absolute threshold; other denominators scale
        # with higher powers of the residual, so only zero or non-finite fails
        f = float(value)
        if not math.isfinite(f) or abs(f) < (self.tiny if threshold else 0.0) or value == 0:
            raise _Breakdown(f"{name} = {f:.3e}")
        return value

    def small(self, v: DenseVector) -> bool:
        return float(self.ops.norm2(v)) <= self.tol


def _cg(c: _Context, x, r):
    o = c.ops
    p = r
    rr = o.dot(r, r)
    while True:
        q = c.matvec(p)
        alpha = rr / c.check(o.dot(p, q), "(p, Ap)")
        x = o.axpy(alpha, p, x)
        r = o.axpy(-alpha, q, r)
        yield x, r
        rr_new = c.check(o.dot(r, r), "(r, r)")
        beta = rr_new / rr
        rr = rr_new
        p = o.axpy(beta, p, r)


def _bicg(c: _Context, x, r):
    o = c.ops
    rt = r
    p, pt = r, rt
    rho = o.dot(rt, r)
    while True:
        c.check(rho, "rho", True)
        q = c.matvec(p)
        qt = c.rmatvec(pt)
        alpha = rho / c.check(o.dot(pt, q), "(pt, Ap)")
        x = o.axpy(alpha, p, x)
        r = o.axpy(-alpha, q, r)
        rt = o.axpy(-alpha, qt, rt)
        yield x, r
        rho_new = o.dot(rt, r)
        beta = rho_new / rho
        rho = rho_new
        p = o.axpy(beta, p, r)
        pt = o.axpy(beta, pt, rt)


def _cgs(c: _Context, x, r):
    o = c.ops
    rt = r
    rho = o.dot(rt, r)
    u = p = r
    while True:
        c.check(rho, "rho", True)
        v = c.matvec(p)
        alpha = rho / c.check(o.dot(rt, v), "(rt, Ap)")
        q = o.axpy(-alpha, v, u)
        w = o.add(u, q)
        x = o.axpy(alpha, w, x)
        r = o.axpy(-alpha, c.matvec(w), r)
        yield x, r
        rho_new = o.dot(rt, r)
        beta = rho_new / rho
        rho = rho_new
        u = o.axpy(beta, q, r)
        p = o.axpy(beta, o.axpy(beta, p, q), u)


def _bicgstab(c: _Context, x, r):
    o = c.ops
    rt = r
    rho = o.dot(rt, r)
    p = r
    while True:
        c.check(rho, "rho", True)
        v = c.matvec(p)
        alpha = rho / c.check(o.dot(rt, v), "(rt, Ap)")
        s = o.axpy(-alpha, v, r)
        if c.small(s):
            yield o.axpy(alpha, p, x), s
            return
        t = c.matvec(s)
        omega = o.dot(t, s) / c.check(o.dot(t, t), "(t, t)")
        c.check(omega, "omega", True)
        x = o.axpy(omega, s, o.axpy(alpha, p, x))
        r = o.axpy(-omega, t, s)
        yield x, r
        rho_new = o.dot(rt, r)
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = o.axpy(beta, o.axpy(-omega, v, p), r)


def _gpbicg(c: _Context, x, r):
    o = c.ops
    rt = r
    n = len(r)
    zero = DenseVector.zeros(n, r.precision)
    p = u = z = t_prev = w = zero
    beta = o.zero()
    rho = o.dot(rt, r)
    first = True
    while True:
        c.check(rho, "rho", True)
        p = o.axpy(beta, o.sub(p, u), r)
        q = c.matvec(p)
        alpha = rho / c.check(o.dot(rt, q), "(rt, Ap)")
        t = o.axpy(-alpha, q, r)
        if c.small(t):
            yield o.axpy(alpha, p, x), t
            return
        y = o.axpy(alpha, q, o.axpy(-alpha, w, o.sub(t_prev, r)))
        cv = c.matvec(t)
        if first:
            zeta = o.dot(cv, t) / c.check(o.dot(cv, cv), "(At, At)")
            eta = o.zero()
        else:
            cc, yy = o.dot(cv, cv), o.dot(y, y)
            yc, ct, yt = o.dot(y, cv), o.dot(cv, t), o.dot(y, t)
            denom = c.check(cc * yy - yc * yc, "det")
            zeta = (yy * ct - yt * yc) / denom
            eta = (cc * yt - yc * ct) / denom
        c.check(zeta, "zeta", True)
        u = o.axpy(zeta, q, o.scale(eta, o.axpy(beta, u, o.sub(t_prev, r))))
        z = o.axpy(-alpha, u, o.axpy(zeta, r, o.scale(eta, z)))
        x = o.add(o.axpy(alpha, p, x), z)
        r = o.axpy(-zeta, cv, o.axpy(-eta, y, t))
        yield x, r
        rho_new = o.dot(rt, r)
        beta = (alpha / zeta) * (rho_new / rho)
        rho = rho_new
        w = o.axpy(beta, q, cv)
        t_prev = t
        first = False


_METHODS = {Method.CG: _cg, Method.BICG: _bicg, Method.CGS: _cgs,
            Method.BICGSTAB: _bicgstab, Method.GPBICG: _gpbicg}


def _as_vector(value, n: int, precision: Precision) -> DenseVector:
    if isinstance(value, DenseVector):
        vec = value.astype(precision)
    else:
        vec = DenseVector.from_float(np.asarray(value, dtype=np.float64), precision)
    if len(vec) != n:
        raise DimensionError(f"vector length {len(vec)} does not match matrix dimension {n}")
    return vec


def solve(A: CsrMatrix, b, config: SolverConfig | None = None, **overrides):
    """Solve ``A x = b`` with ``config.method``.

    Parameters
    ----------
    A : CsrMatrix
        Square matrix (binary64 or already at the working precision).
    b : DenseVector or array-like
        Right-hand side; converted to the working precision.
    config : SolverConfig, optional
    **overrides
        Fields replacing those of ``config``.

    Returns
    -------
    x : DenseVector
    report : SolverReport
    """
    config = config or SolverConfig()
    if overrides:
        config = SolverConfig(**{**config.__dict__, **overrides})
    if A.nrows != A.ncols:
        raise DimensionError(f"matrix must be square, got {A.nrows}x{A.ncols}")
    prec = config.precision
    with bigfloat_context(max(prec.mantissa_bits, 53)):
        return _solve(A, b, config)


def _solve(A, b, config):
    prec = config.precision
    t0 = time.perf_counter()
    mode = config.kernel_mode()
    A = prepare_matrix(A, mode)
    n = A.nrows
    b = _as_vector(b, n, prec)
    ops = VectorOps(prec)
    b_norm = float(ops.norm2(b))
    tol = config.rel_tol * b_norm + config.abs_tol
    ctx = _Context(A, mode, tol, config.abs_tol)
    x = _as_vector(config.x0, n, prec) if config.x0 is not None else DenseVector.zeros(n, prec)
    r = ops.sub(b, ctx.matvec(x)) if config.x0 is not None else b.copy()
    t_setup = time.perf_counter()

    history = [float(ops.norm2(r))]
    true_history = [history[0]] if config.record_true_residuals else []
    status, message, restarts, it = "max_iters", "", 0, 0
    method = _METHODS[config.method]
    if history[0] <= tol:
        status = "converged"
    else:
        gen = method(ctx, x, r)
        while it < config.max_iters:
            try:
                x, r = next(gen)
            except _Breakdown as exc:
                status, message = "breakdown", str(exc)
                break
            except StopIteration:
                gen = method(ctx, x, ops.sub(b, ctx.matvec(x)))
                continue
            it += 1
            rn = float(ops.norm2(r))
            history.append(rn)
            true_r = None
            if config.record_true_residuals:
                true_r = ops.sub(b, ctx.matvec(x))
                true_history.append(float(ops.norm2(true_r)))
            if not math.isfinite(rn):
                status, message = "breakdown", "residual is not finite"
                break
            if rn > DIVERGENCE_FACTOR * b_norm:
                status, message = "diverged", f"residual {rn:.3e} exceeds {DIVERGENCE_FACTOR:g}*||b||"
                break
            if rn <= tol:
                true_r = true_r if true_r is not None else ops.sub(b, ctx.matvec(x))
                if float(ops.norm2(true_r)) <= tol:
                    status = "converged"
                    break
                if restarts >= config.max_restarts:
                    status, message = "breakdown", "true residual stagnates above tolerance"
                    break
                restarts += 1
                gen = method(ctx, x, true_r)
        else:
            message = f"no convergence within {config.max_iters} iterations"
    t_iter = time.perf_counter()
    final_true = float(ops.norm2(ops.sub(b, spmv(A, x, mode))))
    t_end = time.perf_counter()
    report = SolverReport(
        method=config.method.value, precision=str(prec), status=status, iterations=it,
        residual_history=history, final_true_residual=final_true, b_norm=b_norm,
        tolerance=tol, restarts=restarts, message=message, true_residual_history=true_history,
        wall_time={"setup": t_setup - t0, "iterate": t_iter - t_setup, "verify": t_end - t_iter},
    )
    return x, report


def solve_cg(A, b, config: SolverConfig | None = None, **overrides):
    """Conjugate gradients (Hestenes-Stiefel); ``A`` is assumed SPD."""
    return solve(A, b, config, **{**overrides, "method": Method.CG})


def solve_bicg(A, b, config: SolverConfig | None = None, **overrides):
    """Biconjugate gradients; one SpMV and one SpTMV per iteration."""
    return solve(A, b, config, **{**overrides, "method": Method.BICG})


def solve_cgs(A, b, config: SolverConfig | None = None, **overrides):
    """Conjugate gradients squared (Sonneveld)."""
    return solve(A, b, config, **{**overrides, "method": Method.CGS})


def solve_bicgstab(A, b, config: SolverConfig | None = None, **overrides):
    """BiCGSTAB (van der Vorst)."""
    return solve(A, b, config, **{**overrides, "method": Method.BICGSTAB})


def solve_gpbicg(A, b, config: SolverConfig | None = None, **overrides):
    """Generalized product-type BiCG (Zhang)."""
    return solve(A, b, config, **{**overrides, "method": Method.GPBICG})
