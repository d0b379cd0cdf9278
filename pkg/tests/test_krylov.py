import mpmath
import numpy as np
import pytest
from gmpy2 import mpq

from mpsparse.bench import make_vector
from mpsparse.kernels import DenseVector, DimensionError, KernelMode, spmv
from mpsparse.krylov import (BreakdownError, DivergenceError, MaxItersError, SolverConfig,
                             axpy, dot, norm2, solve, solve_bicg, solve_bicgstab, solve_cg,
                             solve_cgs, solve_gpbicg)
from mpsparse.mpfloat import DD, F64, QD, TD, MultiComponent, Precision
from mpsparse.sparsemat import csr_from_dense
from oracle import exact, lu_solve_oracle, random_components, to_mpmath

METHODS = ["cg", "bicg", "cgs", "bicgstab", "gpbicg"]
NONSYM = ["bicg", "cgs", "bicgstab", "gpbicg"]
MPFR = Precision.mpfr(240)


def num(s) -> mpq:
    return exact(s.components) if isinstance(s, MultiComponent) else mpq(s)


def as_mpq(x: DenseVector):
    if x.precision.is_bigfloat:
        return [mpq(a) for a in x.data]
    c = x.components
    return [exact(c[:, i]) for i in range(len(x))]


def diag_dominant(rng, n, symmetric=False):
    a = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3)
    if symmetric:
        a = (a + a.T) / 2
    a += np.diag(np.abs(a).sum(axis=1) + 1.0)
    return a


def near_singular_tridiagonal(n=120):
    a = np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    a[0, 0] = 1.0 + 1e-6
    return a


class TestBlas:
    @pytest.mark.parametrize("prec", [F64, DD, TD, QD, MPFR], ids=str)
    def test_examples(self, prec):
        e = DenseVector.from_values([0, 1, 0], prec)
        assert num(dot(e, e)) == 1
        assert num(norm2(DenseVector.from_values([3, 4], prec))) == 5

    @pytest.mark.parametrize("prec", [DD, TD, QD], ids=str)
    def test_axpy(self, prec):
        x = DenseVector.from_values([1, 2, 3], prec)
        y = DenseVector.from_values([10, 20, 30], prec)
        assert as_mpq(axpy(2.0, x, y)) == [12, 24, 36]

    def test_dd_dot_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = DenseVector(random_components(rng, 2, 200), DD)
            v = DenseVector(random_components(rng, 2, 200), DD)
            uu, vv = as_mpq(u), as_mpq(v)
            ref = sum(a * b for a, b in zip(uu, vv))
            scale = sum(abs(a * b) for a, b in zip(uu, vv))
            assert abs(exact(dot(u, v).components) - ref) <= scale * mpq(2) ** -100

    def test_precision_override(self):
        v = DenseVector.from_float([3.0, 4.0])
        assert norm2(v, QD).components == (5.0, 0.0, 0.0, 0.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            dot(DenseVector.zeros(3, DD), DenseVector.zeros(4, DD))


class TestConfig:
    def test_defaults_and_tolerance(self):
        A = csr_from_dense(np.diag([1.0, 2.0, 3.0]))
        cfg = SolverConfig()
        assert (cfg.rel_tol, cfg.abs_tol, cfg.precision) == (1e-13, 1e-99, DD)
        _, rep = solve(A, [1.0, 2.0, 3.0], cfg)
        assert rep.tolerance == 1e-13 * rep.b_norm + 1e-99

    @pytest.mark.parametrize("kw", [dict(rel_tol=0.0), dict(abs_tol=-1.0), dict(max_iters=0),
                                    dict(method="gmres"), dict(precision="xd")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_not_square(self):
        with pytest.raises(DimensionError):
            solve(csr_from_dense(np.ones((2, 3))), [1.0, 1.0])

    def test_string_fields(self):
        cfg = SolverConfig(method="BiCGSTAB", precision="qd", matrix_mode="m")
        assert cfg.kernel_mode() == KernelMode(QD, "m")


class TestSmallSystems:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("prec", [DD, TD, QD, MPFR], ids=str)
    def test_identity_one_iteration(self, method, prec):
        b = make_vector(7, "real", prec)
        x, rep = solve(csr_from_dense(np.eye(7)), b, method=method, precision=prec)
        assert rep.converged and rep.iterations == 1
        assert as_mpq(x) == as_mpq(b)

    @pytest.mark.parametrize("solver", [solve_cg, solve_bicg, solve_cgs, solve_bicgstab,
                                        solve_gpbicg])
    def test_diag_123(self, solver):
        x, rep = solver(csr_from_dense(np.diag([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0],
                        precision=QD)
        assert rep.converged and rep.iterations <= 3
        assert all(abs(float(v) - 1.0) < 1e-13 for v in as_mpq(x))

    def test_zero_rhs(self):
        x, rep = solve(csr_from_dense(np.eye(3) * 2), [0.0, 0.0, 0.0])
        assert rep.converged and rep.iterations == 0 and as_mpq(x) == [0, 0, 0]

    def test_initial_guess(self):
        A = csr_from_dense(np.diag([1.0, 2.0, 3.0]))
        _, rep = solve(A, [1.0, 2.0, 3.0], x0=[1.0, 1.0, 1.0])
        assert rep.converged and rep.iterations == 0


class TestOracle:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("prec", [DD, QD], ids=str)
    def test_matches_dense_lu(self, method, prec):
        rng = np.random.default_rng(1)
        a = diag_dominant(rng, 50, symmetric=(method == "cg"))
        b = rng.standard_normal(50)
        x, rep = solve(csr_from_dense(a), b, method=method, precision=prec)
        assert rep.converged
        ref = lu_solve_oracle(a, b)
        got = [to_mpmath(v) for v in x.to_bigfloat()]
        err = max(abs(g - r) for g, r in zip(got, ref)) / max(abs(r) for r in ref)
        assert err < 1e-10

    @pytest.mark.parametrize("k", [10, 30])
    def test_cg_finite_termination(self, k):
        A = csr_from_dense(np.diag(np.arange(1.0, k + 1)))
        _, rep = solve_cg(A, np.ones(k), precision=QD)
        assert rep.converged and rep.iterations <= k + 2

    def test_mixed_mode_matches_pure(self):
        rng = np.random.default_rng(2)
        a = diag_dominant(rng, 40)
        A = csr_from_dense(a)
        b = rng.standard_normal(40)
        xp, rp = solve(A, b, method="bicgstab", precision=TD, matrix_mode="p")
        xm, rm = solve(A, b, method="bicgstab", precision=TD, matrix_mode="m")
        assert rp.converged and rm.converged
        for p, m in zip(as_mpq(xp), as_mpq(xm)):
            assert abs(p - m) <= 1e-12 * max(1, abs(float(p)))

    def test_mpfr(self):
        rng = np.random.default_rng(3)
        a = diag_dominant(rng, 30)
        b = rng.standard_normal(30)
        # the rho/omega breakdown threshold is relative to abs_tol
        x, rep = solve(csr_from_dense(a), b, method="gpbicg", precision=MPFR, rel_tol=1e-60,
                       abs_tol=1e-200)
        assert rep.converged and rep.relative_residual < 1e-59
        ref = lu_solve_oracle(a, b)
        got = [to_mpmath(v) for v in x.to_bigfloat()]
        with mpmath.workprec(256):
            assert max(abs(g - r) for g, r in zip(got, ref)) < 1e-55


class TestReport:
    @pytest.mark.parametrize("method", METHODS)
    def test_history_and_true_residual(self, method):
        rng = np.random.default_rng(4)
        a = diag_dominant(rng, 40, symmetric=True)
        A = csr_from_dense(a)
        v = make_vector(40, "real", DD)
        b = spmv(A, v, KernelMode(DD))
        _, rep = solve(A, b, method=method, precision=DD, record_true_residuals=True)
        assert rep.converged
        assert len(rep.residual_history) == rep.iterations + 1
        assert len(rep.true_residual_history) == rep.iterations + 1
        assert rep.final_true_residual <= rep.tolerance
        for rec, true in zip(rep.residual_history, rep.true_residual_history):
            assert abs(rec - true) <= 1e3 * rep.tolerance
        d = rep.as_dict()
        assert d["converged"] and set(d["wall_time"]) == {"setup", "iterate", "verify"}
        rep.raise_for_status()

    @pytest.mark.parametrize("method", METHODS)
    def test_breakdown(self, method):
        A = csr_from_dense(np.array([[0.0, 1.0], [1.0, 0.0]]))
        _, rep = solve(A, [1.0, 0.0], method=method)
        assert rep.status == "breakdown" and not rep.converged
        with pytest.raises(BreakdownError):
            rep.raise_for_status()

    def test_max_iters(self):
        A = csr_from_dense(near_singular_tridiagonal())
        _, rep = solve(A, np.ones(120), method="cg", max_iters=5)
        assert rep.status == "max_iters" and rep.iterations == 5
        assert len(rep.residual_history) == 6
        with pytest.raises(MaxItersError):
            rep.raise_for_status()

    def test_divergence(self):
        rng = np.random.default_rng(0)
        rng.standard_normal((30, 30))
        A = csr_from_dense(rng.standard_normal((30, 30)))
        _, rep = solve(A, np.ones(30), method="cgs", max_iters=300)
        assert rep.status == "diverged"
        assert rep.residual_history[-1] > 1e6 * rep.b_norm
        with pytest.raises(DivergenceError):
            rep.raise_for_status()


class TestPrecisionOrdering:
    @pytest.mark.parametrize("method", ["cg", "bicg", "bicgstab"])
    def test_iterations_non_increasing(self, method):
        A = csr_from_dense(near_singular_tridiagonal())
        counts = []
        for prec in (DD, TD, QD):
            b = spmv(A, make_vector(120, "real", prec), KernelMode(prec))
            _, rep = solve(A, b, method=method, precision=prec, max_iters=2000)
            assert rep.converged
            counts.append(rep.iterations)
        assert counts[1] <= 1.05 * counts[0] and counts[2] <= 1.05 * counts[1]
