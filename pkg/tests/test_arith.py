import math

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpq

from mpsparse.mpfloat import (dd_add, dd_add_sloppy, dd_div, dd_mul, dd_mul_d, dd_sqrt, dd_sub, qd_add,
                              qd_div, qd_mul, qd_mul_d, qd_sqrt, qd_sub, renorm4_3, td_add,
                              td_div, td_mul, td_mul_d, td_sqrt, td_sub)
from oracle import apply_op, big, exact, log2, oracle_context, random_components, rel_err

BOUNDS = {2: -102, 3: -155, 4: -208}
OPS = {
    2: dict(add=dd_add, sub=dd_sub, mul=dd_mul, mul_d=dd_mul_d, div=dd_div, sqrt=dd_sqrt),
    3: dict(add=td_add, sub=td_sub, mul=td_mul, mul_d=td_mul_d, div=td_div, sqrt=td_sqrt),
    4: dict(add=qd_add, sub=qd_sub, mul=qd_mul, mul_d=qd_mul_d, div=qd_div, sqrt=qd_sqrt),
}
N = 3000


def lowest_ulp(x):
    """ulp of the leading component scaled down to the last component's position."""
    k = len(x)
    return math.ulp(abs(x[0])) * 2.0 ** (-53 * (k - 1))


def nonoverlapping(x):
    return all(x[i + 1] == 0.0 or abs(x[i + 1]) <= math.ulp(x[i]) / 2 * (1 + 2 ** -52)
               for i in range(len(x) - 1))


def one(k):
    return (1.0,) + (0.0,) * (k - 1)


@pytest.mark.parametrize("k", [2, 3, 4])
class TestExamples:
    def test_small_integers(self, k):
        ops = OPS[k]
        two, three = (2.0,) + (0.0,) * (k - 1), (3.0,) + (0.0,) * (k - 1)
        assert ops["add"](two, one(k)) == three
        assert ops["mul"](two, three) == (6.0,) + (0.0,) * (k - 1)
        assert ops["mul_d"](two, 3.0) == (6.0,) + (0.0,) * (k - 1)

    def test_identities(self, k):
        rng = np.random.default_rng(k)
        x = tuple(random_components(rng, k, 1)[:, 0])
        ops = OPS[k]
        assert ops["mul"](one(k), x) == x
        assert ops["mul_d"](x, 1.0) == x
        assert exact(ops["mul_d"](x, 0.0)) == 0
        assert exact(ops["add"](x, tuple(-c for c in x))) == 0
        assert ops["mul_d"](one(k), 0.1) == (0.1,) + (0.0,) * (k - 1)

    def test_nonoverlapping_outputs(self, k):
        rng = np.random.default_rng(10 + k)
        x, y = random_components(rng, k, 500), random_components(rng, k, 500)
        d = random_components(rng, 1, 500)
        for op, rhs in (("add", y), ("mul", y), ("mul_d", d)):
            out = apply_op(op, x, rhs)
            assert all(nonoverlapping(tuple(c)) for c in out.T)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("op", ["mul", "mul_d"])
def test_product_error_bound(k, op):
    rng = np.random.default_rng(100 + k)
    x = random_components(rng, k, N)
    y = random_components(rng, 1 if op == "mul_d" else k, N)
    out = apply_op(op, x, y)
    worst = max(rel_err(out[:, i], exact(x[:, i]) * exact(y[:, i])) for i in range(N))
    assert log2(worst) <= BOUNDS[k]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_add_error_bound(k):
    rng = np.random.default_rng(200 + k)
    x, y = random_components(rng, k, N), random_components(rng, k, N)
    out = apply_op("add", x, y)
    worst = max(rel_err(out[:, i], exact(x[:, i]) + exact(y[:, i])) for i in range(N))
    assert log2(worst) <= BOUNDS[k]


def test_dd_add_under_cancellation():
    rng = np.random.default_rng(6)
    x = random_components(rng, 2, 5000)
    y = -x.copy()
    y[1] = random_components(rng, 2, 5000)[1] * 2.0 ** -40
    out = apply_op("add", x, y)
    worst = max(rel_err(out[:, i], exact(x[:, i]) + exact(y[:, i])) for i in range(5000))
    assert log2(worst) <= BOUNDS[2]


def test_dd_add_sloppy_error_relative_to_magnitudes():
    # the one-TwoSum variant bounds its error by |x| + |y| only
    rng = np.random.default_rng(7)
    x, y = random_components(rng, 2, 5000), random_components(rng, 2, 5000)
    worst = 0.0
    for i in range(x.shape[1]):
        out = dd_add_sloppy(tuple(x[:, i]), tuple(y[:, i]))
        scale = abs(exact(x[:, i])) + abs(exact(y[:, i]))
        err = abs(exact(out) - exact(x[:, i]) - exact(y[:, i]))
        worst = max(worst, float(err / scale))
    assert log2(worst) <= -104


@pytest.mark.parametrize("k", [2, 3, 4])
def test_mul_d_matches_widened_mul(k):
    rng = np.random.default_rng(300 + k)
    x, d = random_components(rng, k, N), random_components(rng, 1, N)
    wide = np.zeros((k, N))
    wide[0] = d[0]
    a, b = apply_op("mul_d", x, d), apply_op("mul", x, wide)
    for i in range(N):
        diff = abs(exact(a[:, i]) - exact(b[:, i]))
        assert diff <= 2 * mpq(lowest_ulp(tuple(b[:, i])))


def test_td_matches_qd_on_zero_extended_inputs():
    rng = np.random.default_rng(11)
    x, y = random_components(rng, 3, 2000), random_components(rng, 3, 2000)
    for i in range(x.shape[1]):
        xt, yt = tuple(x[:, i]), tuple(y[:, i])
        xq, yq = xt + (0.0,), yt + (0.0,)
        for td_op, qd_op in ((td_add, qd_add), (td_mul, qd_mul)):
            got = td_op(xt, yt)
            via = renorm4_3(*qd_op(xq, yq))
            assert abs(exact(got) - exact(via)) <= mpq(lowest_ulp(via))


@pytest.mark.parametrize("k", [2, 3, 4])
class TestDivSqrt:
    def test_div_oracle(self, k):
        rng = np.random.default_rng(400 + k)
        x, y = random_components(rng, k, 500), random_components(rng, k, 500)
        div = OPS[k]["div"]
        worst = max(rel_err(div(tuple(x[:, i]), tuple(y[:, i])), exact(x[:, i]) / exact(y[:, i]))
                    for i in range(500))
        assert log2(worst) <= BOUNDS[k] + 2

    def test_sqrt_oracle(self, k):
        rng = np.random.default_rng(500 + k)
        x = random_components(rng, k, 500)
        x[:, x[0] < 0] *= -1
        sqrt = OPS[k]["sqrt"]
        for i in range(500):
            r = sqrt(tuple(x[:, i]))
            with oracle_context():
                ref = gmpy2.sqrt(big(x[:, i]))
            assert log2(rel_err(r, mpq(ref))) <= BOUNDS[k] + 2

    def test_sqrt_examples(self, k):
        sqrt = OPS[k]["sqrt"]
        four = (4.0,) + (0.0,) * (k - 1)
        assert sqrt(four) == (2.0,) + (0.0,) * (k - 1)
        assert exact(sqrt((0.0,) * k)) == 0
        assert math.isnan(sqrt((-1.0,) + (0.0,) * (k - 1))[0])

    def test_div_exact_quotient(self, k):
        div = OPS[k]["div"]
        six, three = (6.0,) + (0.0,) * (k - 1), (3.0,) + (0.0,) * (k - 1)
        assert div(six, three) == (2.0,) + (0.0,) * (k - 1)
