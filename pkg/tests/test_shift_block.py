import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from rigidspec import shift_block as sb
from rigidspec.numerics import inverse, op_norm
from rigidspec.shift_block import BlockParams, ParameterError, shift_block


@st.composite
def params(draw, n_max=24):
    n = draw(st.integers(2, n_max))
    p = draw(st.integers(1, n - 1))
    a = draw(st.floats(0.01, 1.5))
    return BlockParams(n, p, a)


def test_weights_examples():
    assert np.allclose(np.exp(shift_block(4, 2, 2.0).log_beta), [2, 2, 0.5, 0.5])
    lb = shift_block(3, 1, 8.0).log_beta
    assert np.allclose(lb, [math.log(8), -0.5 * math.log(8), -0.5 * math.log(8)])


@pytest.mark.parametrize("n,p,alpha", [(4, 4, 2.0), (4, 0, 2.0), (4, 2, 1.0), (4, 2, 0.5)])
def test_invalid_params(n, p, alpha):
    with pytest.raises(ParameterError):
        shift_block(n, p, alpha)


@settings(max_examples=60, deadline=None)
@given(params(n_max=64))
def test_weight_invariants(pr):
    b = sb.make_block(pr)
    assert abs(b.log_beta.sum()) < 1e-12 * max(1, pr.n * pr.log_alpha)
    assert np.all(np.diff(b.log_beta) <= 0)
    assert b.log_prefix[0] == 0 and b.log_prefix[-1] == 0


def test_ratio_exact_when_small():
    from fractions import Fraction

    assert BlockParams(10, 4, 0.1).ratio == Fraction(2, 3)
    big = BlockParams(2**70, 2**69 + 1, 0.1)
    assert isinstance(big.ratio, float)


def test_matrix_examples():
    b = shift_block(4, 2, 2.0)
    m = sb.to_matrix(b)
    assert m[1, 0] == 2 and m[0, 3] == 0.5
    assert np.count_nonzero(m) == 4
    assert np.allclose(np.linalg.matrix_power(m, 4), np.eye(4))


def test_matrix_guard():
    with pytest.raises(ParameterError):
        sb.to_matrix(shift_block(20_000, 3, 1.1))


def test_power_norm_examples():
    b = shift_block(4, 2, 2.0)
    assert sb.power_norm_log(b, 0) == 0
    assert sb.power_norm_log(b, 2) == pytest.approx(math.log(4))
    assert sb.power_norm_log(b, 3) == pytest.approx(math.log(2))
    c = shift_block(6, 2, 3.0)
    want = op_norm(np.linalg.matrix_power(sb.to_matrix(c), 4))
    assert math.exp(sb.power_norm_log(c, 4)) == pytest.approx(want, rel=1e-9)
    with pytest.raises(ParameterError):
        sb.power_norm_log(b, 4)


def test_block_power_examples():
    b = shift_block(4, 2, 2.0)
    assert np.array_equal(sb.block_power(b, 24), np.eye(4))
    assert np.allclose(sb.block_power(b, 1), sb.to_matrix(b))
    c = shift_block(5, 2, 2.0)
    m = sb.to_matrix(c)
    assert np.max(np.abs(sb.block_power(c, 7) - m @ m)) < 1e-12
    assert np.array_equal(sb.block_power(c, math.factorial(25)), np.eye(5))


@settings(max_examples=60, deadline=None)
@given(params(), st.integers(0, 10**6))
def test_apply_power_matches_dense(pr, m):
    b = sb.make_block(pr)
    x = np.arange(1, pr.n + 1) * (1 + 0.5j)
    assert np.allclose(sb.apply_power(b, x, m), sb.block_power(b, m) @ x, rtol=1e-12, atol=1e-12)


def test_psi_examples():
    b = shift_block(4, 2, 2.0)
    v = sb.to_matrix(b)
    want = sum(np.linalg.matrix_power(v, j) for j in range(4))
    assert np.allclose(sb.psi(b, 1.0), want)
    col = sb.psi(b, 0.5)[:, 0]
    assert np.vdot(col, col).real == pytest.approx(math.exp(sb.s_sum_log(b, True, 0.25)), rel=1e-10)
    with pytest.raises(ParameterError, match="psi undefined at zero"):
        sb.psi(b, 0)


@settings(max_examples=60, deadline=None)
@given(params(n_max=32), st.floats(0.3, 1.7), st.floats(0, 1))
def test_psi_identity(pr, rho, turn):
    b = sb.make_block(pr)
    lam = cmath.rect(rho, 2 * math.pi * turn)
    assume(abs(lam**pr.n - 1) > 1e-6)
    ps = sb.psi(b, lam)
    resid = (sb.to_matrix(b) - lam * np.eye(pr.n)) @ ps - (1 - lam**pr.n) * np.eye(pr.n)
    assert op_norm(resid) <= 1e-9 * max(1.0, op_norm(ps))


def test_resolvent_examples():
    b = shift_block(4, 2, 2.0)
    assert sb.resolvent_norm(b, 1j) == math.inf
    want = op_norm(inverse(sb.to_matrix(b) - 2 * np.eye(4)))
    assert sb.resolvent_norm(b, 2.0) == pytest.approx(want, rel=1e-8)
    assert sb.resolvent_norm(b, 0.0) == pytest.approx(op_norm(inverse(sb.to_matrix(b))), rel=1e-12)
    assert sb.resolvent_norm(b, 0.0) == pytest.approx(2.0)


def test_s_sum_examples():
    b = shift_block(4, 2, 2.0)
    assert sb.s_sum_log(b, False, 1.0) == pytest.approx(math.log(9))
    assert sb.s_sum_log(b, True, 1.0) == pytest.approx(math.log(25))
    c = shift_block(6, 2, 3.0)
    beta = np.exp(c.log_beta)
    naive = sum(0.7**5 * np.prod(beta[:j]) / 0.7**j for j in range(6))
    assert math.exp(sb.s_sum_log(c, False, 0.7)) == pytest.approx(naive, rel=1e-10)
    with pytest.raises(ParameterError):
        sb.s_sum_log(b, False, 0.0)


@settings(max_examples=60, deadline=None)
@given(params(n_max=40), st.floats(0.05, 3.0), st.booleans())
def test_s_sum_matches_naive(pr, t, squared):
    b = sb.make_block(pr)
    lb = b.log_beta * (2 if squared else 1)
    terms = (pr.n - 1) * math.log(t) + np.concatenate([[0], np.cumsum(lb[:-1])]) - np.arange(pr.n) * math.log(t)
    naive = float(np.logaddexp.reduce(terms))
    assert sb.s_sum_log(b, squared, t) == pytest.approx(naive, rel=1e-10, abs=1e-10)


def test_s_sum_huge_block_is_finite():
    b = sb.make_block(BlockParams(math.factorial(30), math.factorial(30) - 30, math.log1p(math.log(2) / math.factorial(29))))
    v = sb.s_sum_log(b, True, 0.25)
    assert math.isfinite(v)


def test_bracket_examples():
    b = shift_block(4, 2, 2.0)
    for squared in (False, True):
        br = sb.s_sum_bracket(b, squared, 0.5)
        assert br.within
        assert br.log_lower == pytest.approx(-math.log(0.5) * (2 if squared else 1))
    # a single trailing slot: comparison is alpha**p * rho
    c = shift_block(5, 4, 1.5)
    br = sb.s_sum_bracket(c, False, 0.5)
    assert br.log_comparison == pytest.approx(4 * math.log(1.5) + math.log(0.5))
    with pytest.raises(ParameterError):
        sb.s_sum_bracket(b, False, 1.0)


@settings(max_examples=60, deadline=None)
@given(params(n_max=64), st.floats(0.05, 0.95), st.booleans())
def test_bracket_always_within(pr, rho, squared):
    assert sb.s_sum_bracket(sb.make_block(pr), squared, rho).within


@pytest.mark.parametrize("n,p,alpha", [(4, 2, 2.0), (7, 3, 1.5)])
def test_weight_inequality_examples(n, p, alpha):
    assert sb.check_weight_inequality(shift_block(n, p, alpha))


@settings(max_examples=50, deadline=None)
@given(params(n_max=40), st.floats(0.2, 1.8), st.floats(0, 1))
def test_resolvent_bounds_bracket_exact_value(pr, rho, turn):
    b = sb.make_block(pr)
    lam = cmath.rect(rho, 2 * math.pi * turn)
    assume(abs(lam**pr.n - 1) > 1e-6 and abs(rho - 1) > 1e-3)
    lo, hi = sb.resolvent_log_bounds(b, lam)
    exact = sb.resolvent_norm_log(b, lam)
    slack = 1e-9 * max(1.0, abs(exact))
    assert lo - slack <= exact <= hi + slack
