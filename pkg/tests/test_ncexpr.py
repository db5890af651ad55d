import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starrel import ncexpr as nc
from starrel.errors import NonPolynomial, UnboundGenerator
from starrel.matrep import RepTuple, evaluate

from .strategies import exprs, func_free_exprs, polynomials, random_rep

x, y, h, k = nc.gens("x", "y", "h", "k")


def test_normalize_unit_law():
    assert nc.normalize(nc.Product((nc.UNIT, x))) == x


def test_normalize_additive_inverse():
    assert nc.is_zero(nc.normalize(nc.Sum((x, nc.ScalarMul(-1, x)))))


def test_normalize_scalar_folding():
    assert nc.normalize(nc.ScalarMul(2, nc.ScalarMul(3, x))) == nc.ScalarMul(6, x)


def test_normalize_keeps_products_of_sums():
    e = nc.normalize((x + y) * (x + y))
    assert isinstance(e, nc.Product) and len(e.factors) == 2


def test_adjoint_examples():
    assert nc.adjoint(x) == nc.Adjoint(x)
    assert nc.adjoint(nc.Product((x, y))) == nc.Product((nc.Adjoint(y), nc.Adjoint(x)))
    herm = nc.normalize(x + x.adj)
    assert nc.normalize(nc.adjoint(herm)) == herm


def test_adjoint_of_inv_moves_inside():
    e = nc.adjoint(nc.inv(1 + x))
    assert nc.normalize(e) == nc.normalize(nc.inv(1 + x.adj))


def test_to_polynomial_example():
    p = nc.to_polynomial(x.adj * x + 2 * x * x.adj + 3 * x)
    assert p.coeffs == {(("x", True), ("x", False)): 1, (("x", False), ("x", True)): 2, (("x", False),): 3}


def test_to_polynomial_unit_and_func():
    assert nc.to_polynomial(nc.UNIT).coeffs == {(): 1}
    with pytest.raises(NonPolynomial):
        nc.to_polynomial(nc.sqrt(x.adj * x))


def test_substitute_examples():
    assert nc.normalize(nc.substitute(x * x, {"x": y})) == nc.normalize(y * y)
    assert nc.normalize(nc.substitute(x, {"x": nc.UNIT})) == nc.UNIT
    got = nc.to_polynomial(nc.substitute(x.adj * x, {"x": h + k}))
    assert got == nc.to_polynomial((h + k).adj * (h + k))
    with pytest.raises(UnboundGenerator):
        nc.substitute(x * y, {"x": h})


def test_monomial_order_is_graded_lex_with_star_after_plain():
    p = nc.to_polynomial(x.adj * x + x * x + x.adj + x + 1 + y)
    assert [nc.format_monomial(m) for m, _ in p.items()] == ["1", "x", "adj(x)", "y", "x*x", "adj(x)*x"]


def test_tiny_coefficients_dropped():
    p = nc.StarPolynomial({(("x", False),): 1e-13, (("y", False),): 1.0})
    assert list(p.coeffs) == [(("y", False),)]


def test_format_expr_examples():
    assert nc.format_expr(nc.normalize(x.adj * x - x)) == "adj(x)*x - x"
    assert nc.format_expr(nc.normalize(2j * x + (1 - 2j) * y)) == "2i*x + (1-2i)*y"
    assert nc.format_expr(nc.normalize(-x)) == "-x"
    assert nc.format_expr(nc.normalize((x + 1) * y)) == "(1 + x)*y"


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_normalize_idempotent(e):
    once = nc.normalize(e)
    assert nc.normalize(once) == once


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_adjoint_is_involution(e):
    assert nc.normalize(nc.adjoint(nc.adjoint(e))) == nc.normalize(e)


@settings(max_examples=200, deadline=None)
@given(exprs(), exprs())
def test_adjoint_anti_multiplicative(a, b):
    lhs = nc.normalize(nc.adjoint(nc.Product((a, b))))
    rhs = nc.normalize(nc.Product((nc.adjoint(b), nc.adjoint(a))))
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(polynomials())
def test_polynomial_expression_round_trip(p):
    assert nc.to_polynomial(p.to_expr()) == p


@settings(max_examples=100, deadline=None)
@given(func_free_exprs(), func_free_exprs(), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_eval_ring_laws(a, b, n, seed):
    rep = random_rep(("x", "y"), n, np.random.default_rng(seed))
    ea, eb = evaluate(a, rep), evaluate(b, rep)
    scale = 1 + np.abs(ea).max() + np.abs(eb).max()
    tol = 1e-10 * scale ** 2
    assert np.allclose(evaluate(a + b, rep), ea + eb, rtol=0, atol=tol)
    assert np.allclose(evaluate(nc.Product((a, b)), rep), ea @ eb, rtol=0, atol=tol)
    assert np.allclose(evaluate(nc.adjoint(a), rep), ea.conj().T, rtol=0, atol=tol)


@settings(max_examples=100, deadline=None)
@given(func_free_exprs(), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_normalize_preserves_eval(e, n, seed):
    rep = random_rep(("x", "y"), n, np.random.default_rng(seed))
    raw, norm = evaluate(e, rep), evaluate(nc.normalize(e), rep)
    assert np.allclose(raw, norm, rtol=1e-12, atol=1e-12 * (1 + np.abs(raw).max()))


def test_unit_evaluates_to_identity():
    rep = RepTuple.of(x=np.zeros((3, 3)))
    assert np.array_equal(evaluate(nc.UNIT, rep), np.eye(3))
