import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starrel import ncexpr as nc
from starrel.errors import DomainMismatch, NotHermitian, NotPSD, Singular
from starrel.matrep import (MatHom, RepTuple, absm, direct_sum, evaluate, evaluate_arrays, hermitian_eig, is_psd,
                            matrix_from_json, matrix_to_json, op_norm, pushforward, random_unitary, rep_from_json,
                            rep_to_json, sqrtm_psd)

from .strategies import exprs, random_matrix, random_rep

x, y = nc.gens("x", "y")


def test_sqrt_functional_calculus_example():
    # x1* x1 = diag(0, 4), so sqrt(x1* x1) = diag(0, 2)
    g = nc.sqrt(nc.Gen("x1").adj * nc.Gen("x1")) + nc.Gen("x2")
    rep = RepTuple.of(x1=[[0, 2], [0, 0]], x2=np.eye(2))
    assert np.allclose(evaluate(g, rep), np.diag([1, 3]), atol=1e-12)


def test_dim_zero_and_unit():
    assert evaluate(nc.sqrt(x) + nc.inv(x), RepTuple.zero(["x"])).shape == (0, 0)
    assert np.array_equal(evaluate(nc.UNIT, RepTuple.of(x=np.zeros((3, 3)))), np.eye(3))


@pytest.mark.parametrize("m, expected", [
    (np.diag([1.0, 3.0]), 3.0),
    ([[1, 1], [0, 1]], (1 + math.sqrt(5)) / 2),
    ([[1, 5], [0, 0]], math.sqrt(26)),
    (np.zeros((0, 0)), 0.0),
])
def test_op_norm_examples(m, expected):
    assert op_norm(np.asarray(m, dtype=complex)) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 100.0])
def test_op_norm_idempotent_family(t):
    assert op_norm(np.array([[1, t], [0, 0]], dtype=complex)) == pytest.approx(math.sqrt(1 + t * t), rel=1e-12)


def test_is_psd_examples():
    assert is_psd(np.eye(2))
    assert not is_psd(np.diag([1.0, -1.0]))
    assert is_psd(np.full((2, 2), 0.5))


def test_strict_errors():
    with pytest.raises(NotPSD):
        evaluate(nc.sqrt(x), RepTuple.of(x=np.diag([1.0, -1.0])))
    with pytest.raises(NotHermitian):
        evaluate(nc.exp(x), RepTuple.of(x=[[0, 1], [0, 0]]))
    with pytest.raises(Singular):
        evaluate(nc.inv(x), RepTuple.of(x=np.diag([1.0, 0.0])))


def test_lenient_mode_penalises_instead_of_raising():
    arrays = {"x": np.diag([1.0, -1.0]).astype(complex)}
    value, penalty = evaluate_arrays(nc.sqrt(x), arrays, 2, lenient=True)
    assert value.shape == (2, 2) and penalty > 0


def test_inv_and_exp_values():
    rep = RepTuple.of(x=[[2, 1], [0, 1]])
    assert np.allclose(evaluate(nc.inv(x), rep) @ rep["x"], np.eye(2), atol=1e-12)
    herm = RepTuple.of(x=np.diag([0.0, math.log(3)]))
    assert np.allclose(evaluate(nc.exp(x), herm), np.diag([1, 3]), atol=1e-12)


def test_eigendecomposition_phase_is_canonical():
    rng = np.random.default_rng(3)
    a = random_matrix(4, rng)
    m = a + a.conj().T
    w, v = hermitian_eig(m)
    for col in v.T:
        first = col[np.argmax(np.abs(col) > 1e-12)]
        assert abs(first.imag) < 1e-14 and first.real > 0
    w2, v2 = hermitian_eig(m.copy())
    assert np.array_equal(w, w2) and np.array_equal(v, v2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_sqrt_and_abs_contracts(n, seed):
    rng = np.random.default_rng(seed)
    a = random_matrix(n, rng, 3.0)
    m = a.conj().T @ a
    s = sqrtm_psd(m)
    assert np.allclose(s @ s, m, rtol=0, atol=1e-9 * (1 + op_norm(m)))
    assert is_psd(s)
    b = absm(a)
    assert np.allclose(b @ b, a.conj().T @ a, rtol=0, atol=1e-9 * (1 + op_norm(a) ** 2))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_direct_sum_norm_is_max(dims, seed):
    rng = np.random.default_rng(seed)
    reps = [random_rep(("x",), n, rng) for n in dims]
    total = direct_sum(*reps)
    assert total.dim == sum(dims)
    expected = max(op_norm(r["x"]) for r in reps)
    assert abs(op_norm(total["x"]) - expected) <= 1e-12 * (1 + expected)


def test_direct_sum_examples():
    rho = RepTuple.of(x=[[1]])
    assert direct_sum(rho, RepTuple.zero(["x"])) == rho
    assert direct_sum(rho, RepTuple.of(x=[[0]])) == RepTuple.of(x=np.diag([1, 0]))
    with pytest.raises(DomainMismatch):
        direct_sum(rho, RepTuple.of(y=[[0]]))


def test_mathom_examples():
    rng = np.random.default_rng(0)
    a = random_matrix(2, rng)
    assert np.array_equal(MatHom.identity(2)(a), a)
    zero = MatHom(2, 0, 3, np.eye(3))
    assert np.array_equal(zero(a), np.zeros((3, 3)))
    phi = MatHom.random(2, 2, 1, rng)
    assert phi.target_dim == 5 and phi.injective and not phi.unital


@settings(max_examples=60, deadline=None)
@given(exprs(), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_functional_calculus_is_natural(e, n, seed):
    rng = np.random.default_rng(seed)
    rep = random_rep(("x", "y"), n, rng)
    phi = MatHom(n, 1, 0, random_unitary(n, rng))
    try:
        before = evaluate(e, rep)
    except (NotPSD, NotHermitian, Singular):
        return
    after = evaluate(e, pushforward(rep, phi))
    scale = 1 + op_norm(before)
    assert np.allclose(after, phi(before), rtol=0, atol=1e-8 * scale)


def test_json_round_trip():
    rng = np.random.default_rng(1)
    rep = random_rep(("x", "y"), 3, rng)
    assert rep_from_json(rep_to_json(rep)) == rep
    m = random_matrix(2, rng)
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)


@pytest.mark.parametrize("seed", range(10))
def test_naturality_with_spectral_nodes(seed):
    rng = np.random.default_rng(seed)
    rep = random_rep(("x", "y"), 3, rng)
    e = nc.sqrt(x.adj * x) + nc.exp(y + y.adj) * nc.absolute(x) + nc.inv(1 + x.adj * x)
    phi = MatHom(3, 1, 0, random_unitary(3, rng))
    assert np.allclose(evaluate(e, pushforward(rep, phi)), phi(evaluate(e, rep)), atol=1e-9)
