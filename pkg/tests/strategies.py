"""Shared hypothesis strategies and random fixtures."""
import numpy as np
from hypothesis import strategies as st

from starrel import ncexpr as nc
from starrel.matrep import RepTuple

GENS = ("x", "y")

coeffs = st.sampled_from([1, -1, 2, -3, 0.5, 1j, 2 - 1j])


def _leaves(names):
    return st.one_of(st.sampled_from([nc.Gen(g) for g in names]), st.just(nc.UNIT))


def func_free_exprs(names=GENS, max_leaves=12):
    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda t: nc.Sum(t)),
            st.tuples(children, children).map(lambda t: nc.Product(t)),
            st.tuples(coeffs, children).map(lambda t: nc.ScalarMul(*t)),
            children.map(nc.Adjoint),
        )
    return st.recursive(_leaves(names), extend, max_leaves=max_leaves)


def exprs(names=GENS, max_leaves=12):
    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda t: nc.Sum(t)),
            st.tuples(children, children).map(lambda t: nc.Product(t)),
            st.tuples(coeffs, children).map(lambda t: nc.ScalarMul(*t)),
            children.map(nc.Adjoint),
            st.tuples(st.sampled_from(nc.FUNCS), children).map(lambda t: nc.Func(*t)),
        )
    return st.recursive(_leaves(names), extend, max_leaves=max_leaves)


letters = st.tuples(st.sampled_from(GENS), st.booleans())
monomials = st.lists(letters, max_size=4).map(tuple)


def polynomials(max_terms=5):
    return st.dictionaries(monomials, st.integers(-4, 4).map(complex), max_size=max_terms).map(nc.StarPolynomial)


def random_matrix(n, rng, scale=1.0):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * scale / np.sqrt(2)


def random_rep(names, n, rng, scale=1.0):
    return RepTuple(n, {g: random_matrix(n, rng, scale) for g in names})


def random_int_polynomial(rng, n_gens=3, max_degree=4, max_terms=6):
    names = ("x", "y", "z")[:n_gens]
    terms = {}
    for _ in range(int(rng.integers(0, max_terms + 1))):
        d = int(rng.integers(0, max_degree + 1))
        m = tuple((names[int(rng.integers(n_gens))], bool(rng.integers(2))) for _ in range(d))
        terms[m] = terms.get(m, 0) + complex(int(rng.integers(-5, 6)), int(rng.integers(-2, 3)))
    return nc.StarPolynomial(terms)
