import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starrel import dsl
from starrel import ncexpr as nc
from starrel.comatrix import (ScalarRep, assemble, direct_sum_assembled, entry_generators, interleave_permutation,
                              substitute_entries, unfold)
from starrel.errors import AlphaNotRepresentation, MissingEntry
from starrel.matrep import RepTuple, direct_sum
from starrel.relations import EqZero, RelationSet, check

from .strategies import random_rep

p, x, h, k = nc.gens("p", "x", "h", "k")
PROJ = RelationSet(("p",), (EqZero(p * p - p), EqZero(p.adj - p)))
ALPHA = ScalarRep.of(p=[[1, 0], [0, 0]])
RENAMING = {"p_1_1": -h, "p_1_2": x.adj, "p_2_1": x, "p_2_2": k}


def block_oracle(f: RepTuple, alpha: np.ndarray, g: str) -> np.ndarray:
    n, m = alpha.shape[0], f.dim
    return np.block([[alpha[i, j] * np.eye(m) + f[nc.entry_name(g, i + 1, j + 1)] for j in range(n)]
                     for i in range(n)])


def test_zero_entries_give_alpha():
    f = RepTuple(1, {g: np.zeros((1, 1)) for g in entry_generators(["p"], 2)})
    assert np.array_equal(assemble(f, ALPHA)["p"], np.diag([1, 0]))


def test_half_entries_under_renaming():
    f = RepTuple(1, {"p_1_1": [[-0.5]], "p_1_2": [[0.5]], "p_2_1": [[0.5]], "p_2_2": [[0.5]]})
    assert np.allclose(assemble(f, ALPHA)["p"], np.full((2, 2), 0.5))


def test_projection_unfolding_matches_renamed_block():
    U = unfold(PROJ, ALPHA)
    renamed = substitute_entries(U, RENAMING, ["h", "k", "x"])
    P = renamed.blocks["p"]
    expected = ((1 - h, x.adj), (x, k))
    assert all(nc.normalize(a) == nc.normalize(b) for ra, rb in zip(P.entries, expected) for a, b in zip(ra, rb))
    assert renamed.relations == PROJ.relations
    text = dsl.format_document(renamed)
    assert "block p = [[1 - h, adj(x)], [x, k]];" in text


def test_identity_substitution_keeps_relations():
    U = unfold(PROJ, ALPHA)
    same = substitute_entries(U, {g: nc.Gen(g) for g in U.generators})
    assert same == U.relation_set()


def test_all_entries_zero_leaves_alpha():
    U = unfold(PROJ, ALPHA)
    collapsed = substitute_entries(U, {g: nc.ZERO for g in U.generators}, [])
    assert check(collapsed, RepTuple(1, {})).satisfied


def test_unit_interval_example():
    R = RelationSet(("x",), (EqZero((1 + x).adj * (1 + x) - 1), EqZero((1 + x) * (1 + x).adj - 1)))
    U = unfold(R, ScalarRep.zero(["x"], 1))
    assert U.generators == ("x_1_1",)
    # x = u - 1 for a unitary u
    u = np.diag(np.exp(1j * np.array([0.3, 2.0])))
    f = RepTuple(2, {"x_1_1": u - np.eye(2)})
    assert U.check(f).satisfied and check(U.relation_set(), f).satisfied


def test_errors():
    with pytest.raises(AlphaNotRepresentation):
        unfold(PROJ, ScalarRep.of(p=[[1, 1], [0, 0]]))
    with pytest.raises(AlphaNotRepresentation):
        unfold(PROJ, ScalarRep.of(q=[[1]]))
    with pytest.raises(MissingEntry):
        assemble(RepTuple(1, {"p_1_1": [[0]]}), ALPHA)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_assemble_matches_block_oracle(m, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    alpha = ScalarRep.of(x=a)
    f = random_rep(entry_generators(["x"], 3), m, rng)
    assert np.allclose(assemble(f, alpha)["x"], block_oracle(f, a, "x"), rtol=0, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_unfolded_check_agrees_with_assembled(m, seed):
    rng = np.random.default_rng(seed)
    U = unfold(PROJ, ALPHA)
    f = random_rep(U.generators, m, rng, scale=float(rng.choice([0.0, 1e-6, 1.0])))
    a = check(U.relation_set(), f)
    b = check(PROJ, assemble(f, ALPHA))
    assert a.satisfied == b.satisfied
    assert np.allclose(a.residuals, b.residuals, rtol=0, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3))
def test_zero_tuple_satisfies_unfolding(m):
    U = unfold(PROJ, ALPHA)
    f = RepTuple(m, {g: np.zeros((m, m)) for g in U.generators})
    assert check(U.relation_set(), f).satisfied


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_assemble_is_linear_at_zero_alpha(m, seed):
    rng = np.random.default_rng(seed)
    gens = entry_generators(["x"], 2)
    zero = ScalarRep.zero(["x"], 2)
    f, g = random_rep(gens, m, rng), random_rep(gens, m, rng)
    fg = RepTuple(m, {e: f[e] + g[e] for e in gens})
    assert np.allclose(assemble(fg, zero)["x"], assemble(f, zero)["x"] + assemble(g, zero)["x"], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_interleave_permutation_intertwines(n, dims, seed):
    rng = np.random.default_rng(seed)
    alpha = ScalarRep.of(x=rng.standard_normal((n, n)))
    fs = [random_rep(entry_generators(["x"], n), m, rng) for m in dims]
    lhs, rhs = direct_sum_assembled(fs, alpha)
    q = interleave_permutation(n, dims)
    assert np.allclose(q @ q.T, np.eye(q.shape[0]))
    assert np.allclose(lhs["x"], q @ rhs["x"] @ q.T, atol=1e-13)


def test_closure_transfers_through_unfolding():
    rng = np.random.default_rng(5)
    U = unfold(PROJ, ALPHA).relation_set()
    sats = []
    for m in (1, 2):
        # a projection of size 2m, written as alpha + entries
        v = np.linalg.qr(rng.standard_normal((2 * m, m)) + 1j * rng.standard_normal((2 * m, m)))[0]
        proj = v @ v.conj().T - np.kron(np.diag([1, 0]), np.eye(m))
        sats.append(RepTuple(m, {f"p_{i + 1}_{j + 1}": proj[i * m:(i + 1) * m, j * m:(j + 1) * m]
                                 for i in range(2) for j in range(2)}))
    assert all(check(U, s).satisfied for s in sats)
    assert check(U, direct_sum(*sats), 1e-8).satisfied
