import numpy as np
import pytest

from starrel.errors import BadIndex, IncompatiblePair, NotCoherent
from starrel.fdca import (BlockIdeal, BlockMap, FDAlgebra, FDElement, all_ideals, coherent_sequence,
                          lift_coherent_sequence, lift_pair, pushout_of_quotients, quotient, random_compatible_pair,
                          random_tower, tower_from_top, verify_kernel_image, verify_square)

C = FDAlgebra((2, 3, 4))


def element(algebra, *values):
    return FDElement(algebra, tuple(v * np.eye(n) for v, n in zip(values, algebra.blocks)))


def test_quotient_examples():
    assert quotient(C, BlockIdeal.of(1))[0] == FDAlgebra((3, 4))
    Q, q = quotient(C, BlockIdeal.of())
    assert Q == C and q.kept == (1, 2, 3)
    assert quotient(C, BlockIdeal.of(1, 2, 3))[0].k == 0
    with pytest.raises(BadIndex):
        quotient(C, BlockIdeal.of(4))


def test_pushout_worked_example():
    sq = pushout_of_quotients(C, BlockIdeal.of(1), BlockIdeal.of(2))
    assert sq.A == FDAlgebra((2, 4)) and sq.B == FDAlgebra((3, 4)) and sq.X == FDAlgebra((4,))
    assert sq.gamma.kept == (2,) and sq.delta.kept == (2,)
    checks = verify_square(sq)
    assert all(checks.values())
    ki = verify_kernel_image(sq)
    assert ki["passed"] and ki["ker_delta"] == [1]


def test_pushout_trivial_cases():
    sq = pushout_of_quotients(C, BlockIdeal.of(), BlockIdeal.of())
    assert sq.X == C and all(m.kept == (1, 2, 3) for m in (sq.alpha, sq.beta, sq.gamma, sq.delta))
    assert pushout_of_quotients(C, BlockIdeal.of(1, 3), BlockIdeal.of(2)).X.k == 0
    assert verify_kernel_image(pushout_of_quotients(C, BlockIdeal.of(), BlockIdeal.of(2)))["passed"]
    assert verify_kernel_image(pushout_of_quotients(C, BlockIdeal.of(3), BlockIdeal.of(3)))["passed"]


def test_lift_pair_blockwise():
    sq = pushout_of_quotients(C, BlockIdeal.of(1), BlockIdeal.of(2))
    a = element(sq.A, 5, 7)
    b = element(sq.B, 6, 7)
    c = lift_pair(sq, a, b)
    assert c == element(C, 5, 6, 7)
    with pytest.raises(IncompatiblePair):
        lift_pair(sq, a, element(sq.B, 6, 8))


def test_lift_pair_identity_square():
    sq = pushout_of_quotients(C, BlockIdeal.of(), BlockIdeal.of())
    a = C.random_element(np.random.default_rng(0))
    assert lift_pair(sq, a, a) == a


def _oracle_x(blocks, J, K):
    return tuple(n for i, n in enumerate(blocks, start=1) if i not in J and i not in K)


@pytest.mark.parametrize("blocks", [(1,), (2, 1), (1, 2, 3), (3, 1, 2, 2), (1, 2, 1, 3, 2), (2, 2, 1, 1, 3, 1)])
def test_pushout_exhaustive(blocks):
    C = FDAlgebra(blocks)
    rng = np.random.default_rng(len(blocks))
    for J in all_ideals(C.k):
        for K in all_ideals(C.k):
            sq = pushout_of_quotients(C, J, K)
            assert sq.X.blocks == _oracle_x(blocks, J.indices, K.indices)
            assert sq.gamma.surjective and sq.delta.surjective
            assert sq.alpha.image_of(sq.beta.kernel()) == sq.delta.kernel()
            for _ in range(3):
                a, b = random_compatible_pair(sq, rng)
                c = lift_pair(sq, a, b)
                assert sq.alpha(c) == a and sq.beta(c) == b


def test_block_map_composition_and_surjectivity():
    f = BlockMap(C, (3, 1))
    g = BlockMap(f.target, (2,))
    assert f.then(g).kept == (1,)
    assert not BlockMap(C, (1, 1)).surjective


def test_constant_tower():
    T = tower_from_top(C, [BlockIdeal.of(), BlockIdeal.of()], BlockIdeal.of())
    b = coherent_sequence(T, np.random.default_rng(0))
    a = lift_coherent_sequence(T, b)
    assert all(x == a[0] for x in a)


def test_zero_sequence_lifts_to_zero():
    T = random_tower(np.random.default_rng(4), 4)
    b = [T.B(n).zero() for n in range(1, 5)]
    assert all(x.is_zero() for x in lift_coherent_sequence(T, b))


@pytest.mark.parametrize("seed", range(10))
def test_coherent_lifting(seed):
    rng = np.random.default_rng(seed)
    T = random_tower(rng, int(rng.integers(2, 9)))
    b = coherent_sequence(T, rng)
    a = lift_coherent_sequence(T, b)
    for n in range(1, T.depth + 1):
        assert T.rho(n)(a[n - 1]) == b[n - 1]
    for n in range(1, T.depth):
        assert T.bond_A(n)(a[n]) == a[n - 1]


def test_incoherent_sequence_rejected():
    T = tower_from_top(FDAlgebra((1, 2)), [BlockIdeal.of()], BlockIdeal.of())
    b = coherent_sequence(T, np.random.default_rng(0))
    b[0] = b[0] + element(T.B(1), 1, 1)
    with pytest.raises(NotCoherent):
        lift_coherent_sequence(T, b)


def test_json_round_trip():
    a = C.random_element(np.random.default_rng(2))
    assert FDAlgebra.from_json(C.to_json()) == C
    assert FDElement.from_json(C, a.to_json()) == a
