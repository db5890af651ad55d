"""
Finite-dimensional C*-algebras as lists of matrix blocks
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
An algebra ``M_{n_1} + ... + M_{n_k}`` is its list of block sizes; closed
two-sided ideals are sets of block indices; quotients drop blocks. This
makes the pushout of two quotient maps, its kernel/image identity and the
lifting of compatible pairs (and of coherent sequences through a tower of
such pushouts) exact bookkeeping.

Block indices are 1-based throughout, matching the usual ``{1, ..., k}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BadIndex, DimMismatch, IncompatiblePair, NotCoherent, NotSurjective
from .matrep import as_matrix, matrix_from_json, matrix_to_json


@dataclass(frozen=True)
class FDAlgebra:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if any(b < 1 for b in blocks):
            raise DimMismatch("block sizes must be positive")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def indices(self) -> frozenset[int]:
        return frozenset(range(1, self.k + 1))

    def zero(self) -> "FDElement":
        return FDElement(self, tuple(np.zeros((n, n), dtype=np.complex128) for n in self.blocks))

    def random_element(self, rng: np.random.Generator, integer: bool = False) -> "FDElement":
        total = sum(n * n for n in self.blocks)
        raw = rng.integers(-5, 6, (2, total)) if integer else rng.standard_normal((2, total))
        flat = raw[0] + 1j * raw[1]
        flat.setflags(write=False)
        mats, start = [], 0
        for n in self.blocks:
            mats.append(flat[start:start + n * n].reshape(n, n))
            start += n * n
        return FDElement(self, tuple(mats))

    def to_json(self) -> dict:
        return {"blocks": list(self.blocks)}

    @classmethod
    def from_json(cls, obj: dict) -> "FDAlgebra":
        return cls(tuple(obj["blocks"]))


def _frozen_block(m, n: int) -> np.ndarray:
    if isinstance(m, np.ndarray) and m.dtype == np.complex128 and m.shape == (n, n) and not m.flags.writeable:
        return m
    return as_matrix(m, n)


@dataclass(frozen=True)
class FDElement:
    algebra: FDAlgebra
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != self.algebra.k:
            raise DimMismatch(f"expected {self.algebra.k} blocks, got {len(self.blocks)}")
        object.__setattr__(self, "blocks", tuple(_frozen_block(m, n) for m, n in zip(self.blocks, self.algebra.blocks)))

    def __eq__(self, other):
        if not isinstance(other, FDElement):
            return NotImplemented
        return self.algebra == other.algebra and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))

    __hash__ = None

    def __add__(self, other: "FDElement") -> "FDElement":
        return FDElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "FDElement") -> "FDElement":
        return FDElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, other: "FDElement") -> "FDElement":
        return FDElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def is_zero(self) -> bool:
        return all(not np.any(m) for m in self.blocks)

    def support(self) -> frozenset[int]:
        return frozenset(i + 1 for i, m in enumerate(self.blocks) if np.any(m))

    def to_json(self) -> list:
        return [matrix_to_json(m) for m in self.blocks]

    @classmethod
    def from_json(cls, algebra: FDAlgebra, obj: list) -> "FDElement":
        return cls(algebra, tuple(matrix_from_json(m) for m in obj))


@dataclass(frozen=True)
class BlockIdeal:
    indices: frozenset

    def __post_init__(self):
        object.__setattr__(self, "indices", frozenset(int(i) for i in self.indices))

    @classmethod
    def of(cls, *indices: int) -> "BlockIdeal":
        return cls(frozenset(indices))

    def __or__(self, other: "BlockIdeal") -> "BlockIdeal":
        return BlockIdeal(self.indices | other.indices)

    def validate(self, algebra: FDAlgebra) -> None:
        bad = self.indices - algebra.indices()
        if bad:
            raise BadIndex(f"indices {sorted(bad)} are not blocks of {list(algebra.blocks)}")


@dataclass(frozen=True)
class BlockMap:
    """Block-selection homomorphism: target block ``t`` is source block ``kept[t]``.

    Surjective exactly when no source block is selected twice.
    """

    source: FDAlgebra
    kept: tuple

    def __post_init__(self):
        kept = tuple(int(i) for i in self.kept)
        object.__setattr__(self, "kept", kept)
        BlockIdeal(frozenset(kept)).validate(self.source)

    @cached_property
    def target(self) -> FDAlgebra:
        return FDAlgebra(tuple(self.source.blocks[i - 1] for i in self.kept))

    @property
    def surjective(self) -> bool:
        return len(set(self.kept)) == len(self.kept)

    def kernel(self) -> BlockIdeal:
        return BlockIdeal(self.source.indices() - set(self.kept))

    def __call__(self, a: FDElement) -> FDElement:
        if a.algebra != self.source:
            raise DimMismatch("element does not live in the map's source")
        return FDElement(self.target, tuple(a.blocks[i - 1] for i in self.kept))

    def then(self, after: "BlockMap") -> "BlockMap":
        """``after o self``."""
        if after.source != self.target:
            raise DimMismatch("maps do not compose")
        return BlockMap(self.source, tuple(self.kept[i - 1] for i in after.kept))

    def image_of(self, ideal: BlockIdeal) -> BlockIdeal:
        """Image of a block ideal, in target indexing (for surjective maps)."""
        return BlockIdeal(frozenset(t + 1 for t, i in enumerate(self.kept) if i in ideal.indices))


def quotient(A: FDAlgebra, I: BlockIdeal) -> tuple[FDAlgebra, BlockMap]:
    """``A/I`` and the quotient map, which forgets the blocks in ``I``."""
    I.validate(A)
    q = BlockMap(A, tuple(i for i in range(1, A.k + 1) if i not in I.indices))
    return q.target, q


@dataclass(frozen=True)
class PushoutSquare:
    """``C -> C/K`` (alpha), ``C -> C/J`` (beta), ``C/J -> X`` (gamma), ``C/K -> X`` (delta)."""

    C: FDAlgebra
    J: BlockIdeal
    K: BlockIdeal
    alpha: BlockMap
    beta: BlockMap
    gamma: BlockMap
    delta: BlockMap

    @property
    def A(self) -> FDAlgebra:
        return self.alpha.target

    @property
    def B(self) -> FDAlgebra:
        return self.beta.target

    @property
    def X(self) -> FDAlgebra:
        return self.gamma.target

    def describe(self) -> dict:
        return {"C": list(self.C.blocks), "J": sorted(self.J.indices), "K": sorted(self.K.indices),
                "A=C/K": list(self.A.blocks), "B=C/J": list(self.B.blocks), "X=C/(J+K)": list(self.X.blocks),
                "alpha": list(self.alpha.kept), "beta": list(self.beta.kept),
                "gamma": list(self.gamma.kept), "delta": list(self.delta.kept)}


def _induced(source_map: BlockMap, drop: BlockIdeal) -> BlockMap:
    # map out of source_map.target dropping the (original-index) blocks in `drop`
    return BlockMap(source_map.target, tuple(t + 1 for t, i in enumerate(source_map.kept) if i not in drop.indices))


def pushout_of_quotients(C: FDAlgebra, J: BlockIdeal, K: BlockIdeal) -> PushoutSquare:
    J.validate(C)
    K.validate(C)
    _, alpha = quotient(C, K)
    _, beta = quotient(C, J)
    gamma = _induced(beta, K)
    delta = _induced(alpha, J)
    return PushoutSquare(C, J, K, alpha, beta, gamma, delta)


def verify_square(sq: PushoutSquare, samples: int = 10, seed: int = 0) -> dict:
    """Commutativity, surjectivity of gamma/delta, and ``X = C/(J+K)``."""
    structural = sq.alpha.then(sq.delta).kept == sq.beta.then(sq.gamma).kept
    rng = np.random.default_rng(seed)
    numeric = all(sq.delta(sq.alpha(c)) == sq.gamma(sq.beta(c))
                  for c in (sq.C.random_element(rng) for _ in range(samples)))
    expected_x, _ = quotient(sq.C, sq.J | sq.K)
    return {"commutes": structural and numeric,
            "gamma_surjective": sq.gamma.surjective,
            "delta_surjective": sq.delta.surjective,
            "is_quotient_by_sum": sq.X == expected_x}


def verify_kernel_image(sq: PushoutSquare, samples: int = 10, seed: int = 0) -> dict:
    """``alpha(ker beta) = ker delta``, structurally and on random elements."""
    image = sq.alpha.image_of(sq.beta.kernel())
    ker_delta = sq.delta.kernel()
    structural = image == ker_delta
    rng = np.random.default_rng(seed)
    forward = backward = True
    for _ in range(samples):
        c = sq.C.random_element(rng)
        # project onto ker beta = blocks in J
        c = FDElement(sq.C, tuple(m if i + 1 in sq.J.indices else np.zeros_like(m) for i, m in enumerate(c.blocks)))
        forward &= sq.delta(sq.alpha(c)).is_zero()
        a = sq.A.random_element(rng)
        a = FDElement(sq.A, tuple(m if i + 1 in ker_delta.indices else np.zeros_like(m) for i, m in enumerate(a.blocks)))
        lifted = _section(sq.alpha, a)
        backward &= sq.beta(lifted).is_zero() and sq.alpha(lifted) == a
    return {"passed": bool(structural and forward and backward), "structural": structural,
            "alpha_ker_beta": sorted(image.indices), "ker_delta": sorted(ker_delta.indices),
            "forward": bool(forward), "backward": bool(backward)}


def _section(q: BlockMap, a: FDElement) -> FDElement:
    """Preimage under a surjective block map with zeros on the kernel."""
    mats = [np.zeros((n, n), dtype=np.complex128) for n in q.source.blocks]
    for t, i in enumerate(q.kept):
        mats[i - 1] = a.blocks[t]
    return FDElement(q.source, tuple(mats))


def lift_pair(sq: PushoutSquare, a: FDElement, b: FDElement) -> FDElement:
    """``c`` in ``C`` with ``alpha(c) = a`` and ``beta(c) = b``; zero on ``J`` and ``K`` together."""
    if a.algebra != sq.A or b.algebra != sq.B:
        raise DimMismatch("a must lie in C/K and b in C/J")
    if sq.delta(a) != sq.gamma(b):
        raise IncompatiblePair("delta(a) differs from gamma(b)")
    from_a = {i: t for t, i in enumerate(sq.alpha.kept)}
    from_b = {i: t for t, i in enumerate(sq.beta.kept)}
    mats = []
    for i, n in enumerate(sq.C.blocks, start=1):
        if i in from_a:
            mats.append(a.blocks[from_a[i]])
        elif i in from_b:
            mats.append(b.blocks[from_b[i]])
        else:
            mats.append(np.zeros((n, n), dtype=np.complex128))
    return FDElement(sq.C, tuple(mats))


def random_compatible_pair(sq: PushoutSquare, rng: np.random.Generator, integer: bool = True):
    """Images of two independent elements of ``C`` glued on ``X``."""
    c = sq.C.random_element(rng, integer)
    c2 = sq.C.random_element(rng, integer)
    mats = tuple(m if (i + 1) in sq.J.indices | sq.K.indices else c.blocks[i] for i, m in enumerate(c2.blocks))
    return sq.alpha(c), sq.beta(FDElement(sq.C, mats))


# --------------------------------------------------------------------------
# towers


@dataclass(frozen=True)
class PushoutTower:
    """Squares ``n = 1..N-1``: ``C = A_{n+1}``, ``alpha = A_{n+1} -> A_n``,
    ``beta = rho_{n+1}``, ``gamma = B_{n+1} -> B_n``, ``delta = rho_n``.
    """

    squares: tuple

    def __post_init__(self):
        squares = tuple(self.squares)
        object.__setattr__(self, "squares", squares)
        for lower, upper in zip(squares, squares[1:]):
            if upper.A != lower.C or upper.delta.target != lower.B:
                raise DimMismatch("adjacent squares do not share A_n and B_n")
            if upper.delta.kernel() != lower.beta.kernel():
                raise DimMismatch("rho_n differs between adjacent squares")

    @property
    def depth(self) -> int:
        return len(self.squares) + 1

    def A(self, n: int) -> FDAlgebra:
        return self.squares[0].A if n == 1 else self.squares[n - 2].C

    def B(self, n: int) -> FDAlgebra:
        return self.squares[0].X if n == 1 else self.squares[n - 2].B

    def rho(self, n: int) -> BlockMap:
        return self.squares[0].delta if n == 1 else self.squares[n - 2].beta

    def bond_B(self, n: int) -> BlockMap:
        """``beta_{n+1,n}: B_{n+1} -> B_n``."""
        return self.squares[n - 1].gamma

    def bond_A(self, n: int) -> BlockMap:
        return self.squares[n - 1].alpha


def tower_from_top(C: FDAlgebra, kernels: Sequence[BlockIdeal], J: BlockIdeal) -> PushoutTower:
    """Tower with ``A_N = C``, bonding kernels ``kernels[0]`` (at the top) downward, ``ker rho_N = J``."""
    squares = []
    top, j = C, J
    for K in kernels:
        sq = pushout_of_quotients(top, j, K)
        squares.append(sq)
        top, j = sq.A, sq.alpha.image_of(j)
    return PushoutTower(tuple(reversed(squares)))


def random_tower(rng: np.random.Generator, depth: int, max_blocks: int = 8, max_dim: int = 3) -> PushoutTower:
    if depth < 2:
        raise DimMismatch("a tower needs depth at least two")
    k = int(rng.integers(1, max_blocks + 1))
    C = FDAlgebra(tuple(int(d) for d in rng.integers(1, max_dim + 1, k)))
    alive = list(range(1, k + 1))
    kernels = []
    for _ in range(depth - 1):
        drop = [i for i in alive if rng.random() < 0.25]
        kernels.append(drop)
        alive = [i for i in alive if i not in drop]
    # re-express each kernel in the indexing of the algebra it lives in
    reindexed, current = [], list(range(1, k + 1))
    for drop in kernels:
        reindexed.append(BlockIdeal(frozenset(current.index(i) + 1 for i in drop)))
        current = [i for i in current if i not in drop]
    J = BlockIdeal(frozenset(i for i in range(1, k + 1) if rng.random() < 0.3))
    return tower_from_top(C, reindexed, J)


def coherent_sequence(tower: PushoutTower, rng: np.random.Generator, integer: bool = True) -> list[FDElement]:
    """Random coherent ``b_1..b_N``: push a random top element down the B column."""
    N = tower.depth
    top = tower.B(N).random_element(rng, integer)
    bs = [top]
    for n in range(N - 1, 0, -1):
        bs.append(tower.bond_B(n)(bs[-1]))
    return bs[::-1]


def lift_coherent_sequence(tower: PushoutTower, b: Sequence[FDElement], depth: int | None = None) -> list[FDElement]:
    """Coherent ``a_1..a_N`` with ``rho_n(a_n) = b_n``, one free choice then repeated lifting."""
    N = len(b) if depth is None else depth
    if N > tower.depth or N > len(b) or N < 1:
        raise DimMismatch(f"depth {N} exceeds the tower or the sequence")
    for n in range(1, N + 1):
        if not tower.rho(n).surjective:
            raise NotSurjective(f"rho_{n} is not surjective")
    for n in range(1, N):
        if not (tower.bond_A(n).surjective and tower.bond_B(n).surjective):
            raise NotSurjective(f"bonding maps at level {n} are not surjective")
        if tower.bond_B(n)(b[n]) != b[n - 1]:
            raise NotCoherent(f"b_{n + 1} does not map to b_{n}")
    a = [_section(tower.rho(1), b[0])]
    for n in range(1, N):
        a.append(lift_pair(tower.squares[n - 1], a[-1], b[n]))
    return a


def all_ideals(k: int) -> Iterable[BlockIdeal]:
    for mask in range(1 << k):
        yield BlockIdeal(frozenset(i + 1 for i in range(k) if mask >> i & 1))
