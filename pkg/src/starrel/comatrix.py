"""
Shifted comatrix unfolding
~~~~~~~~~~~~~~~~~~~~~~~~~~
Given a relation set on generators ``X`` and a scalar representation
``alpha: X -> M_n(C)``, rewrite it as a relation set on the entry
generators ``x_i_j``: a tuple ``f`` of entries satisfies the unfolded set
iff the block tuple ``x -> [alpha_ij 1 + f(x, i, j)]`` satisfies the
original one. Relations stay at block level; nothing is expanded into
scalar entry equations.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import ncexpr as nc
from .errors import AlphaNotRepresentation, BadDimension, DimMismatch, MissingEntry, UnboundGenerator
from .matrep import RepTuple, as_matrix, direct_sum
from .relations import Block, CheckReport, RelationSet, check

ALPHA_TOL = 1e-9


@dataclass(frozen=True)
class ScalarRep:
    """``alpha``: each generator assigned an ``n x n`` complex matrix."""

    n: int
    alpha: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.n < 1:
            raise BadDimension("block size must be at least one")
        fixed = {g: as_matrix(m, self.n) for g, m in self.alpha.items()}
        object.__setattr__(self, "alpha", MappingProxyType(fixed))

    @classmethod
    def of(cls, **mats) -> "ScalarRep":
        fixed = {g: as_matrix(m) for g, m in mats.items()}
        dims = {m.shape[0] for m in fixed.values()}
        if len(dims) != 1:
            raise BadDimension("alpha matrices must share one size")
        return cls(dims.pop(), fixed)

    @classmethod
    def zero(cls, generators: Sequence[str], n: int = 1) -> "ScalarRep":
        return cls(n, {g: np.zeros((n, n)) for g in generators})

    def as_rep(self) -> RepTuple:
        return RepTuple(self.n, dict(self.alpha))


def entry_generators(generators: Sequence[str], n: int) -> tuple[str, ...]:
    return tuple(nc.entry_name(g, i, j) for g in generators for i in range(1, n + 1) for j in range(1, n + 1))


def block_expression(g: str, alpha: ScalarRep) -> Block:
    """Symbolic block ``[alpha_ij 1 + x_i_j]`` for generator ``g``."""
    a = alpha.alpha[g]
    n = alpha.n
    rows = tuple(
        tuple(nc.Sum((nc.ScalarMul(a[i, j], nc.UNIT), nc.Gen(nc.entry_name(g, i + 1, j + 1)))) for j in range(n))
        for i in range(n)
    )
    return Block(rows)


@dataclass(frozen=True)
class UnfoldedRelationSet:
    base: RelationSet
    alpha: ScalarRep
    generators: tuple
    blocks: Mapping[str, Block]

    def relation_set(self) -> RelationSet:
        """Block-level relation set on the entry generators.

        Block names reuse the base generator names, so the base relations
        carry over verbatim.
        """
        if self.base.blocks:
            raise BadDimension("unfolding a relation set that already uses blocks is not supported")
        return RelationSet(self.generators, self.base.relations, dict(self.blocks))

    def check(self, f: RepTuple, tol: float = 1e-9) -> CheckReport:
        return check(self.base, assemble(f, self.alpha, self.base.generators), tol)


def unfold(R: RelationSet, alpha: ScalarRep, tol: float = ALPHA_TOL) -> UnfoldedRelationSet:
    missing = set(R.generators) - set(alpha.alpha)
    if missing:
        raise AlphaNotRepresentation(f"alpha does not assign {sorted(missing)}")
    if not check(R, alpha.as_rep(), tol).satisfied:
        raise AlphaNotRepresentation("alpha does not satisfy the relations")
    blocks = {g: block_expression(g, alpha) for g in R.generators}
    return UnfoldedRelationSet(R, alpha, entry_generators(R.generators, alpha.n), MappingProxyType(blocks))


def assemble(f: RepTuple, alpha: ScalarRep, generators: Sequence[str] | None = None) -> RepTuple:
    """Block tuple ``x -> sum_ij (alpha_ij I_m + f(x_i_j)) (x) e_ij`` of dimension ``n*m``."""
    generators = tuple(alpha.alpha) if generators is None else tuple(generators)
    n, m = alpha.n, f.dim
    out = {}
    for g in generators:
        big = np.kron(alpha.alpha[g], np.eye(m))
        for i in range(n):
            for j in range(n):
                key = nc.entry_name(g, i + 1, j + 1)
                if key not in f.gens:
                    raise MissingEntry(f"entry {key} is not assigned")
                big[i * m:(i + 1) * m, j * m:(j + 1) * m] += f.gens[key]
        out[g] = big
    return RepTuple(n * m, out)


def interleave_permutation(n: int, dims: Sequence[int]) -> np.ndarray:
    """Permutation ``Q`` with ``assemble(f_1 (+) ... (+) f_r) = Q (assemble(f_1) (+) ...) Q*``."""
    total = sum(dims)
    size = n * total
    q = np.zeros((size, size))
    offsets = np.cumsum([0] + list(dims))
    for s, m in enumerate(dims):
        for i in range(n):
            for a in range(m):
                row = i * total + offsets[s] + a      # position in the assembled direct sum
                col = n * offsets[s] + i * m + a      # position in the sum of assembled blocks
                q[row, col] = 1.0
    return q


def substitute_entries(U: UnfoldedRelationSet, mapping: Mapping[str, nc.NCExpr],
                       generators: Sequence[str] | None = None) -> RelationSet:
    """Rewrite the unfolded set over a reduced generator set.

    ``mapping`` sends every entry generator to an expression in the new
    generators. Equivalence of the result with the unfolded set is the
    caller's claim, not checked here.
    """
    missing = set(U.generators) - set(mapping)
    if missing:
        raise UnboundGenerator(f"no image for entries {sorted(missing)}")
    if generators is None:
        seen: list[str] = []
        for key in U.generators:
            for g in sorted(nc.generators(nc.as_expr(mapping[key]))):
                if g not in seen:
                    seen.append(g)
        generators = seen
    blocks = {}
    for name, b in U.blocks.items():
        rows = tuple(tuple(nc.substitute(e, mapping) for e in row) for row in b.entries)
        blocks[name] = Block(rows)
    return RelationSet(tuple(generators), U.base.relations, blocks)


def direct_sum_assembled(fs: Sequence[RepTuple], alpha: ScalarRep, generators: Sequence[str] | None = None):
    """``(assemble(f_1 (+) ...), assemble(f_1) (+) ...)`` for the intertwining test."""
    if len({tuple(sorted(f.gens)) for f in fs}) != 1:
        raise DimMismatch("entry tuples assign different generators")
    return assemble(direct_sum(*fs), alpha, generators), direct_sum(*(assemble(f, alpha, generators) for f in fs))
