"""
C*-relations on matrix tuples
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Relation predicates (equal-to-zero, norm bounds, positivity and order
chains), satisfaction checks with per-relation residuals, collapsing a
finite family of equations into one positive element, and a harness that
tests the closure axioms (zero object, reflection along injections,
pushforward, finite and bounded products) on concrete matrix tuples.

Everything here is evidence at matrix scale; no statement about arbitrary
C*-algebras is decided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import ncexpr as nc
from .errors import (
    DimMismatch,
    DomainMismatch,
    EmptyList,
    MalformedRelation,
    NonpositiveWeight,
    NotInjective,
    StarRelError,
    UnboundGenerator,
)
from .matrep import (
    DEFAULT_TOL,
    MatHom,
    RepTuple,
    dagger,
    direct_sum,
    evaluate_arrays,
    op_norm,
    pushforward,
)

# closure conclusions are checked at this multiple of the hypothesis tolerance
INFLATION = 10.0


def strict_margin(bound: float) -> float:
    """Slack used to read ``norm(e) < c`` as ``norm(e) <= c - eps``."""
    return 1e-9 * (1 + bound)


# --------------------------------------------------------------------------
# relation kinds


@dataclass(frozen=True)
class EqZero:
    expr: nc.NCExpr

    def __post_init__(self):
        object.__setattr__(self, "expr", nc.normalize(nc.as_expr(self.expr)))

    def expressions(self):
        return (self.expr,)


@dataclass(frozen=True)
class NormLe:
    expr: nc.NCExpr
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "expr", nc.normalize(nc.as_expr(self.expr)))
        object.__setattr__(self, "bound", float(self.bound))
        if not self.bound >= 0:
            raise MalformedRelation("norm bounds must be non-negative")

    def expressions(self):
        return (self.expr,)


@dataclass(frozen=True)
class NormLt(NormLe):
    """Strict norm bound; not a closed relation."""


@dataclass(frozen=True)
class Psd:
    expr: nc.NCExpr

    def __post_init__(self):
        object.__setattr__(self, "expr", nc.normalize(nc.as_expr(self.expr)))

    def expressions(self):
        return (self.expr,)


@dataclass(frozen=True)
class OrderChain:
    """``e0 <= e1 <= ... <= ek``; use ``0``/``1`` literals for the endpoints."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(nc.normalize(nc.as_expr(t)) for t in self.terms)
        if len(terms) < 2:
            raise MalformedRelation("an order chain needs at least two terms")
        object.__setattr__(self, "terms", terms)

    def expressions(self):
        return self.terms

    def desugar(self) -> tuple[Psd, ...]:
        return tuple(Psd(hi - lo) for lo, hi in zip(self.terms, self.terms[1:]))


Relation = EqZero | NormLe | NormLt | Psd | OrderChain


def order_chain(*terms) -> OrderChain:
    return OrderChain(tuple(terms))


@dataclass(frozen=True)
class Block:
    """Square matrix of expressions, used as a block-valued name in relations."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(nc.normalize(nc.as_expr(e)) for e in row) for row in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise MalformedRelation("a block must be a non-empty square matrix of expressions")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    def generators(self) -> frozenset[str]:
        return frozenset().union(*(nc.generators(e) for row in self.entries for e in row))

    def mentions_unit(self) -> bool:
        return any(nc.mentions_unit(e) for row in self.entries for e in row)


@dataclass(frozen=True)
class RelationSet:
    generators: tuple
    relations: tuple = ()
    blocks: Mapping[str, Block] = field(default_factory=dict)

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise MalformedRelation("duplicate generator")
        for g in gens:
            nc.Gen(g)
        blocks = dict(self.blocks)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "blocks", MappingProxyType(blocks))
        clash = set(blocks) & set(gens)
        if clash:
            raise MalformedRelation(f"names used both as generator and block: {sorted(clash)}")
        for name, b in blocks.items():
            stray = b.generators() - set(gens)
            if stray:
                raise MalformedRelation(f"block {name} uses undeclared generators {sorted(stray)}")
        for rel in self.relations:
            used = frozenset().union(*(nc.generators(e) for e in rel.expressions()))
            stray = used - set(gens) - set(blocks)
            if stray:
                raise MalformedRelation(f"undeclared generators {sorted(stray)}")
            named = used & set(blocks)
            if named and (used - named):
                raise MalformedRelation("a relation may not mix blocks with plain generators")
            if len({blocks[b].n for b in named}) > 1:
                raise MalformedRelation("blocks in one relation must share their size")

    def __eq__(self, other):
        if not isinstance(other, RelationSet):
            return NotImplemented
        return (self.generators == other.generators and self.relations == other.relations
                and dict(self.blocks) == dict(other.blocks))

    __hash__ = None

    def intersect(self, other: "RelationSet") -> "RelationSet":
        """Union of generators, concatenation of relations."""
        gens = self.generators + tuple(g for g in other.generators if g not in self.generators)
        blocks = dict(self.blocks)
        for k, b in other.blocks.items():
            if k in blocks and blocks[k] != b:
                raise MalformedRelation(f"block {k} defined differently on each side")
            blocks[k] = b
        return RelationSet(gens, self.relations + other.relations, blocks)

    __and__ = intersect

    def block_names(self, rel) -> frozenset[str]:
        used = frozenset().union(*(nc.generators(e) for e in rel.expressions()))
        return used & frozenset(self.blocks)

    def mentions_unit(self, rel=None) -> bool:
        rels = self.relations if rel is None else (rel,)
        for r in rels:
            if any(nc.mentions_unit(e) for e in r.expressions()):
                return True
            if any(self.blocks[b].mentions_unit() for b in self.block_names(r)):
                return True
        return False


# --------------------------------------------------------------------------
# evaluation of relations


def _relation_values(R: RelationSet, rel, arrays, dim, batch=(), lenient=False, tol=DEFAULT_TOL):
    """Matrices for each expression of ``rel`` plus the lenient penalty."""
    names = R.block_names(rel)
    penalty = np.zeros(batch)
    if names:
        n = R.blocks[next(iter(names))].n
        ambient = {}
        for name in names:
            big = np.zeros(tuple(batch) + (n * dim, n * dim), dtype=np.complex128)
            for i, row in enumerate(R.blocks[name].entries):
                for j, entry in enumerate(row):
                    val, pen = evaluate_arrays(entry, arrays, dim, batch, tol, lenient)
                    big[..., i * dim:(i + 1) * dim, j * dim:(j + 1) * dim] = val
                    penalty = penalty + pen
            ambient[name] = big
        arrays, dim = ambient, n * dim
    values = []
    for e in rel.expressions():
        val, pen = evaluate_arrays(e, arrays, dim, batch, tol, lenient)
        values.append(np.broadcast_to(val, tuple(batch) + (dim, dim)))
        penalty = penalty + pen
    return values, penalty


def _psd_residual(m) -> float:
    if m.shape[-1] == 0:
        return 0.0
    lam = float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])
    return max(0.0, -lam) + op_norm(m - dagger(m))


def _residual(rel, values) -> float:
    if isinstance(rel, OrderChain):
        return max(_psd_residual(hi - lo) for lo, hi in zip(values, values[1:]))
    v = values[0]
    if isinstance(rel, EqZero):
        return op_norm(v)
    if isinstance(rel, NormLt):
        return max(0.0, op_norm(v) - (rel.bound - strict_margin(rel.bound)))
    if isinstance(rel, NormLe):
        return max(0.0, op_norm(v) - rel.bound)
    if isinstance(rel, Psd):
        return _psd_residual(v)
    raise TypeError(f"unknown relation {rel!r}")


def _neg_part_sq(m):
    h = (m + dagger(m)) / 2
    lam = np.linalg.eigvalsh(h)
    skew = (m - dagger(m)) / 2
    return np.sum(np.clip(-lam, 0, None) ** 2, axis=-1) + np.sum(np.abs(skew) ** 2, axis=(-2, -1))


def _smooth(rel, values):
    if values[0].shape[-1] == 0:
        return np.zeros(values[0].shape[:-2])
    if isinstance(rel, OrderChain):
        return sum(_neg_part_sq(hi - lo) for lo, hi in zip(values, values[1:]))
    v = values[0]
    if isinstance(rel, EqZero):
        return np.sum(np.abs(v) ** 2, axis=(-2, -1))
    if isinstance(rel, NormLe):
        cap = rel.bound - (strict_margin(rel.bound) if isinstance(rel, NormLt) else 0.0)
        s = np.linalg.svd(v, compute_uv=False)
        return np.sum(np.clip(s - cap, 0, None) ** 2, axis=-1)
    if isinstance(rel, Psd):
        return _neg_part_sq(v)
    raise TypeError(f"unknown relation {rel!r}")


def smooth_objective(R: RelationSet, arrays: Mapping[str, np.ndarray], dim: int, batch=()) -> np.ndarray:
    """Sum of squared (hinge) residuals, defined everywhere.

    Equations use the squared Frobenius norm, which dominates the operator
    norm; inequalities and positivity use squared negative parts. Func-node
    precondition violations add their squared size instead of raising.
    """
    total = np.zeros(batch)
    if dim == 0:
        return total
    for rel in R.relations:
        values, penalty = _relation_values(R, rel, arrays, dim, batch, lenient=True)
        total = total + _smooth(rel, values) + penalty
    return total


@dataclass(frozen=True)
class CheckReport:
    satisfied: bool
    residuals: tuple
    tolerance: float
    flags: tuple = ()
    relation_ok: tuple = ()

    def to_json(self) -> dict:
        return {"satisfied": self.satisfied,
                "residuals": [r if math.isfinite(r) else "inf" for r in self.residuals],
                "tolerance": self.tolerance,
                "flags": list(self.flags)}


def _require_assigned(R: RelationSet, rep: RepTuple):
    missing = set(R.generators) - set(rep.gens)
    if missing:
        raise UnboundGenerator(f"tuple does not assign {sorted(missing)}")


def check(R: RelationSet, rep: RepTuple, tol: float = DEFAULT_TOL) -> CheckReport:
    """Evaluate every relation of ``R`` at ``rep``.

    Equations and closed inequalities hold when their residual is at most
    ``tol``; strict norm bounds hold only with zero residual against
    ``c - eps``. Evaluation failures count as residual ``inf``.
    """
    _require_assigned(R, rep)
    flags = []
    if any(isinstance(r, NormLt) for r in R.relations):
        flags.append("strict_inequality")
    if rep.dim == 0:
        flags.append("vacuous")
        if R.mentions_unit():
            flags.append("vacuous_unit")
        zeros = tuple(0.0 for _ in R.relations)
        return CheckReport(True, zeros, tol, tuple(flags), tuple(True for _ in R.relations))
    residuals, oks = [], []
    for rel in R.relations:
        try:
            values, _ = _relation_values(R, rel, rep.gens, rep.dim, tol=tol)
            r = _residual(rel, values)
        except StarRelError as exc:
            flags.append(f"eval_error:{type(exc).__name__}")
            r = math.inf
        residuals.append(r)
        oks.append(r == 0.0 if isinstance(rel, NormLt) else r <= tol)
    return CheckReport(all(oks), tuple(residuals), tol, tuple(flags), tuple(oks))


def residual(R: RelationSet, rep: RepTuple) -> float:
    """Total check residual; zero exactly on representations."""
    return float(sum(check(R, rep, 0.0).residuals))


# --------------------------------------------------------------------------
# collapsing a family of equations


def combine_to_single(gs: Sequence[nc.NCExpr], weights: Sequence[float] | None = None) -> nc.NCExpr:
    """``sum_k w_k g_k* g_k``: vanishes exactly where every ``g_k`` does."""
    gs = [nc.as_expr(g) for g in gs]
    if not gs:
        raise EmptyList("need at least one expression")
    weights = [1.0] * len(gs) if weights is None else [float(w) for w in weights]
    if len(weights) != len(gs):
        raise ValueError("one weight per expression")
    if any(not w > 0 for w in weights):
        raise NonpositiveWeight("weights must be positive")
    terms = [nc.ScalarMul(w, nc.Product((nc.adjoint(g), g))) for w, g in zip(weights, gs)]
    return nc.normalize(nc.Sum(tuple(terms)))


def combined_tolerances(weights: Sequence[float], tol: float) -> list[float]:
    """Bounds on each ``norm(g_k)`` implied by ``norm(g) <= tol``.

    Every summand is positive, so ``w_k norm(g_k)**2 <= norm(g)``.
    """
    return [math.sqrt(tol / w) for w in weights]


# --------------------------------------------------------------------------
# closure-axiom harness


@dataclass(frozen=True)
class HarnessResult:
    passed: bool
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {"passed": self.passed, "flags": list(self.flags), "details": _jsonable(self.details)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def check_zero_object(R: RelationSet) -> HarnessResult:
    """The unique map into the zero algebra must be a representation."""
    report = check(R, RepTuple.zero(R.generators))
    flags = ["vacuous_unit"] if R.mentions_unit() else []
    return HarnessResult(report.satisfied, tuple(flags))


def _unit_flags(R: RelationSet, phi: MatHom) -> list[str]:
    if R.mentions_unit() and not phi.unital:
        return ["non_unital_pushforward"]
    return []


def check_pushforward_closure(R: RelationSet, rep: RepTuple, phi: MatHom, tol: float = DEFAULT_TOL) -> HarnessResult:
    if phi.source_dim != rep.dim:
        raise DimMismatch("map source does not match the tuple dimension")
    flags = _unit_flags(R, phi)
    before = check(R, rep, tol)
    if not before.satisfied:
        return HarnessResult(True, tuple(flags + ["no_witness"]))
    after = check(R, pushforward(rep, phi), INFLATION * tol)
    if not after.satisfied:
        flags.append("counterexample")
        if "non_unital_pushforward" in flags:
            flags.append("expected_failure")
    return HarnessResult(after.satisfied, tuple(flags), {"residuals": after.residuals})


def check_injective_reflection(R: RelationSet, rep: RepTuple, phi: MatHom, tol: float = DEFAULT_TOL) -> HarnessResult:
    if not phi.injective:
        raise NotInjective("reflection needs a map with multiplicity at least one")
    if phi.source_dim != rep.dim:
        raise DimMismatch("map source does not match the tuple dimension")
    flags = _unit_flags(R, phi)
    image = check(R, pushforward(rep, phi), tol)
    if not image.satisfied:
        return HarnessResult(True, tuple(flags + ["no_witness"]))
    source = check(R, rep, INFLATION * tol)
    if not source.satisfied:
        flags.append("counterexample")
    return HarnessResult(source.satisfied, tuple(flags), {"residuals": source.residuals})


def _norm_sup(reps: Sequence[RepTuple]) -> dict[str, float]:
    gens = sorted(reps[0].gens)
    return {g: max(op_norm(r.gens[g]) for r in reps) for g in gens}


def _strict_gaps(R: RelationSet, reps: Sequence[RepTuple]) -> list[float]:
    gaps = []
    for rel in R.relations:
        if isinstance(rel, NormLt):
            worst = max(op_norm(_relation_values(R, rel, r.gens, r.dim)[0][0]) for r in reps)
            gaps.append(rel.bound - worst)
    return gaps


def check_finite_products(R: RelationSet, reps: Sequence[RepTuple], tol: float = DEFAULT_TOL) -> HarnessResult:
    """Direct sum of representations must again be a representation."""
    reps = list(reps)
    if not reps:
        raise EmptyList("need at least one summand")
    domain = reps[0].domain()
    if any(r.domain() != domain for r in reps):
        raise DomainMismatch("summands assign different generators")
    flags = []
    failing = [i for i, r in enumerate(reps) if not check(R, r, tol).satisfied]
    if failing:
        flags.append("hypothesis_failed")
    total = check(R, direct_sum(*reps), INFLATION * tol)
    details = {"dim": sum(r.dim for r in reps), "residuals": total.residuals, "failing_summands": failing}
    if any(isinstance(rel, NormLt) for rel in R.relations):
        flags.append("non_closed_kind")
        details["strict_gaps"] = _strict_gaps(R, reps)
    passed = total.satisfied or bool(failing)
    if not total.satisfied and not failing:
        flags.append("counterexample")
    return HarnessResult(passed, tuple(flags), details)


def check_bounded_products(R: RelationSet, family: Sequence[RepTuple], tol: float = DEFAULT_TOL) -> HarnessResult:
    """Finite stand-in for the bounded product; records per-generator norm suprema."""
    result = check_finite_products(R, family, tol)
    details = dict(result.details)
    details["norm_sup"] = _norm_sup(list(family))
    return HarnessResult(result.passed, result.flags, details)


@dataclass
class AxiomReport:
    results: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for rs in self.results.values() for r in rs)

    def flags(self) -> set[str]:
        return {f for rs in self.results.values() for r in rs for f in r.flags}

    def to_json(self) -> dict:
        return {"passed": self.passed,
                "axioms": {k: [r.to_json() for r in rs] for k, rs in self.results.items()}}


def run_axiom_harness(R: RelationSet, witnesses: Iterable[RepTuple], trials: int = 5, seed: int = 0,
                      tol: float = DEFAULT_TOL) -> AxiomReport:
    """Exercise C1, C2, C3 and C4f on the given tuples with random maps.

    Trial ``t`` for witness ``w`` draws from the stream ``(seed, w, t)`` so
    results do not depend on evaluation order.
    """
    witnesses = list(witnesses)
    results: dict[str, list[HarnessResult]] = {"C1": [check_zero_object(R)], "C2": [], "C3": [], "C4f": []}
    for w, rep in enumerate(witnesses):
        for t in range(trials):
            rng = np.random.default_rng([seed, w, t])
            k = int(rng.integers(1, 3))
            z = int(rng.integers(0, 3))
            phi = MatHom.random(rep.dim, k, z, rng)
            results["C2"].append(check_injective_reflection(R, rep, phi, tol))
            k3 = int(rng.integers(0, 3))
            phi3 = MatHom.random(rep.dim, k3, z, rng)
            results["C3"].append(check_pushforward_closure(R, rep, phi3, tol))
    satisfiers = [r for r in witnesses if check(R, r, tol).satisfied]
    if satisfiers:
        results["C4f"].append(check_finite_products(R, satisfiers, tol))
        results["C4f"].append(check_finite_products(R, satisfiers + [RepTuple.zero(R.generators)], tol))
    return AxiomReport(results)


# --------------------------------------------------------------------------
# compactness probes


@dataclass(frozen=True)
class BoundedEvidence:
    generator: str
    max_norm_found: float
    targets_tried: tuple
    restarts: int
    max_iters: int


@dataclass(frozen=True)
class UnboundedEvidence:
    generator: str
    witnesses: tuple  # (target, RepTuple) pairs
    targets_tried: tuple


PROBE_TARGETS = (2.0, 10.0, 100.0)


def classify_probe(R: RelationSet, cfg, targets: Sequence[float] = PROBE_TARGETS) -> dict:
    """Norm-growth evidence per generator; labelled evidence, never a proof."""
    from .search import find_representation, probe_norm_bound

    found = find_representation(R, cfg)
    satisfiers = [o.rep for o in found.restart_results if o.converged]
    out = {}
    for g in R.generators:
        witnesses = []
        for m in targets:
            w = probe_norm_bound(R, g, m, cfg)
            if w is not None:
                witnesses.append((m, w))
        if witnesses and witnesses[-1][0] == targets[-1]:
            out[g] = UnboundedEvidence(g, tuple(witnesses), tuple(targets))
        else:
            norms = [op_norm(r.gens[g]) for r in satisfiers] + [op_norm(w.gens[g]) for _, w in witnesses]
            out[g] = BoundedEvidence(g, max(norms, default=0.0), tuple(targets), cfg.restarts, cfg.max_iters)
    return out
