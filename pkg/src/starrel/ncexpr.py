"""
Noncommutative *-expressions
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Expression trees over a finite generator set, with the involution, a
normal form, substitution, and the dense *-polynomial view used by the
exact oracles.

Generators are plain string tokens. Entry generators produced by the
comatrix unfolding are named ``x_i_j`` (see :func:`entry_name`).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import NonPolynomial, UnboundGenerator

GeneratorId = str

_TOKEN = re.compile(r"[A-Za-z0-9_]+\Z")
FUNCS = ("sqrt", "abs", "exp", "inv")
# sqrt/abs/exp always produce Hermitian matrices on their domain
SELF_ADJOINT_FUNCS = frozenset({"sqrt", "abs", "exp"})


def entry_name(base: str, i: int, j: int) -> str:
    """Token of the entry generator ``(base, i, j)``, 1-based indices."""
    if i < 1 or j < 1:
        raise ValueError(f"entry indices are 1-based, got ({i}, {j})")
    return f"{base}_{i}_{j}"


def split_entry_name(token: str) -> tuple[str, int, int] | None:
    parts = token.rsplit("_", 2)
    if len(parts) != 3 or not parts[0] or not parts[1].isdigit() or not parts[2].isdigit():
        return None
    return parts[0], int(parts[1]), int(parts[2])


class NCExpr:
    """Base node. Subclasses are frozen dataclasses, so trees are immutable."""

    __slots__ = ()

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, ScalarMul(-1, as_expr(other))))

    def __rsub__(self, other):
        return Sum((as_expr(other), ScalarMul(-1, self)))

    def __neg__(self):
        return ScalarMul(-1, self)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ScalarMul(other, self)
        return Product((self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ScalarMul(other, self)
        return Product((as_expr(other), self))

    @property
    def adj(self) -> "NCExpr":
        return Adjoint(self)

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True)
class Gen(NCExpr):
    name: GeneratorId

    def __post_init__(self):
        if not isinstance(self.name, str) or not _TOKEN.match(self.name):
            raise ValueError(f"invalid generator token {self.name!r}")


@dataclass(frozen=True)
class Unit(NCExpr):
    pass


@dataclass(frozen=True)
class Adjoint(NCExpr):
    arg: NCExpr


@dataclass(frozen=True)
class Sum(NCExpr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum needs at least one term")


@dataclass(frozen=True)
class Product(NCExpr):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")


@dataclass(frozen=True)
class ScalarMul(NCExpr):
    coeff: complex
    arg: NCExpr

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))


@dataclass(frozen=True)
class Func(NCExpr):
    name: str
    arg: NCExpr

    def __post_init__(self):
        if self.name not in FUNCS:
            raise ValueError(f"unknown function {self.name!r}")


UNIT = Unit()
ZERO = ScalarMul(0, UNIT)


def as_expr(value) -> NCExpr:
    if isinstance(value, NCExpr):
        return value
    if isinstance(value, (int, float, complex)):
        return ScalarMul(value, UNIT)
    if isinstance(value, str):
        return Gen(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to NCExpr")


def gens(*names: str) -> tuple[Gen, ...]:
    return tuple(Gen(n) for n in names)


def sqrt(e) -> Func:
    return Func("sqrt", as_expr(e))


def absolute(e) -> Func:
    return Func("abs", as_expr(e))


def exp(e) -> Func:
    return Func("exp", as_expr(e))


def inv(e) -> Func:
    return Func("inv", as_expr(e))


def is_zero(e: NCExpr) -> bool:
    return isinstance(e, ScalarMul) and e.coeff == 0


def generators(e: NCExpr) -> frozenset[str]:
    """All generator tokens occurring in ``e``."""
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Gen):
            out.add(node.name)
        elif isinstance(node, (Adjoint, ScalarMul, Func)):
            stack.append(node.arg)
        elif isinstance(node, Sum):
            stack.extend(node.terms)
        elif isinstance(node, Product):
            stack.extend(node.factors)
    return frozenset(out)


def mentions_unit(e: NCExpr) -> bool:
    if isinstance(e, Unit):
        return True
    if isinstance(e, (Adjoint, ScalarMul, Func)):
        return mentions_unit(e.arg)
    if isinstance(e, Sum):
        return any(mentions_unit(t) for t in e.terms)
    if isinstance(e, Product):
        return any(mentions_unit(f) for f in e.factors)
    return False


def contains_func(e: NCExpr) -> bool:
    if isinstance(e, Func):
        return True
    if isinstance(e, (Adjoint, ScalarMul)):
        return contains_func(e.arg)
    if isinstance(e, Sum):
        return any(contains_func(t) for t in e.terms)
    if isinstance(e, Product):
        return any(contains_func(f) for f in e.factors)
    return False


def size(e: NCExpr) -> int:
    if isinstance(e, (Adjoint, ScalarMul, Func)):
        return 1 + size(e.arg)
    if isinstance(e, Sum):
        return 1 + sum(size(t) for t in e.terms)
    if isinstance(e, Product):
        return 1 + sum(size(f) for f in e.factors)
    return 1


# --------------------------------------------------------------------------
# involution and normal form


def adjoint(e: NCExpr) -> NCExpr:
    """The involution, pushed down to the generators.

    ``sqrt``, ``abs`` and ``exp`` nodes are returned unchanged: on their
    domain they evaluate to Hermitian matrices.
    """
    if isinstance(e, Gen):
        return Adjoint(e)
    if isinstance(e, Adjoint):
        return e.arg
    if isinstance(e, Unit):
        return e
    if isinstance(e, Sum):
        return Sum(tuple(adjoint(t) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(adjoint(f) for f in reversed(e.factors)))
    if isinstance(e, ScalarMul):
        return ScalarMul(e.coeff.conjugate(), adjoint(e.arg))
    if isinstance(e, Func):
        if e.name in SELF_ADJOINT_FUNCS:
            return e
        return Func(e.name, adjoint(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def _terms(e: NCExpr) -> list[tuple[complex, NCExpr]]:
    # e must already be normalized
    if isinstance(e, ScalarMul):
        return [] if e.coeff == 0 else [(e.coeff, e.arg)]
    if isinstance(e, Sum):
        out = []
        for t in e.terms:
            out.extend(_terms(t))
        return out
    return [(1 + 0j, e)]


def _sort_key(core: NCExpr):
    return (-size(core), format_expr(core))


def _build_sum(terms: Iterable[tuple[complex, NCExpr]]) -> NCExpr:
    acc: dict[NCExpr, complex] = {}
    for c, core in terms:
        acc[core] = acc.get(core, 0j) + c
    items = sorted(((core, c) for core, c in acc.items() if c != 0), key=lambda kv: _sort_key(kv[0]))
    if not items:
        return ZERO
    nodes = tuple(core if c == 1 else ScalarMul(c, core) for core, c in items)
    return nodes[0] if len(nodes) == 1 else Sum(nodes)


def normalize(e: NCExpr) -> NCExpr:
    """Flatten sums and products, fold scalars, drop zero terms and unit factors.

    Like terms are collected and summands sorted, so the result is a fixed
    point: ``normalize(normalize(e)) == normalize(e)``. Products are not
    distributed over sums.
    """
    if isinstance(e, (Gen, Unit)):
        return e
    if isinstance(e, Adjoint):
        if isinstance(e.arg, Gen):
            return e
        return normalize(adjoint(e.arg))
    if isinstance(e, ScalarMul):
        if e.coeff == 0:
            return ZERO
        inner = normalize(e.arg)
        return _build_sum((e.coeff * c, core) for c, core in _terms(inner))
    if isinstance(e, Sum):
        terms = []
        for t in e.terms:
            terms.extend(_terms(normalize(t)))
        return _build_sum(terms)
    if isinstance(e, Product):
        coeff = 1 + 0j
        factors: list[NCExpr] = []
        for f in e.factors:
            nf = normalize(f)
            if is_zero(nf):
                return ZERO
            if isinstance(nf, ScalarMul):
                coeff *= nf.coeff
                nf = nf.arg
            if isinstance(nf, Unit):
                continue
            if isinstance(nf, Product):
                factors.extend(nf.factors)
            else:
                factors.append(nf)
        if not factors:
            core: NCExpr = UNIT
        elif len(factors) == 1:
            core = factors[0]
        else:
            core = Product(tuple(factors))
        if isinstance(core, Sum):
            return _build_sum((coeff * c, k) for c, k in _terms(core))
        return _build_sum([(coeff, core)])
    if isinstance(e, Func):
        return Func(e.name, normalize(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: NCExpr, mapping: Mapping[str, NCExpr]) -> NCExpr:
    """Replace every generator by its image under ``mapping``."""
    if isinstance(e, Gen):
        try:
            return as_expr(mapping[e.name])
        except KeyError:
            raise UnboundGenerator(f"generator {e.name!r} has no image") from None
    if isinstance(e, Unit):
        return e
    if isinstance(e, Adjoint):
        return Adjoint(substitute(e.arg, mapping))
    if isinstance(e, Sum):
        return Sum(tuple(substitute(t, mapping) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(substitute(f, mapping) for f in e.factors))
    if isinstance(e, ScalarMul):
        return ScalarMul(e.coeff, substitute(e.arg, mapping))
    if isinstance(e, Func):
        return Func(e.name, substitute(e.arg, mapping))
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# dense *-polynomials

# A letter is (generator, starred); a monomial is a tuple of letters.
Letter = tuple[str, bool]
Monomial = tuple[Letter, ...]

# coefficients at or below this magnitude are treated as exact zeros
COEFF_TOL = 1e-12


def monomial_key(m: Monomial):
    """Graded lexicographic order: length first, then letters with g < g*."""
    return (len(m), tuple((g, star) for g, star in m))


def format_monomial(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(f"adj({g})" if star else g for g, star in m)


class StarPolynomial:
    """Finitely supported map from monomials to complex coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[Monomial, complex] | None = None):
        clean: dict[Monomial, complex] = {}
        for m, c in (coeffs or {}).items():
            c = complex(c)
            if abs(c) > COEFF_TOL:
                clean[tuple(m)] = c
        self._coeffs = {m: clean[m] for m in sorted(clean, key=monomial_key)}

    @classmethod
    def constant(cls, c: complex) -> "StarPolynomial":
        return cls({(): c})

    @classmethod
    def letter(cls, g: str, star: bool = False) -> "StarPolynomial":
        return cls({((g, star),): 1})

    @property
    def coeffs(self) -> dict[Monomial, complex]:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __len__(self):
        return len(self._coeffs)

    def __bool__(self):
        return bool(self._coeffs)

    def constant_term(self) -> complex:
        return self._coeffs.get((), 0j)

    def degree(self) -> int:
        return max((len(m) for m in self._coeffs), default=-1)

    def generators(self) -> frozenset[str]:
        return frozenset(g for m in self._coeffs for g, _ in m)

    def __eq__(self, other):
        if not isinstance(other, StarPolynomial):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(tuple(self._coeffs.items()))

    def almost_equal(self, other: "StarPolynomial", tol: float = COEFF_TOL) -> bool:
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(self._coeffs.get(k, 0) - other._coeffs.get(k, 0)) <= tol for k in keys)

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self._coeffs)
        for m, c in other.items():
            out[m] = out.get(m, 0) + c
        return StarPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return StarPolynomial({m: -c for m, c in self.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return StarPolynomial({m: other * c for m, c in self.items()})
        other = _as_poly(other)
        out: dict[Monomial, complex] = {}
        for m1, c1 in self.items():
            for m2, c2 in other.items():
                m = m1 + m2
                out[m] = out.get(m, 0) + c1 * c2
        return StarPolynomial(out)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return _as_poly(other) * self

    def adjoint(self) -> "StarPolynomial":
        return StarPolynomial(
            {tuple((g, not s) for g, s in reversed(m)): c.conjugate() for m, c in self.items()}
        )

    def to_expr(self) -> NCExpr:
        """Embed back into expressions (inverse of :func:`to_polynomial`)."""
        terms = []
        for m, c in self.items():
            if not m:
                core: NCExpr = UNIT
            else:
                letters = [Adjoint(Gen(g)) if s else Gen(g) for g, s in m]
                core = letters[0] if len(letters) == 1 else Product(tuple(letters))
            terms.append(ScalarMul(c, core))
        if not terms:
            return ZERO
        return normalize(Sum(tuple(terms)))

    def __repr__(self):
        body = ", ".join(f"{format_monomial(m)}: {c}" for m, c in self.items())
        return f"StarPolynomial({{{body}}})"

    def __str__(self):
        return format_expr(self.to_expr())


def _as_poly(value) -> StarPolynomial:
    if isinstance(value, StarPolynomial):
        return value
    if isinstance(value, (int, float, complex)):
        return StarPolynomial.constant(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to StarPolynomial")


def to_polynomial(e: NCExpr) -> StarPolynomial:
    """Expand a Func-free expression into its dense *-polynomial."""
    if isinstance(e, Gen):
        return StarPolynomial.letter(e.name)
    if isinstance(e, Unit):
        return StarPolynomial.constant(1)
    if isinstance(e, Adjoint):
        return to_polynomial(e.arg).adjoint()
    if isinstance(e, Sum):
        out = StarPolynomial()
        for t in e.terms:
            out = out + to_polynomial(t)
        return out
    if isinstance(e, Product):
        out = StarPolynomial.constant(1)
        for f in e.factors:
            out = out * to_polynomial(f)
        return out
    if isinstance(e, ScalarMul):
        return to_polynomial(e.arg) * e.coeff
    if isinstance(e, Func):
        raise NonPolynomial(f"{e.name}(...) is not a *-polynomial")
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# canonical text form (parsed back by starrel.dsl)


def format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def format_scalar(c: complex) -> str:
    """Literal for ``c``; mixed complex values come parenthesized."""
    c = complex(c)
    if c.imag == 0:
        return format_number(c.real)
    if c.real == 0:
        return format_number(c.imag) + "i"
    sign = "-" if c.imag < 0 else "+"
    return f"({format_number(c.real)}{sign}{format_number(abs(c.imag))}i)"


def _is_negative(c: complex) -> bool:
    return (c.imag == 0 and c.real < 0) or (c.real == 0 and c.imag < 0)


_SUM, _PROD, _ATOM = 1, 2, 3


def _fmt(e: NCExpr) -> tuple[str, int]:
    if isinstance(e, Gen):
        return e.name, _ATOM
    if isinstance(e, Unit):
        return "1", _ATOM
    if isinstance(e, Adjoint):
        return f"adj({format_expr(e.arg)})", _ATOM
    if isinstance(e, Func):
        return f"{e.name}({format_expr(e.arg)})", _ATOM
    if isinstance(e, Product):
        return "*".join(_wrap(f, _ATOM) for f in e.factors), _PROD
    if isinstance(e, ScalarMul):
        c = e.coeff
        if isinstance(e.arg, Unit):
            text = format_scalar(c)
            return text, (_SUM if text.startswith("-") else _ATOM)
        body = _wrap(e.arg, _PROD)
        if c == 1:
            return body, _PROD
        if c == -1:
            return "-" + body, _SUM
        text = format_scalar(c)
        return f"{text}*{body}", (_SUM if text.startswith("-") else _PROD)
    if isinstance(e, Sum):
        parts = []
        for k, t in enumerate(e.terms):
            if k and isinstance(t, ScalarMul) and _is_negative(t.coeff):
                parts.append(" - " + _wrap(ScalarMul(-t.coeff, t.arg), _PROD))
            elif k:
                parts.append(" + " + _wrap(t, _PROD))
            else:
                parts.append(_fmt(t)[0])
        return "".join(parts), _SUM
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e: NCExpr, need: int) -> str:
    text, level = _fmt(e)
    return text if level >= need else f"({text})"


def format_expr(e: NCExpr) -> str:
    """Canonical text: ``adj(e)``, ``sqrt(e)``, infix ``+ - *``, literals ``a+bi``, unit ``1``."""
    return _fmt(e)[0]


ExprLike = Union[NCExpr, int, float, complex, str]
