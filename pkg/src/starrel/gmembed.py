"""
Free-group embedding of *-polynomials
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Every generator ``x`` gets two free-group letters, a dotted one ``d:x`` and
a barred one ``b:x``. The *-homomorphism ``x -> d:x + b:x``,
``x* -> d:x^-1 + b:x^-1`` into the group algebra is injective, which gives
an exact zero test for *-polynomials.

Words alternating dot/bar/dot/... recover a polynomial's coefficients.
For the top degree they can be read directly off the image; lower degrees
are read after subtracting the images of the higher-degree monomials
already recovered, since reduction of a long monomial's non-alternating
expansions can land on a shorter alternating word.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Mapping, NamedTuple

from .ncexpr import COEFF_TOL, Monomial, StarPolynomial, monomial_key

GAUSSIAN_TOL = 1e-12
REL_TOL = 1e-9


class Letter(NamedTuple):
    base: str
    dot: bool
    exponent: int  # +1 or -1

    def inverse(self) -> "Letter":
        return Letter(self.base, self.dot, -self.exponent)

    def __str__(self):
        tag = "d" if self.dot else "b"
        return f"{tag}:{self.base}" + ("" if self.exponent == 1 else "^-1")


GroupWord = tuple  # tuple[Letter, ...], freely reduced


def reduce_word(letters: Iterable[Letter]) -> GroupWord:
    """Free reduction with a stack; the result has no ``a a^-1`` pair."""
    stack: list[Letter] = []
    for a in letters:
        if stack and stack[-1] == a.inverse():
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def is_reduced(word: GroupWord) -> bool:
    return all(b != a.inverse() for a, b in zip(word, word[1:]))


def invert_word(word: GroupWord) -> GroupWord:
    return tuple(a.inverse() for a in reversed(word))


def format_word(word: GroupWord) -> str:
    return " ".join(str(a) for a in word) if word else "1"


def word_key(word: GroupWord):
    return (len(word), tuple((a.base, not a.dot, a.exponent < 0) for a in word))


def _coeff_equal(a: complex, b: complex) -> bool:
    snap_a = complex(round(a.real), round(a.imag))
    snap_b = complex(round(b.real), round(b.imag))
    if abs(a - snap_a) <= GAUSSIAN_TOL and abs(b - snap_b) <= GAUSSIAN_TOL:
        return snap_a == snap_b
    return abs(a - b) <= REL_TOL * max(abs(a), abs(b))


class GroupAlgebraElement:
    """Finitely supported complex combination of reduced words."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[GroupWord, complex] | None = None):
        acc: dict[GroupWord, complex] = {}
        for w, c in (terms or {}).items():
            w = reduce_word(w)
            acc[w] = acc.get(w, 0j) + complex(c)
        keep = {w: c for w, c in acc.items() if abs(c) > COEFF_TOL}
        self._terms = {w: keep[w] for w in sorted(keep, key=word_key)}

    @classmethod
    def word(cls, *letters: Letter) -> "GroupAlgebraElement":
        return cls({tuple(letters): 1})

    @property
    def terms(self) -> dict[GroupWord, complex]:
        return dict(self._terms)

    def coefficient(self, word: GroupWord) -> complex:
        return self._terms.get(tuple(word), 0j)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        keys = set(self._terms) | set(other._terms)
        return all(_coeff_equal(self.coefficient(k), other.coefficient(k)) for k in keys)

    __hash__ = None

    def __add__(self, other: "GroupAlgebraElement"):
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0j) + c
        return GroupAlgebraElement(out)

    def __neg__(self):
        return GroupAlgebraElement({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return GroupAlgebraElement({w: c * other for w, c in self._terms.items()})
        out: dict[GroupWord, complex] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = reduce_word(w1 + w2)
                out[w] = out.get(w, 0j) + c1 * c2
        return GroupAlgebraElement(out)

    def __rmul__(self, other):
        return self * other

    def adjoint(self) -> "GroupAlgebraElement":
        """Reverse and invert each word, conjugate each coefficient."""
        return GroupAlgebraElement({invert_word(w): c.conjugate() for w, c in self._terms.items()})

    def listing(self) -> list[str]:
        return [f"{_format_coeff(c)} * {format_word(w)}" for w, c in self._terms.items()]

    def __repr__(self):
        return "GroupAlgebraElement(" + " + ".join(self.listing()) + ")"


def _format_coeff(c: complex) -> str:
    from .ncexpr import format_scalar

    return format_scalar(c)


def letter_image(g: str, star: bool) -> GroupAlgebraElement:
    e = -1 if star else 1
    return GroupAlgebraElement({(Letter(g, True, e),): 1, (Letter(g, False, e),): 1})


def _embed_monomial(m: Monomial) -> dict[GroupWord, complex]:
    out: dict[GroupWord, complex] = {}
    for decoration in itertools.product((True, False), repeat=len(m)):
        w = reduce_word(Letter(g, d, -1 if s else 1) for (g, s), d in zip(m, decoration))
        out[w] = out.get(w, 0) + 1
    return out


def embed(p: StarPolynomial) -> GroupAlgebraElement:
    """Image of ``p`` under ``x -> d:x + b:x``."""
    out: dict[GroupWord, complex] = {}
    for m, c in p.items():
        for w, k in _embed_monomial(m).items():
            out[w] = out.get(w, 0j) + c * k
    return GroupAlgebraElement(out)


def alternating_word(m: Monomial) -> GroupWord:
    """Decorate letters 1, 3, 5, ... with dot and 2, 4, ... with bar."""
    return tuple(Letter(g, k % 2 == 0, -1 if s else 1) for k, (g, s) in enumerate(m))


def readoff(image: GroupAlgebraElement, m: Monomial) -> complex:
    return image.coefficient(alternating_word(m))


def _monomials_of_degree(p_image: GroupAlgebraElement, d: int) -> dict[Monomial, complex]:
    out = {}
    for w, c in p_image.terms.items():
        if len(w) != d or not w:
            continue
        if all(a.dot == (k % 2 == 0) for k, a in enumerate(w)):
            out[tuple((a.base, a.exponent < 0) for a in w)] = c
    return out


def alternating_certificate(p: StarPolynomial) -> dict[Monomial, complex]:
    """Recover ``p``'s coefficient map from ``embed(p)`` alone.

    Works degree by degree from the top: at degree ``d`` the alternating
    words of length ``d`` are read off, then the images of the recovered
    monomials are subtracted before moving to ``d - 1``. The constant term
    is what remains on the empty word.
    """
    image = embed(p)
    top = max((len(w) for w in image.terms), default=-1)
    recovered: dict[Monomial, complex] = {}
    for d in range(top, 0, -1):
        found = _monomials_of_degree(image, d)
        if found:
            recovered.update(found)
            image = image - embed(StarPolynomial(found))
    const = image.coefficient(())
    if abs(const) > COEFF_TOL:
        recovered[()] = const
    return {m: recovered[m] for m in sorted(recovered, key=monomial_key)}


def naive_readoff(p: StarPolynomial) -> dict[Monomial, complex]:
    """Coefficient of each monomial's alternating word in ``embed(p)``, no peeling.

    Exact for the top-degree monomials; lower-degree entries can pick up
    contributions from longer monomials (e.g. ``x x* x`` feeds ``d:x``).
    """
    image = embed(p)
    return {m: readoff(image, m) for m, _ in p.items()}


def is_zero_certified(p: StarPolynomial) -> bool:
    return not embed(p)
