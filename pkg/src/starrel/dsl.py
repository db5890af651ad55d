"""
Relation DSL
~~~~~~~~~~~~
A small recursive-descent parser and a canonical printer for relation
documents::

    gens h k x;
    block P = [[1 - h, adj(x)], [x, k]];
    rel 0 <= P <= 1;

Grammar (``#`` starts a comment)::

    doc      := (decl ';')*
    decl     := 'gens' ident+ | 'block' ident '=' matrix
              | 'alpha' ident '=' matrix | 'rel' relexpr
    relexpr  := 'norm' '(' expr ')' ('<=' | '<') number
              | expr '=' expr
              | expr ('<=' expr)+
    expr     := ['-'] term (('+' | '-') term)*
    term     := factor ('*' factor)*
    factor   := number | ident | func '(' expr ')' | '(' expr ')'
    func     := 'adj' | 'sqrt' | 'abs' | 'exp' | 'inv'
    matrix   := '[' row (',' row)* ']'
    row      := '[' expr (',' expr)* ']'

Numbers are decimals with an optional ``i`` suffix for imaginary parts; the
literal ``1`` is the unit. ``a = b`` becomes ``a - b = 0`` and a two-term
chain ``0 <= e`` is read as positivity of ``e``. A unitary condition such
as ``u* = inv(u)`` has to be written as the pair ``adj(u)*u = 1`` and
``u*adj(u) = 1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import ncexpr as nc
from .comatrix import ScalarRep
from .errors import DslSyntaxError, DuplicateGenerator, MalformedRelation, UndeclaredGenerator
from .relations import Block, EqZero, NormLe, NormLt, OrderChain, Psd, RelationSet

KEYWORDS = {"gens", "block", "alpha", "rel", "norm", "adj", "sqrt", "abs", "exp", "inv"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:i(?![A-Za-z0-9_]))?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|[;=+\-*()\[\],<])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str   # "num", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, tok, line, pos - line_start + 1))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def _number(text: str) -> complex:
    if text.endswith("i"):
        return complex(0, float(text[:-1]))
    return complex(float(text))


@dataclass(frozen=True)
class RelationDocument:
    relations: RelationSet
    alpha: ScalarRep | None = None


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.gens: list[str] = []
        self.blocks: dict[str, Block] = {}
        self.alpha: dict[str, np.ndarray] = {}
        self.relations: list = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, *texts: str) -> Token:
        if not self.at(*texts):
            self.fail("unexpected " + (repr(self.tok.text) if self.tok.text else "end of input"), texts)
        return self.advance()

    def fail(self, message, expected=(), tok: Token | None = None, cls=DslSyntaxError):
        tok = tok or self.tok
        raise cls(message, tok.line, tok.col, expected)

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            kind = "keyword " if self.tok.kind == "kw" else ""
            self.fail(f"expected an identifier, found {kind}{self.tok.text!r}", ("identifier",))
        return self.advance()

    # grammar
    def document(self) -> RelationDocument:
        while self.tok.kind != "eof":
            self.declaration()
            self.expect(";")
        try:
            rs = RelationSet(tuple(self.gens), tuple(self.relations), dict(self.blocks))
        except MalformedRelation as exc:
            raise DslSyntaxError(str(exc)) from None
        alpha = None
        if self.alpha:
            sizes = {m.shape[0] for m in self.alpha.values()}
            if len(sizes) != 1:
                raise DslSyntaxError("alpha tables must all have the same size")
            alpha = ScalarRep(sizes.pop(), dict(self.alpha))
        return RelationDocument(rs, alpha)

    def declaration(self):
        head = self.expect("gens", "block", "alpha", "rel")
        if head.text == "gens":
            names = [self.ident()]
            while self.tok.kind == "ident":
                names.append(self.advance())
            for t in names:
                if t.text in self.gens or t.text in self.blocks:
                    self.fail(f"{t.text} is declared twice", tok=t, cls=DuplicateGenerator)
                self.gens.append(t.text)
        elif head.text == "block":
            name = self.ident()
            if name.text in self.gens or name.text in self.blocks:
                self.fail(f"{name.text} is declared twice", tok=name, cls=DuplicateGenerator)
            self.expect("=")
            rows = self.matrix(allow_blocks=False)
            try:
                self.blocks[name.text] = Block(rows)
            except MalformedRelation as exc:
                self.fail(str(exc), tok=name)
        elif head.text == "alpha":
            name = self.ident()
            if name.text not in self.gens:
                self.fail(f"alpha for undeclared generator {name.text}", tok=name, cls=UndeclaredGenerator)
            if name.text in self.alpha:
                self.fail(f"alpha for {name.text} given twice", tok=name, cls=DuplicateGenerator)
            self.expect("=")
            start = self.tok
            rows = self.matrix(allow_blocks=False, constant=True)
            if any(len(r) != len(rows) for r in rows):
                self.fail("alpha must be a square matrix", tok=start)
            self.alpha[name.text] = np.array([[_constant(e) for e in r] for r in rows], dtype=np.complex128)
        else:
            start = self.tok
            rel = self.relation()
            try:
                RelationSet(tuple(self.gens), (rel,), dict(self.blocks))
            except MalformedRelation as exc:
                self.fail(str(exc), tok=start)
            self.relations.append(rel)

    def relation(self):
        if self.at("norm"):
            self.advance()
            self.expect("(")
            e = self.expr(True)
            self.expect(")")
            op = self.expect("<=", "<")
            if self.tok.kind != "num":
                self.fail("expected a numeric bound", ("number",))
            c = _number(self.advance().text)
            if c.imag != 0:
                self.fail("norm bounds must be real")
            return (NormLe if op.text == "<=" else NormLt)(e, c.real)
        first = self.expr(True)
        if self.at("="):
            self.advance()
            return EqZero(first - self.expr(True))
        if self.at("<="):
            terms = [first]
            while self.at("<="):
                self.advance()
                terms.append(self.expr(True))
            if len(terms) == 2 and nc.is_zero(nc.normalize(terms[0])):
                return Psd(terms[1])
            return OrderChain(tuple(terms))
        self.fail("incomplete relation", ("=", "<="))

    def matrix(self, allow_blocks: bool, constant: bool = False):
        self.expect("[")
        rows = [self.row(allow_blocks)]
        while self.at(","):
            self.advance()
            rows.append(self.row(allow_blocks))
        self.expect("]")
        return tuple(rows)

    def row(self, allow_blocks: bool):
        self.expect("[")
        items = [self.expr(allow_blocks)]
        while self.at(","):
            self.advance()
            items.append(self.expr(allow_blocks))
        self.expect("]")
        return tuple(items)

    def expr(self, allow_blocks: bool) -> nc.NCExpr:
        negate = False
        if self.at("-"):
            self.advance()
            negate = True
        terms = [self.term(allow_blocks)]
        if negate:
            terms[0] = nc.ScalarMul(-1, terms[0])
        while self.at("+", "-"):
            sign = self.advance().text
            t = self.term(allow_blocks)
            terms.append(t if sign == "+" else nc.ScalarMul(-1, t))
        return terms[0] if len(terms) == 1 else nc.Sum(tuple(terms))

    def term(self, allow_blocks: bool) -> nc.NCExpr:
        factors = [self.factor(allow_blocks)]
        while self.at("*"):
            self.advance()
            factors.append(self.factor(allow_blocks))
        return factors[0] if len(factors) == 1 else nc.Product(tuple(factors))

    def factor(self, allow_blocks: bool) -> nc.NCExpr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            c = _number(t.text)
            return nc.UNIT if c == 1 else nc.ScalarMul(c, nc.UNIT)
        if t.kind == "ident":
            self.advance()
            if t.text in self.gens or (allow_blocks and t.text in self.blocks):
                return nc.Gen(t.text)
            self.fail(f"{t.text} is not a declared generator", tok=t, cls=UndeclaredGenerator)
        if self.at("adj", "sqrt", "abs", "exp", "inv"):
            name = self.advance().text
            self.expect("(")
            inner = self.expr(allow_blocks)
            self.expect(")")
            return nc.Adjoint(inner) if name == "adj" else nc.Func(name, inner)
        if self.at("("):
            self.advance()
            inner = self.expr(allow_blocks)
            self.expect(")")
            return inner
        self.fail("unexpected " + (repr(t.text) if t.text else "end of input"),
                  ("number", "identifier", "(", "adj", "sqrt", "abs", "exp", "inv"))


def _constant(e: nc.NCExpr) -> complex:
    e = nc.normalize(e)
    if isinstance(e, nc.Unit):
        return 1 + 0j
    if isinstance(e, nc.ScalarMul) and isinstance(e.arg, nc.Unit):
        return e.coeff
    raise DslSyntaxError("alpha entries must be numbers")


def parse(text: str) -> RelationDocument:
    """Parse a relation document; errors carry line, column and expected tokens."""
    return _Parser(text).document()


def parse_expr(text: str, generators=None) -> nc.NCExpr:
    """Parse a single expression. Without ``generators`` every identifier is accepted."""
    p = _Parser(text)
    if generators is None:
        p.gens = sorted({t.text for t in p.toks if t.kind == "ident"})
    else:
        p.gens = list(generators)
    e = p.expr(False)
    if p.tok.kind != "eof":
        p.fail("trailing input after expression")
    return nc.normalize(e)


# --------------------------------------------------------------------------
# printing


def format_relation(rel) -> str:
    f = nc.format_expr
    if isinstance(rel, EqZero):
        return f"{f(rel.expr)} = 0"
    if isinstance(rel, NormLt):
        return f"norm({f(rel.expr)}) < {nc.format_number(rel.bound)}"
    if isinstance(rel, NormLe):
        return f"norm({f(rel.expr)}) <= {nc.format_number(rel.bound)}"
    if isinstance(rel, Psd):
        return f"0 <= {f(rel.expr)}"
    if isinstance(rel, OrderChain):
        return " <= ".join(f(t) for t in rel.terms)
    raise TypeError(f"unknown relation {rel!r}")


def format_matrix(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(rows_i) + "]" for rows_i in rows) + "]"


def format_document(doc: RelationDocument | RelationSet) -> str:
    if isinstance(doc, RelationSet):
        doc = RelationDocument(doc)
    R = doc.relations
    lines = []
    if R.generators:
        lines.append("gens " + " ".join(R.generators) + ";")
    for name, b in R.blocks.items():
        lines.append(f"block {name} = " + format_matrix([[nc.format_expr(e) for e in row] for row in b.entries]) + ";")
    if doc.alpha is not None:
        for g, a in doc.alpha.alpha.items():
            lines.append(f"alpha {g} = " + format_matrix([[nc.format_scalar(z) for z in row] for row in a]) + ";")
    for rel in R.relations:
        lines.append(f"rel {format_relation(rel)};")
    return "\n".join(lines) + "\n"
