"""Recursive-descent parser for the polynomial text grammar.

Grammar (whitespace is insignificant)::

    expr     := sign? term (('+' | '-') term)*
    term     := factor ('*' factor)*
    factor   := base ('^' nat)?
    base     := rational | ident | '(' expr ')'
    rational := int ('/' posint)?

A single leading sign is accepted at the start of every ``expr`` so that the
canonical printer's output (which may start with ``-``) parses back.  Errors
carry the character offset of the offending token, or the text length when
input ends early.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import NamedTuple

from .errors import PolySyntaxError, UnknownVariableError
from .fields import QQ, Field
from .poly import Poly, VarContext, as_context

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()]))")
_SPACE = re.compile(r"\s*")


class Token(NamedTuple):
    kind: str  # "int", "ident", "op" or "eof"
    text: str
    pos: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        pos = _SPACE.match(text, pos).end()
        if pos >= n:
            tokens.append(Token("eof", "", n))
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()


class _Parser:
    def __init__(self, text: str, tokens: list, ctx: VarContext, field: Field):
        self.text = text
        self.toks = tokens
        self.i = 0
        self.ctx = ctx
        self.field = field

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise PolySyntaxError(msg, tok.pos, self.text)

    def is_op(self, ch) -> bool:
        t = self.tok
        return t.kind == "op" and t.text == ch

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def parse_all(self) -> Poly:
        if self.tok.kind == "eof":
            self.fail("empty expression")
        result = self.expr()
        t = self.tok
        if t.kind != "eof":
            if t.kind in ("int", "ident") or self.is_op("("):
                self.fail("implicit multiplication is not allowed")
            self.fail(f"unexpected {t.text!r}")
        return result

    def expr(self) -> Poly:
        negate = False
        if self.is_op("-") or self.is_op("+"):
            negate = self.advance().text == "-"
        acc = self.term()
        if negate:
            acc = -acc
        while self.is_op("+") or self.is_op("-"):
            op = self.advance().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while self.is_op("*"):
            self.advance()
            acc = acc * self.factor()
        return acc

    def factor(self) -> Poly:
        base = self.base()
        if self.is_op("^"):
            self.advance()
            t = self.tok
            if t.kind != "int":
                self.fail("expected a natural-number exponent")
            self.advance()
            return base ** int(t.text)
        return base

    def base(self) -> Poly:
        t = self.tok
        if t.kind == "int":
            self.advance()
            value = Fraction(int(t.text))
            if self.is_op("/"):
                self.advance()
                d = self.tok
                if d.kind != "int" or int(d.text) == 0:
                    self.fail("expected a positive denominator")
                self.advance()
                value = value / int(d.text)
            return Poly.const(self.ctx, value, self.field)
        if t.kind == "ident":
            self.advance()
            if t.text not in self.ctx:
                err = UnknownVariableError(t.text)
                err.pos = t.pos
                raise err
            return Poly.var(self.ctx, t.text, self.field)
        if self.is_op("("):
            self.advance()
            inner = self.expr()
            if not self.is_op(")"):
                self.fail("expected ')'")
            self.advance()
            return inner
        if t.kind == "eof":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {t.text!r}")


def parse(text: str, ctx=None, field: Field = QQ) -> Poly:
    """Parse ``text`` into a :class:`Poly`.

    Without ``ctx`` the variables are taken in order of first appearance
    (a constant expression gets the single variable ``x``).
    """
    tokens = tokenize(text)
    if ctx is None:
        seen = []
        for t in tokens:
            if t.kind == "ident" and t.text not in seen:
                seen.append(t.text)
        ctx = VarContext(seen or ["x"])
    else:
        ctx = as_context(ctx)
    return _Parser(text, tokens, ctx, field).parse_all()


def parse_many(texts, ctx, field: Field = QQ) -> list:
    ctx = as_context(ctx)
    return [parse(t, ctx, field) for t in texts]
