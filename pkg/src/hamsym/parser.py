"""Recursive-descent parser for coordinate expressions.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := base ('^' exponent)?
    base     := number | ident | '(' expr ')' | func '(' expr ')' | '-' factor
    exponent := base            (must fold to a constant)

Unary minus takes a whole ``factor``, so ``-p^2`` means ``-(p^2)``.
"""

from __future__ import annotations

import re
from typing import Protocol

from . import expr as ex
from .errors import ParseError, UnknownIdentifierError

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class Names(Protocol):
    def coordinate_index(self, name: str) -> int | None: ...


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[stripped]!r}", stripped, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: Names):
        self.text = text
        self.names = names
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.tok
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.text)
        self.advance()

    def parse(self) -> ex.Expr:
        result = self.expr()
        kind, val, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos, self.text)
        return result

    def expr(self) -> ex.Expr:
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            left = ex.add(left, right) if op == "+" else ex.sub(left, right)
        return left

    def term(self) -> ex.Expr:
        left = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            right = self.factor()
            left = ex.mul(left, right) if op == "*" else ex.div(left, right)
        return left

    def factor(self) -> ex.Expr:
        base = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            pos = self.advance()[2]
            exponent = self.base()
            if not isinstance(exponent, ex.Const):
                raise ParseError("exponent must be a constant", pos, self.text)
            return ex.power(base, exponent.value)
        return base

    def base(self) -> ex.Expr:
        kind, val, pos = self.tok
        if kind == "number":
            self.advance()
            return ex.Const(float(val))
        if kind == "ident":
            self.advance()
            if val in ex.FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ex.func(val, arg)
            index = self.names.coordinate_index(val)
            if index is None:
                raise UnknownIdentifierError(val, pos, self.text)
            return ex.Coord(index)
        if kind == "op" and val == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            self.advance()
            return ex.neg(self.factor())
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos, self.text)


def parse(text: str, chart: Names) -> ex.Expr:
    """Parse ``text`` into an expression over the coordinates of ``chart``."""
    if not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text, chart).parse()
