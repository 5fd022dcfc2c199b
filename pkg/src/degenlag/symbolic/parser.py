"""Recursive-descent parser for coordinate expressions.

Grammar (whitespace free between any two tokens)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)*
    exponent := '-'? integer | '(' '-'? integer ')'
    atom     := number | name | name '(' expr ')' | '(' expr ')'

``+ -`` bind loosest, then ``* /``, then unary minus, then ``^``; the two
binary levels associate left. So ``-q1^2`` is ``-(q1^2)`` and ``2^3^2`` is
``(2^3)^2``. Numeric literals (``3``, ``0.25``, ``1.5e2``) become exact
rationals. A bare name must be a coordinate of the chart; a name followed by
``(`` must be one of sin, cos, exp, log, sqrt.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError, UnknownIdentifierError
from .chart import Chart
from .expr import (
    FUNCTION_NAMES,
    Const,
    Coord,
    Expr,
    add,
    div,
    func,
    mul,
    neg,
    power,
    sub,
)

_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = "+-*/^()"


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            tokens.append(("number", m.group(), i))
            i = m.end()
            continue
        m = _NAME.match(src, i)
        if m:
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        if ch in _PUNCT:
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str, chart: Chart):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.chart = chart

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected '{kind}'", tok[2])
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        while self.peek()[0] == "^":
            self.advance()
            e = power(e, self.exponent())
        return e

    def exponent(self) -> int:
        parenthesized = False
        if self.peek()[0] == "(":
            self.advance()
            parenthesized = True
        sign = 1
        if self.peek()[0] == "-":
            self.advance()
            sign = -1
        kind, text, at = self.peek()
        if kind != "number" or not text.isdigit():
            raise ParseError("exponent must be an integer", at)
        self.advance()
        if parenthesized:
            self.expect(")")
        return sign * int(text)

    def atom(self) -> Expr:
        kind, text, at = self.peek()
        if kind == "number":
            self.advance()
            return Const(Fraction(text))
        if kind == "name":
            self.advance()
            if self.peek()[0] == "(":
                if text not in FUNCTION_NAMES:
                    raise UnknownIdentifierError(text, at)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return func(text, arg)
            if text not in self.chart:
                raise UnknownIdentifierError(text, at)
            return Coord(text)
        if kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError("expected operand", at)


def parse_expr(src: str, chart: Chart) -> Expr:
    """Parse an expression string over the chart's coordinates.

    Raises :class:`ParseError` (with a 0-based ``position``) on syntax
    errors and :class:`UnknownIdentifierError` on names outside the chart.
    """
    return _Parser(src, chart).parse()
