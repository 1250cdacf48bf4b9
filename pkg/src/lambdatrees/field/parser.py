"""Recursive-descent parser for field expressions.

Grammar (whitespace is insignificant)::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | base ('^' exponent)?
    exponent := '(' rational ')' | integer
    base     := rational | 't' | 'sqrt' '(' expr ')' | '(' expr ')'
    rational := integer ('/' positive-integer)?

A leading unary minus and a bare integer exponent (``t^2``) are accepted as
conveniences.  Inside an exponent the rational may carry a sign.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

from ..errors import DomainError, ParseError
from .series import PuiseuxElement

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    stripped_end = len(text.rstrip())
    while pos < stripped_end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", self.text, pos)

    def fail(self, message):
        raise ParseError(message, self.text, self.peek()[2])

    def parse(self):
        value = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.factor()
        while self.peek()[1] in ("*", "/"):
            op, pos = self.take()[1:]
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_exact_zero():
                    raise ParseError("division by zero", self.text, pos)
                value = value / rhs
        return value

    def factor(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.factor()
        base = self.base()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            exponent = self.exponent()
            try:
                return power(base, exponent)
            except DomainError as exc:
                raise ParseError(str(exc), self.text, pos) from exc
        return base

    def exponent(self):
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            return Fraction(int(val))
        if val != "(":
            self.fail("exponent must be an integer or a parenthesized rational")
        self.take()
        negative = False
        if self.peek()[1] in ("-", "+"):
            negative = self.take()[1] == "-"
        q = self.rational()
        self.expect(")")
        return -q if negative else q

    def rational(self):
        kind, val, pos = self.take()
        if kind != "int":
            raise ParseError("expected an integer", self.text, pos)
        num = int(val)
        if self.peek()[1] == "/" and self.tokens[self.i + 1][0] == "int":
            self.take()
            den_tok = self.take()
            den = int(den_tok[1])
            if den == 0:
                raise ParseError("zero denominator", self.text, den_tok[2])
            return Fraction(num, den)
        return Fraction(num)

    def base(self):
        kind, val, pos = self.peek()
        if kind == "int":
            return PuiseuxElement.constant(mpq(self.rational()))
        if kind == "name":
            self.take()
            if val == "t":
                return PuiseuxElement.monomial(1, 1)
            if val == "sqrt":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                try:
                    return inner.sqrt()
                except DomainError as exc:
                    raise ParseError(str(exc), self.text, pos) from exc
            raise ParseError(f"unknown name {val!r}", self.text, pos)
        if val == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {val!r}")


def power(base, exponent):
    """``base ** exponent`` for a rational exponent.

    Integer exponents work for any base; fractional ones need a monomial base
    or a denominator that is a power of two (repeated square roots).
    """
    exponent = Fraction(exponent)
    if exponent.denominator == 1:
        return base ** int(exponent)
    terms = base.terms() if base.tail_zero else None
    if terms is not None and len(terms) == 1:
        ((e, c),) = terms.items()
        if c == 1:
            return PuiseuxElement.monomial(1, e * exponent)
    den = exponent.denominator
    if den & (den - 1):
        raise DomainError(f"cannot take root of order {den} of a non-monomial")
    value = base
    while den > 1:
        value = value.sqrt()
        den //= 2
    return value ** exponent.numerator


def parse_element(text):
    """Parse ``text`` into an exact :class:`PuiseuxElement`."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    if not text.strip():
        raise ParseError("empty expression", text, 0)
    return _Parser(text).parse()
