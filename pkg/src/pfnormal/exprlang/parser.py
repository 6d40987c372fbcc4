"""Recursive-descent parser for the expression grammar.

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | base ("^" exponent)?
    base   := rational | ident | "(" expr ")" | "sqrt(" expr ")"
    exponent := rational | "-" rational | "(" "-"? rational ")"
    rational := integer ("/" positive-integer)?

``integer "/" integer`` is munched as a single rational literal, so
``x/1/2`` reads as x/(1/2).  Unary minus and signed exponents are accepted
as well so that every printed expression parses back.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import Const, Expr, Pow, Prod, Quot, Sum, Var


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.data = text.encode("utf-8")
        self.pos = 0

    def error(self, msg: str, at: int | None = None):
        raise ExprSyntaxError(msg, self.pos if at is None else at, self.text)

    def skip(self):
        while self.pos < len(self.data) and self.data[self.pos] in b" \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        if self.pos >= len(self.data):
            return ""
        return chr(self.data[self.pos])

    def take(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.data) and 48 <= self.data[self.pos] <= 57:
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.data[start:self.pos])

    def _at_digit(self) -> bool:
        self.skip()
        return self.pos < len(self.data) and 48 <= self.data[self.pos] <= 57

    def rational(self) -> Fraction:
        num = self.integer()
        save = self.pos
        if self.peek() == "/":
            self.pos += 1
            if self._at_digit():
                at = self.pos
                den = self.integer()
                if den == 0:
                    self.error("zero denominator in rational literal", at)
                return Fraction(num, den)
            self.pos = save
        return Fraction(num)

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek() in ("+", "-"):
            op = self.peek()
            self.pos += 1
            t = self.term()
            terms.append(t if op == "+" else _negate(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek() in ("*", "/"):
            op = self.peek()
            self.pos += 1
            f = self.factor()
            if op == "*":
                factors.append(f)
            else:
                left = factors[0] if len(factors) == 1 else Prod(tuple(factors))
                if isinstance(f, Const) and f.value == 0:
                    self.error("division by constant zero")
                factors = [Quot(left, f)]
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def factor(self) -> Expr:
        if self.peek() == "-":
            self.pos += 1
            return _negate(self.factor())
        base = self.base()
        if self.peek() == "^":
            self.pos += 1
            base = Pow(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            sign = 1
            if self.peek() == "-":
                self.pos += 1
                sign = -1
            q = sign * self.rational()
            self.take(")")
            return q
        if ch == "-":
            self.pos += 1
            return -self.rational()
        if not self._at_digit():
            self.error("expected rational exponent")
        return self.rational()

    def base(self) -> Expr:
        ch = self.peek()
        if ch == "":
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.take(")")
            return e
        if ch.isdigit():
            return Const(self.rational())
        if ch.isalpha() and ch.isascii():
            start = self.pos
            while self.pos < len(self.data):
                c = chr(self.data[self.pos])
                if not (c.isascii() and (c.isalnum() or c == "_")):
                    break
                self.pos += 1
            name = self.data[start:self.pos].decode()
            if name == "sqrt" and self.peek() == "(":
                self.pos += 1
                e = self.expr()
                self.take(")")
                return Pow(e, Fraction(1, 2))
            return Var(name)
        self.error(f"unexpected character {ch!r}")


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Prod) and isinstance(e.factors[0], Const):
        return Prod((Const(-e.factors[0].value),) + e.factors[1:])
    if isinstance(e, Prod):
        return Prod((Const(Fraction(-1)),) + e.factors)
    return Prod((Const(Fraction(-1)), e))


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    >>> parse_expr("t*(1-t)")
    Prod(factors=(Var(name='t'), Sum(terms=(Const(value=Fraction(1, 1)), Prod(factors=(Const(value=Fraction(-1, 1)), Var(name='t')))))))
    """
    p = _Parser(text)
    e = p.expr()
    if p.peek() != "":
        p.error(f"unexpected {p.peek()!r}")
    return e
