"""Algebraic normal form for expressions.

An expression is brought to a finite sum ``sum_m r_m(v) * m`` where ``v``
is the main variable, each ``r_m`` is an exact :class:`RationalFunction`
and ``m`` is a monomial in *atoms*:

* ``("sym", name)``  another variable, any rational exponent;
* ``("rad", r)``     a radical of a rational function ``r`` in ``v``,
  exponent kept in (0, 1) with integer parts pulled into the coefficient;
* ``("opaque", e)``  anything else (a multi-term radicand, an inverse of a
  sum with symbols), compared structurally.

Identical bases combine; nothing is denested or factored, so the rewrite
set is finite and always terminates.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    ZERO,
    Const,
    Expr,
    Pow,
    Prod,
    Quot,
    Sum,
    Var,
    _exact_root,
    add,
    mul,
    normalize,
    power,
    rf_to_expr,
    to_text,
)
from .rational import RationalFunction


class NotRationalError(ValueError):
    """Fractional powers (or other symbols) survive simplification."""


def _atom_key(atom):
    kind, payload = atom
    if kind == "sym":
        return (0, payload)
    if kind == "rad":
        return (1, payload.to_text())
    return (2, to_text(payload))


def _mono(items) -> tuple:
    """Canonical monomial from (atom, exponent) pairs; zero exponents dropped."""
    return tuple(sorted(((a, e) for a, e in items if e != 0), key=lambda p: _atom_key(p[0])))


class Normal:
    __slots__ = ("terms", "var")

    def __init__(self, terms: dict, var: str):
        self.terms = {m: c for m, c in terms.items() if not c.is_zero()}
        self.var = var

    @classmethod
    def scalar(cls, r: RationalFunction, var: str) -> "Normal":
        return cls({(): r}, var)

    def is_zero(self) -> bool:
        return not self.terms

    def rational_part(self) -> RationalFunction | None:
        """The value as a RationalFunction if no atoms survive."""
        if not self.terms:
            return RationalFunction.const(0, self.var)
        if set(self.terms) == {()}:
            return self.terms[()]
        return None

    def __add__(self, other: "Normal") -> "Normal":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Normal(out, self.var)

    def __neg__(self):
        return Normal({m: -c for m, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "Normal") -> "Normal":
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                coef, mono = _mono_mul(m1, m2, self.var)
                c = c1 * c2 * coef
                out[mono] = out[mono] + c if mono in out else c
        return _expand_whole_opaque(Normal(out, self.var))

    def __pow__(self, n: int) -> "Normal":
        if n < 0:
            return self.inverse() ** (-n)
        result = Normal.scalar(RationalFunction.const(1, self.var), self.var)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "Normal":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            coef, mono = _mono_pow(m, Fraction(-1), self.var)
            return Normal({mono: c.inverse() * coef}, self.var)
        opaque = ("opaque", self.to_expr())
        return Normal({((opaque, Fraction(-1)),): RationalFunction.const(1, self.var)}, self.var)

    def fractional_power(self, q: Fraction) -> "Normal":
        one = RationalFunction.const(1, self.var)
        r = self.rational_part()
        if r is not None:
            if r.is_zero():
                if q < 0:
                    raise ZeroDivisionError("zero to a negative power")
                return Normal({}, self.var)
            if r.is_constant():
                root = _exact_root(r.constant_value(), q)
                if root is not None:
                    return Normal.scalar(RationalFunction.const(root, self.var), self.var)
            coef, mono = _mono_pow(((("rad", r), Fraction(1)),), q, self.var, fresh=True)
            return Normal({mono: coef}, self.var)
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            if c == one and len(m) == 1 and abs(m[0][1]) < 1:
                # (a^e)^q = a^(eq) on the principal branch for |e| < 1
                coef, mono = _mono_pow(m, q, self.var, fresh=True)
                return Normal({mono: coef}, self.var)
            if c == one and len(m) == 1 and m[0][0][0] == "sym" and m[0][1] == 1:
                return Normal({_mono([(m[0][0], q)]): one}, self.var)
        atom = ("opaque", self.to_expr())
        return Normal({((atom, q),): one}, self.var)

    def to_expr(self) -> Expr:
        parts = []
        for m in sorted(self.terms, key=_mono_sort_key):
            c = self.terms[m]
            mono_factors = [_atom_expr(a, e) for a, e in m]
            cexpr = rf_to_expr(c)
            parts.append(mul(cexpr, *mono_factors) if mono_factors else cexpr)
        if not parts:
            return ZERO
        return add(*parts)


def _mono_sort_key(m):
    return (len(m), [(_atom_key(a), e) for a, e in m])


def _atom_expr(atom, e: Fraction) -> Expr:
    kind, payload = atom
    if kind == "sym":
        base = Var(payload)
    elif kind == "rad":
        base = rf_to_expr(payload)
    else:
        base = payload
    return power(base, e) if not isinstance(base, Const) else Pow(base, e)


def _split_rad(atom, e: Fraction, var: str):
    """Pull the integer part of a radical exponent into a coefficient."""
    whole = e.numerator // e.denominator
    frac = e - whole
    coef = atom[1] ** whole if whole else RationalFunction.const(1, var)
    return coef, frac


def _mono_mul(m1, m2, var):
    acc: dict = {}
    for a, e in m1 + m2:
        acc[a] = acc.get(a, Fraction(0)) + e
    coef = RationalFunction.const(1, var)
    items = []
    for a, e in acc.items():
        if a[0] == "rad":
            c, e = _split_rad(a, e, var)
            coef = coef * c
        items.append((a, e))
    return coef, _mono(items)


def _mono_pow(m, q: Fraction, var, fresh: bool = False):
    coef = RationalFunction.const(1, var)
    items = []
    for a, e in m:
        if q.denominator != 1 and not fresh and a[0] != "sym":
            raise AssertionError("fractional power of a compound monomial")
        ne = e * q
        if a[0] == "rad":
            c, ne = _split_rad(a, ne, var)
            coef = coef * c
        items.append((a, ne))
    return coef, _mono(items)


def _expand_whole_opaque(n: Normal) -> Normal:
    """Re-expand opaque atoms whose exponents combined to a nonnegative integer."""
    if not any(a[0] == "opaque" and e.denominator == 1 and e > 0 for m in n.terms for a, e in m):
        return n
    acc = Normal({}, n.var)
    for m, c in n.terms.items():
        rest = []
        term = Normal.scalar(c, n.var)
        for a, e in m:
            if a[0] == "opaque" and e.denominator == 1 and e > 0:
                term = term * (to_normal(a[1], n.var) ** int(e))
            else:
                rest.append((a, e))
        acc = acc + term * Normal({_mono(rest): RationalFunction.const(1, n.var)}, n.var)
    return acc


def to_normal(e: Expr, var: str = "t") -> Normal:
    """Bring ``e`` to normal form with main variable ``var``."""
    one = RationalFunction.const(1, var)
    if isinstance(e, Const):
        return Normal.scalar(RationalFunction.const(e.value, var), var)
    if isinstance(e, Var):
        if e.name == var:
            return Normal.scalar(RationalFunction.variable(var), var)
        return Normal({((("sym", e.name), Fraction(1)),): one}, var)
    if isinstance(e, Sum):
        acc = Normal({}, var)
        for t in e.terms:
            acc = acc + to_normal(t, var)
        return acc
    if isinstance(e, Prod):
        acc = Normal.scalar(one, var)
        for f in e.factors:
            acc = acc * to_normal(f, var)
            if acc.is_zero():
                break
        return acc
    if isinstance(e, Quot):
        return to_normal(e.num, var) * to_normal(e.den, var).inverse()
    if isinstance(e, Pow):
        b = to_normal(e.base, var)
        if e.exp.denominator == 1:
            return b ** int(e.exp)
        return b.fractional_power(e.exp)
    raise TypeError(e)


def simplify(e: Expr, var: str = "t") -> Expr:
    """Collected, cancelled form of ``e`` (best effort for non-rational input)."""
    return to_normal(e, var).to_expr()


def is_zero(e: Expr, var: str = "t") -> bool:
    return to_normal(e, var).is_zero()


def simplify_rational(e: Expr, var: str = "t") -> RationalFunction:
    """Normalized rational function equal to ``e``.

    Raises :class:`NotRationalError` when fractional powers or foreign
    symbols survive simplification.
    """
    n = to_normal(e, var)
    r = n.rational_part()
    if r is None:
        raise NotRationalError(f"not rational in {var}: {to_text(normalize(e))}")
    return r
