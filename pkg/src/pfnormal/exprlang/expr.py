"""Immutable expression trees over exact rationals.

Nodes are frozen dataclasses, so structural equality and hashing come for
free.  The smart constructors (``add``, ``mul``, ``div``, ``power``) do only
local clean-up (constant folding, flattening, identity removal); algebraic
simplification lives in :mod:`pfnormal.exprlang.canon`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .rational import PoleError, Poly, RationalFunction


class UnboundVariableError(KeyError):
    """A free variable had no value in the evaluation assignment."""


class BranchError(ValueError):
    """Fractional power of a negative real on the principal branch."""


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, q):
        return power(self, Fraction(q))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True, slots=True)
class Prod(Expr):
    factors: tuple


@dataclass(frozen=True, slots=True)
class Quot(Expr):
    num: Expr
    den: Expr

    def __post_init__(self):
        if isinstance(self.den, Const) and self.den.value == 0:
            raise ZeroDivisionError("quotient with constant zero denominator")


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exp: Fraction

    def __post_init__(self):
        if not isinstance(self.exp, Fraction):
            object.__setattr__(self, "exp", Fraction(self.exp))


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, RationalFunction):
        return rf_to_expr(x)
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    if isinstance(x, str):
        return Var(x)
    raise TypeError(f"cannot convert {x!r} to Expr")


# ---------------------------------------------------------------- smart constructors

def add(*terms: Expr) -> Expr:
    flat = []
    const = Fraction(0)
    for t in terms:
        items = t.terms if isinstance(t, Sum) else (t,)
        for s in items:
            if isinstance(s, Const):
                const += s.value
            else:
                flat.append(s)
    if const != 0 or not flat:
        flat.insert(0, Const(const))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat = []
    const = Fraction(1)
    for f in factors:
        items = f.factors if isinstance(f, Prod) else (f,)
        for s in items:
            if isinstance(s, Const):
                const *= s.value
            else:
                flat.append(s)
    if const == 0:
        return ZERO
    if const != 1 or not flat:
        flat.insert(0, Const(const))
    return flat[0] if len(flat) == 1 else Prod(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(Const(Fraction(-1)), e)


def div(num: Expr, den: Expr) -> Expr:
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("division by constant zero")
        return mul(Const(1 / den.value), num)
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    return Quot(num, den)


def power(base: Expr, q) -> Expr:
    q = Fraction(q)
    if q == 0:
        return ONE
    if q == 1:
        return base
    if isinstance(base, Const):
        if q.denominator == 1:
            if base.value == 0 and q < 0:
                raise ZeroDivisionError("zero to a negative power")
            return Const(base.value ** int(q))
        root = _exact_root(base.value, q)
        if root is not None:
            return Const(root)
    if isinstance(base, Pow) and (q.denominator == 1 or abs(base.exp) < 1):
        # (b^p)^q = b^(pq) on the principal branch when q is an integer or |p| < 1
        return power(base.base, base.exp * q)
    return Pow(base, q)


def _exact_root(v: Fraction, q: Fraction):
    if v < 0:
        return None
    k = q.denominator
    num = _int_root(v.numerator, k)
    den = _int_root(v.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** q.numerator


def _int_root(n: int, k: int):
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x ** k == n else None


# ---------------------------------------------------------------- structural normalization

def normalize(e: Expr) -> Expr:
    """Canonical structural form: flattened sums/products, folded constants.

    Purely structural; it never expands, collects or cancels.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Sum):
        return add(*(normalize(t) for t in e.terms))
    if isinstance(e, Prod):
        return mul(*(normalize(f) for f in e.factors))
    if isinstance(e, Quot):
        num, den = normalize(e.num), normalize(e.den)
        if isinstance(num, Const) and isinstance(den, Const):
            return Const(num.value / den.value)
        if isinstance(den, Const):
            return mul(Const(1 / den.value), num)
        return Quot(num, den)
    if isinstance(e, Pow):
        base = normalize(e.base)
        if isinstance(base, Const) and e.exp.denominator == 1:
            return Const(base.value ** int(e.exp))
        if e.exp == 1:
            return base
        return Pow(base, e.exp)
    raise TypeError(e)


# ---------------------------------------------------------------- printing

def _rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _exp_text(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({_rat(q)})"


def to_text(e: Expr) -> str:
    """Text form that parses back to a normalize-equal tree."""
    if isinstance(e, Const):
        return _rat(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        out = []
        for i, term in enumerate(e.terms):
            if i == 0:
                out.append(to_text(term))
                continue
            neg_form = _negated_term(term)
            if neg_form is not None:
                out.append(" - " + to_text(neg_form))
            else:
                out.append(" + " + to_text(term))
        return "".join(out)
    if isinstance(e, Prod):
        parts = []
        for i, f in enumerate(e.factors):
            text = to_text(f)
            if isinstance(f, Sum):
                text = f"({text})"
            elif i > 0 and isinstance(f, Quot):
                text = f"({text})"
            elif i > 0 and isinstance(f, Const) and (f.value < 0 or f.value.denominator != 1):
                text = f"({text})"
            parts.append(text)
        return "*".join(parts)
    if isinstance(e, Quot):
        num = to_text(e.num)
        if isinstance(e.num, Sum):
            num = f"({num})"
        den = to_text(e.den)
        if isinstance(e.den, (Sum, Prod, Quot, Const)):
            den = f"({den})"
        return f"{num}/{den}"
    if isinstance(e, Pow):
        b = e.base
        base = to_text(b)
        simple = isinstance(b, Var) or (
            isinstance(b, Const) and b.value >= 0 and b.value.denominator == 1
        )
        if not simple:
            base = f"({base})"
        return f"{base}^{_exp_text(e.exp)}"
    raise TypeError(e)


def _negated_term(term: Expr):
    if isinstance(term, Const) and term.value < 0:
        return Const(-term.value)
    if isinstance(term, Prod) and isinstance(term.factors[0], Const) and term.factors[0].value < 0:
        c = -term.factors[0].value
        rest = term.factors[1:]
        if c == 1:
            return rest[0] if len(rest) == 1 else Prod(rest)
        return Prod((Const(c),) + rest)
    return None


# ---------------------------------------------------------------- calculus

def differentiate(e: Expr, var: str) -> Expr:
    """Exact derivative by structural rules."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Sum):
        return add(*(differentiate(t, var) for t in e.terms))
    if isinstance(e, Prod):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = differentiate(f, var)
            if df == ZERO:
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms) if terms else ZERO
    if isinstance(e, Quot):
        du = differentiate(e.num, var)
        dv = differentiate(e.den, var)
        if dv == ZERO:
            return div(du, e.den)
        top = add(mul(du, e.den), neg(mul(e.num, dv)))
        return div(top, power(e.den, 2))
    if isinstance(e, Pow):
        db = differentiate(e.base, var)
        if db == ZERO:
            return ZERO
        return mul(Const(e.exp), power(e.base, e.exp - 1), db)
    raise TypeError(e)


def free_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Sum):
        return set().union(*(free_vars(t) for t in e.terms))
    if isinstance(e, Prod):
        return set().union(*(free_vars(f) for f in e.factors))
    if isinstance(e, Quot):
        return free_vars(e.num) | free_vars(e.den)
    return free_vars(e.base)


def substitute(e: Expr, mapping: Mapping[str, Union[Expr, int, Fraction]]) -> Expr:
    """Replace variables; rebuilt through the smart constructors."""
    m = {k: as_expr(v) for k, v in mapping.items()}

    def go(x):
        if isinstance(x, Var):
            return m.get(x.name, x)
        if isinstance(x, Const):
            return x
        if isinstance(x, Sum):
            return add(*(go(t) for t in x.terms))
        if isinstance(x, Prod):
            return mul(*(go(f) for f in x.factors))
        if isinstance(x, Quot):
            return div(go(x.num), go(x.den))
        return power(go(x.base), x.exp)

    return go(e)


# ---------------------------------------------------------------- evaluation

def eval_expr(e: Expr, assignment: Mapping[str, complex], strict: bool = True) -> complex:
    """Numeric value with principal branches for rational powers.

    With ``strict`` a fractional power of a negative real raises
    :class:`BranchError`; otherwise the principal complex value is used.
    """

    def go(x):
        if isinstance(x, Const):
            return complex(x.value)
        if isinstance(x, Var):
            try:
                return complex(assignment[x.name])
            except KeyError:
                raise UnboundVariableError(x.name) from None
        if isinstance(x, Sum):
            return sum((go(t) for t in x.terms), 0j)
        if isinstance(x, Prod):
            acc = 1 + 0j
            for f in x.factors:
                acc *= go(f)
            return acc
        if isinstance(x, Quot):
            d = go(x.den)
            if d == 0:
                raise PoleError(f"pole: denominator {to_text(x.den)} vanishes")
            return go(x.num) / d
        b = go(x.base)
        q = x.exp
        if b == 0:
            if q < 0:
                raise PoleError(f"pole: {to_text(x.base)} = 0 under power {q}")
            return 0j
        if q.denominator == 1:
            return b ** int(q)
        if b.imag == 0 and b.real < 0 and strict:
            raise BranchError(f"negative real {b.real} under power {q}")
        if q.denominator == 2:
            r = cmath.sqrt(b)
            return r ** q.numerator
        return cmath.exp(float(q) * cmath.log(b))

    return go(e)


# ---------------------------------------------------------------- conversions

def poly_to_expr(p: Poly, var: str) -> Expr:
    terms = []
    v = Var(var)
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        terms.append(mul(Const(c), power(v, k)))
    return add(*terms) if terms else ZERO


def rf_to_expr(r: RationalFunction) -> Expr:
    num = poly_to_expr(r.num, r.var)
    if r.den.degree == 0:
        return num
    return div(num, poly_to_expr(r.den, r.var))
