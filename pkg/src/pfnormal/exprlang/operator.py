"""Linear differential operators with exact rational-function coefficients."""

from __future__ import annotations

from dataclasses import dataclass

from .canon import NotRationalError, to_normal
from .expr import Expr, add, differentiate, mul, rf_to_expr
from .parser import parse_expr
from .rational import Poly, RationalFunction, poly_text

OPERATOR_SYMBOL = "d"


@dataclass(frozen=True)
class DiffOperator:
    """sum_i coeffs[i](var) * (d/dvar)^i."""

    coeffs: tuple
    var: str = "t"

    def __post_init__(self):
        cs = [c if isinstance(c, RationalFunction) else RationalFunction.const(c, self.var)
              for c in self.coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        if len(cs) < 2:
            raise ValueError("operator order must be at least 1")
        object.__setattr__(self, "coeffs", tuple(c.with_var(self.var) for c in cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> RationalFunction:
        return self.coeffs[-1]

    def monic(self) -> "DiffOperator":
        lead = self.leading
        return DiffOperator(tuple(c / lead for c in self.coeffs), self.var)

    def scale(self, r) -> "DiffOperator":
        return DiffOperator(tuple(c * r for c in self.coeffs), self.var)

    def is_proportional(self, other: "DiffOperator") -> bool:
        return self.var == other.var and self.monic() == other.monic()

    def primitive(self) -> tuple["DiffOperator", RationalFunction]:
        """Polynomial coefficients with content removed.

        Returns ``(op, unit)`` with ``op == unit * self.monic()``; the unit is
        fixed by making the lowest-order term of the leading coefficient 1.
        """
        m = self.monic()
        den = Poly([1])
        for c in m.coeffs:
            den = _lcm(den, c.den)
        g = Poly()
        for c in m.coeffs:
            g = Poly.gcd(g, (c * RationalFunction(den, var=self.var)).num)
        unit = RationalFunction(den, g, var=self.var)
        lead = (m.leading * unit).num
        unit = unit / next(c for c in lead.coeffs if c != 0)
        return m.scale(unit), unit

    def apply(self, e: Expr) -> Expr:
        """sum_i a_i * d^i e / dvar^i as an expression."""
        terms = []
        cur = e
        for i, a in enumerate(self.coeffs):
            if i:
                cur = differentiate(cur, self.var)
            if not a.is_zero():
                terms.append(mul(rf_to_expr(a), cur))
        return add(*terms)

    def to_text(self) -> str:
        parts = []
        for i in range(self.order, -1, -1):
            c = self.coeffs[i]
            if c.is_zero():
                continue
            dpart = "" if i == 0 else (OPERATOR_SYMBOL if i == 1 else f"{OPERATOR_SYMBOL}^{i}")
            if c == 1 and dpart:
                body, negative = dpart, False
            elif c == -1 and dpart:
                body, negative = dpart, True
            elif c.is_constant():
                v = c.constant_value()
                negative = v < 0
                mag = RationalFunction.const(abs(v), self.var)
                body = mag.to_text() + (f"*{dpart}" if dpart else "")
            else:
                negative = False
                ctext = _coeff_text(c)
                body = ctext + (f"*{dpart}" if dpart else "")
            if not parts:
                parts.append(("-" if negative else "") + body)
            else:
                parts.append((" - " if negative else " + ") + body)
        return "".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"DiffOperator({self.to_text()!r})"


def _coeff_text(c: RationalFunction) -> str:
    if c.den.degree == 0:
        return f"({poly_text(c.num, c.var)})"
    return f"({c.to_text()})"


def _lcm(a, b):
    g = Poly.gcd(a, b)
    return (a * b) // g


def parse_operator(text: str, var: str = "t") -> DiffOperator:
    """Parse a polynomial in the reserved symbol ``d`` with rational coefficients."""
    n = to_normal(parse_expr(text), var)
    order = 0
    coeffs: dict[int, RationalFunction] = {}
    for mono, c in n.terms.items():
        if not mono:
            k = 0
        elif len(mono) == 1 and mono[0][0] == ("sym", OPERATOR_SYMBOL) and mono[0][1].denominator == 1 and mono[0][1] > 0:
            k = int(mono[0][1])
        else:
            raise NotRationalError(f"operator coefficient is not rational in {var}: {text}")
        coeffs[k] = c
        order = max(order, k)
    return DiffOperator(tuple(coeffs.get(k, RationalFunction.const(0, var)) for k in range(order + 1)), var)


def apply_operator(D: DiffOperator, e: Expr) -> Expr:
    return D.apply(e)


def _compose_first_order(phi: RationalFunction, coeffs: list) -> list:
    """(d + phi) o L for L = sum coeffs[j] d^j."""
    zero = RationalFunction.const(0, phi.var)
    out = [zero] * (len(coeffs) + 1)
    for j, l in enumerate(coeffs):
        out[j] = out[j] + l.derivative() + phi * l
        out[j + 1] = out[j + 1] + l
    return out


def conjugate_operator(D: DiffOperator, phi: RationalFunction) -> DiffOperator:
    """exp(-int phi) o D o exp(int phi), i.e. D with d replaced by d + phi."""
    phi = phi if isinstance(phi, RationalFunction) else RationalFunction.const(phi, D.var)
    phi = phi.with_var(D.var)
    one = RationalFunction.const(1, D.var)
    total = [RationalFunction.const(0, D.var)] * (D.order + 1)
    power = [one]
    for i, a in enumerate(D.coeffs):
        if i:
            power = _compose_first_order(phi, power)
        for j, c in enumerate(power):
            total[j] = total[j] + a * c
    return DiffOperator(tuple(total), D.var)


def symmetric_square(D2: DiffOperator) -> DiffOperator:
    """Order-3 operator annihilating products of solutions of an order-2 operator."""
    if D2.order != 2:
        raise ValueError(f"symmetric_square needs order 2, got {D2.order}")
    q, p, _ = D2.monic().coeffs
    one = RationalFunction.const(1, D2.var)
    a1 = 2 * p * p + p.derivative() + 4 * q
    a0 = 4 * p * q + 2 * q.derivative()
    return DiffOperator((a0, a1, 3 * p, one), D2.var)
