"""Griffiths-Dwork pole reduction on y^2 = f(x, t).

Forms are kept as finite sums ``sum_k P_k(x) / y^k dx`` with odd ``k`` and
``P_k`` polynomials in x over Q(t).  Reducing modulo exact differentials
d_x(B / y^k) brings every form to the basis ``x^j / y dx`` with
``j < deg f - 1``; the exact parts that are discarded are tracked so that
every derived operator comes with a certificate that can be re-checked by
plain differentiation.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exprlang import (
    Const,
    DiffOperator,
    Expr,
    NotRationalError,
    Poly,
    RationalFunction,
    Var,
    add,
    differentiate,
    div,
    eval_expr,
    is_zero,
    mul,
    parse_expr,
    power,
    rf_to_expr,
    simplify,
    substitute,
    to_normal,
    to_text,
)


class NotSquarefreeError(ValueError):
    """f shares a factor with f_x, so the Bezout split does not exist."""


class NoRelationError(RuntimeError):
    """No linear relation among the t-derivatives up to the requested order."""


class SectionError(ValueError):
    """A section does not lie on the curve, or the boundary term diverges."""


def _rf_zero(var: str) -> RationalFunction:
    return RationalFunction.const(0, var)


def _rf(c, var: str) -> RationalFunction:
    return c if isinstance(c, RationalFunction) else RationalFunction.const(c, var)


def _xpoly(coeffs, var: str) -> Poly:
    return Poly([c if isinstance(c, RationalFunction) else RationalFunction.const(c, var) for c in coeffs])


def _dt(p: Poly) -> Poly:
    return Poly([c.derivative() if isinstance(c, RationalFunction) else 0 for c in p.coeffs])


def _det(rows: list[list[RationalFunction]], var: str) -> RationalFunction:
    m = [list(r) for r in rows]
    n = len(m)
    det = RationalFunction.const(1, var)
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            return _rf_zero(var)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            if m[r][col].is_zero():
                continue
            factor = m[r][col] / p
            m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def _resultant(a: Poly, b: Poly, var: str) -> RationalFunction:
    da, db = a.degree, b.degree
    n = da + db
    zero = _rf_zero(var)
    rows = []
    for i in range(db):
        row = [zero] * n
        for j, c in enumerate(reversed(a.coeffs)):
            row[i + j] = c
        rows.append(row)
    for i in range(da):
        row = [zero] * n
        for j, c in enumerate(reversed(b.coeffs)):
            row[i + j] = c
        rows.append(row)
    return _det(rows, var)


@dataclass(frozen=True)
class CurveFamily:
    """y^2 = f(x, t) with f a squarefree cubic or quartic in x over Q(t)."""

    f: Poly
    xvar: str = "x"
    tvar: str = "t"
    text: str = ""

    def __post_init__(self):
        if self.f.degree not in (3, 4):
            raise ValueError(f"f must have degree 3 or 4 in {self.xvar}, got {self.f.degree}")
        g = Poly.gcd(self.f, self.f.derivative())
        if g.degree > 0:
            raise NotSquarefreeError(f"f is not squarefree in {self.xvar}")
        if not self.text:
            object.__setattr__(self, "text", to_text(self.as_expr()))

    @classmethod
    def from_text(cls, text: str, xvar: str = "x", tvar: str = "t") -> "CurveFamily":
        return cls.from_expr(parse_expr(text), xvar, tvar, text)

    @classmethod
    def from_expr(cls, e: Expr, xvar: str = "x", tvar: str = "t", text: str = "") -> "CurveFamily":
        n = to_normal(e, tvar)
        coeffs: dict[int, RationalFunction] = {}
        for mono, c in n.terms.items():
            if not mono:
                k = 0
            elif len(mono) == 1 and mono[0][0] == ("sym", xvar) and mono[0][1].denominator == 1 and mono[0][1] > 0:
                k = int(mono[0][1])
            else:
                raise NotRationalError(f"f must be polynomial in {xvar} over Q({tvar}): {text or to_text(e)}")
            coeffs[k] = c
        deg = max(coeffs, default=0)
        return cls(_xpoly([coeffs.get(k, _rf_zero(tvar)) for k in range(deg + 1)], tvar), xvar, tvar, text)

    @property
    def degree(self) -> int:
        return self.f.degree

    @property
    def f_x(self) -> Poly:
        return self.f.derivative()

    @property
    def f_t(self) -> Poly:
        return _dt(self.f)

    def discriminant(self) -> RationalFunction:
        n = self.degree
        res = _resultant(self.f, self.f_x, self.tvar)
        sign = -1 if (n * (n - 1) // 2) % 2 else 1
        return sign * res / self.f.lc

    def excluded(self) -> list[complex]:
        """Parameter values where the discriminant vanishes or a coefficient has a pole."""
        pts: list[complex] = []
        polys = [self.discriminant().num] + [c.den for c in self.f.coeffs]
        for p in polys:
            if p.degree > 0:
                pts.extend(complex(r) for r in np.roots([float(c) for c in reversed(p.coeffs)]))
        out: list[complex] = []
        for z in sorted(pts, key=lambda z: (z.real, z.imag)):
            if not any(abs(z - w) < 1e-9 for w in out):
                out.append(z)
        return out

    def coeffs_at(self, t) -> list[complex]:
        return [complex(c(t)) for c in self.f.coeffs]

    def roots_at(self, t) -> np.ndarray:
        return np.roots(list(reversed(self.coeffs_at(t))))

    def poly_expr(self, p: Poly, x: Expr | None = None) -> Expr:
        x = Var(self.xvar) if x is None else x
        return add(*[mul(rf_to_expr(_rf(c, self.tvar)), power(x, k)) for k, c in enumerate(p.coeffs) if c != 0])

    def as_expr(self) -> Expr:
        return self.poly_expr(self.f)


# forms sum_k P_k / y^k dx


@dataclass(frozen=True)
class Form:
    """Finite sum of ``P_k(x) / y^k`` with odd k; immutable."""

    terms: dict = field(default_factory=dict)

    @staticmethod
    def single(p: Poly, k: int) -> "Form":
        return Form({k: p}) if not p.is_zero() else Form()

    def __add__(self, other: "Form") -> "Form":
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return Form({k: p for k, p in out.items() if not p.is_zero()})

    def scale(self, r: RationalFunction) -> "Form":
        if r.is_zero():
            return Form()
        return Form({k: p * r for k, p in self.terms.items()})

    def dt(self, fam: CurveFamily) -> "Form":
        """Partial derivative in t at fixed x."""
        out = Form()
        ft = fam.f_t
        for k, p in self.terms.items():
            out = out + Form.single(_dt(p), k)
            out = out + Form.single(p * ft * RationalFunction.const(Fraction(-k, 2), fam.tvar), k + 2)
        return out

    def dx(self, fam: CurveFamily) -> "Form":
        """Derivative in x (as a coefficient of dx)."""
        out = Form()
        fx = fam.f_x
        for k, p in self.terms.items():
            out = out + Form.single(p.derivative(), k)
            out = out + Form.single(p * fx * RationalFunction.const(Fraction(-k, 2), fam.tvar), k + 2)
        return out

    def common(self, fam: CurveFamily) -> tuple[Poly, int]:
        """(S, K) with the form equal to S / y^K."""
        if not self.terms:
            return Poly(), 1
        K = max(self.terms)
        S = Poly()
        for k, p in self.terms.items():
            S = S + p * fam.f ** ((K - k) // 2)
        return S, K

    def equals(self, other: "Form", fam: CurveFamily) -> bool:
        S1, K1 = self.common(fam)
        S2, K2 = other.common(fam)
        K = max(K1, K2)
        return S1 * fam.f ** ((K - K1) // 2) == S2 * fam.f ** ((K - K2) // 2)

    def to_expr(self, fam: CurveFamily, yname: str = "y") -> Expr:
        S, K = self.common(fam)
        if S.is_zero():
            return Const(Fraction(0))
        return div(fam.poly_expr(S), power(Var(yname), K))

    def y_rational(self, fam: CurveFamily) -> tuple[Poly, Poly]:
        """(num, den), gcd-reduced with den monic, such that the form is y * num / den.

        Uses 1/y^K = y / f^((K+1)/2); the reduced shape stays regular at
        points with y = 0 whenever the form itself is.
        """
        S, K = self.common(fam)
        one = RationalFunction.const(1, fam.tvar)
        if S.is_zero():
            return Poly(), Poly([one])
        den = fam.f ** ((K + 1) // 2)
        g = Poly.gcd(S, den)
        num, den = S // g, den // g
        lead = _rf(den.lc, fam.tvar)
        return num * lead.inverse(), den * lead.inverse()

    def to_y_expr(self, fam: CurveFamily, yname: str = "y") -> Expr:
        num, den = self.y_rational(fam)
        if num.is_zero():
            return Const(Fraction(0))
        return mul(Var(yname), div(fam.poly_expr(num), fam.poly_expr(den)))


def _bezout(fam: CurveFamily) -> tuple[Poly, Poly]:
    g, u, v = Poly.xgcd(fam.f, fam.f_x)
    if g.degree != 0:
        raise NotSquarefreeError("gcd(f, f_x) is not constant")
    return u, v


def _reduce(P: Poly, k: int, fam: CurveFamily) -> tuple[list[RationalFunction], Form]:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"pole order must be odd and positive, got {k}")
    n = fam.degree
    tv = fam.tvar
    exact = Form()
    if P.is_zero():
        return [_rf_zero(tv)] * (n - 1), exact
    _, V = _bezout(fam)
    f, fx = fam.f, fam.f_x
    while k > 1:
        m = k - 2
        B = (P * V) % f
        A = (P - B * fx) // f
        w = RationalFunction.const(Fraction(2, m), tv)
        P = A + B.derivative() * w
        exact = exact + Form.single(B * (-w), m)
        k = m
    lcf = f.lc
    while P.degree >= n - 1:
        j = P.degree - n + 1
        c = P.lc / (lcf * RationalFunction.const(Fraction(2 * j + n, 2), tv))
        xj = Poly.monomial(j, RationalFunction.const(1, tv))
        dterm = xj.derivative() * f + xj * fx * RationalFunction.const(Fraction(1, 2), tv)
        P = P - dterm * c
        exact = exact + Form.single(xj * f * c, 1)
    return [_rf(P[j], tv) for j in range(n - 1)], exact


def reduce_form(P, k: int, family: CurveFamily) -> tuple[list[RationalFunction], Expr]:
    """Write P/y^k dx = sum_j c_j x^j/y dx + d_x(exact) with j < deg f - 1."""
    if isinstance(P, (str, Expr)):
        P = _as_xpoly(P, family)
    cs, exact = _reduce(P, k, family)
    return cs, exact.to_expr(family)


def _as_xpoly(P, fam: CurveFamily) -> Poly:
    e = parse_expr(P) if isinstance(P, str) else P
    n = to_normal(e, fam.tvar)
    coeffs: dict[int, RationalFunction] = {}
    for mono, c in n.terms.items():
        if not mono:
            k = 0
        elif len(mono) == 1 and mono[0][0] == ("sym", fam.xvar) and mono[0][1].denominator == 1 and mono[0][1] > 0:
            k = int(mono[0][1])
        else:
            raise NotRationalError(f"not a polynomial in {fam.xvar}: {to_text(e)}")
        coeffs[k] = c
    return _xpoly([coeffs.get(k, _rf_zero(fam.tvar)) for k in range(max(coeffs, default=-1) + 1)], fam.tvar)


def _solve(columns: list[list[RationalFunction]], rhs: list[RationalFunction], var: str):
    """Exact solution of sum_i x_i * columns[i] = rhs over Q(t), or None."""
    nrows = len(rhs)
    ncols = len(columns)
    m = [[columns[j][r] for j in range(ncols)] + [rhs[r]] for r in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, nrows) if not m[r][col].is_zero()), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        p = m[row][col]
        m[row] = [a / p for a in m[row]]
        for r in range(nrows):
            if r != row and not m[r][col].is_zero():
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
    if any(not m[r][ncols].is_zero() for r in range(row, nrows)):
        return None
    sol = [_rf_zero(var)] * ncols
    for r, col in enumerate(pivots):
        sol[col] = m[r][ncols]
    return sol


@dataclass(frozen=True)
class Certificate:
    """operator(dx/y) = d_x(exact) identically on y^2 = f."""

    operator: DiffOperator
    exact: Form
    family: CurveFamily
    unit: RationalFunction

    @property
    def exact_part(self) -> Expr:
        return self.exact.to_y_expr(self.family)

    def to_json(self) -> str:
        return json.dumps({
            "operator": self.operator.to_text(),
            "exact_part": to_text(self.exact_part),
            "family": self.family.text,
        }, sort_keys=True)


def derive_picard_fuchs(family: CurveFamily, max_order: int = 2) -> Certificate:
    """Lowest-order operator annihilating dx/y modulo exact forms, with certificate.

    The operator is reported with polynomial, content-free coefficients; the
    unit relating it to the monic operator is kept on the certificate.
    """
    tv = family.tvar
    one = RationalFunction.const(1, tv)
    cs, E = _reduce(Poly([one]), 1, family)
    vecs, exacts = [cs], [E]
    for order in range(1, max_order + 1):
        cur = vecs[-1]
        P1 = Poly([_rf(c, tv).derivative() for c in cur])
        P3 = Poly(cur) * family.f_t * RationalFunction.const(Fraction(-1, 2), tv)
        new_c, new_e = _reduce(P3 + P1 * family.f, 3, family)
        vecs.append(new_c)
        exacts.append(exacts[-1].dt(family) + new_e)
        sol = _solve(vecs[:-1], [-c for c in vecs[-1]], tv)
        if sol is None:
            continue
        b = sol + [one]
        monic = DiffOperator(tuple(b), tv)
        op, unit = monic.primitive()
        R = Form()
        for bi, Ei in zip(b, exacts):
            R = R + Ei.scale(bi)
        cert = Certificate(op, R.scale(unit), family, unit)
        return cert
    raise NoRelationError(f"no Picard-Fuchs relation of order <= {max_order}")


def direct_derivatives(family: CurveFamily, order: int) -> list[Form]:
    """[d^i/dt^i (1/y) for i = 0..order] by plain differentiation."""
    out = [Form.single(Poly([RationalFunction.const(1, family.tvar)]), 1)]
    for _ in range(order):
        out.append(out[-1].dt(family))
    return out


def verify_certificate(cert: Certificate) -> bool:
    """Exact re-check: sum_i a_i d_t^i(1/y) == d_x(exact)."""
    fam = cert.family
    lhs = Form()
    for a, d in zip(cert.operator.coeffs, direct_derivatives(fam, cert.operator.order)):
        lhs = lhs + d.scale(a)
    return lhs.equals(cert.exact.dx(fam), fam)


def is_minimal(cert: Certificate) -> bool:
    """No relation exists one order lower."""
    if cert.operator.order == 1:
        return True
    try:
        lower = derive_picard_fuchs(cert.family, cert.operator.order - 1)
    except NoRelationError:
        return True
    return lower.operator.order >= cert.operator.order


# sections and inhomogeneities


@dataclass(frozen=True)
class SectionSpec:
    """Algebraic section (X(t), Y(t)) of a curve family.

    ``branch`` records which square root Y denotes: "principal" means the
    expression exactly as written, evaluated on principal branches.
    """

    X: Expr
    Y: Expr
    family: CurveFamily
    branch: str = "principal"

    @classmethod
    def from_x(cls, X, family: CurveFamily) -> "SectionSpec":
        """Section with Y = sqrt(f(X, t)) on the principal branch."""
        Xe = parse_expr(X) if isinstance(X, str) else X
        fX = substitute(family.as_expr(), {family.xvar: Xe})
        return cls(Xe, power(simplify(fX, family.tvar), Fraction(1, 2)), family)

    def on_curve(self, samples: int = 5, seed: int = 0) -> bool:
        fam = self.family
        fX = substitute(fam.as_expr(), {fam.xvar: self.X})
        resid = add(mul(self.Y, self.Y), mul(Const(Fraction(-1)), fX))
        if is_zero(resid, fam.tvar):
            return True
        rng = random.Random(seed)
        for _ in range(samples):
            t = Fraction(rng.randint(11, 89), 100)
            v = eval_expr(resid, {fam.tvar: float(t)})
            scale = 1.0 + abs(eval_expr(fX, {fam.tvar: float(t)}))
            if abs(v) > 1e-12 * scale:
                return False
        return True

    def eval_x(self, t: complex) -> complex:
        return eval_expr(self.X, {self.family.tvar: t})

    def eval_y(self, t: complex) -> complex:
        return eval_expr(self.Y, {self.family.tvar: t})


def _boundary_at_infinity(cert: Certificate) -> Expr:
    """Limit of the exact part as x -> infinity with y ~ +sqrt(lc f) x^(n/2)."""
    fam = cert.family
    num, den = cert.exact.y_rational(fam)
    if num.is_zero():
        return Const(Fraction(0))
    growth = Fraction(2 * num.degree + fam.degree - 2 * den.degree, 2)
    if growth < 0:
        return Const(Fraction(0))
    if growth == 0:
        ratio = _rf(num.lc, fam.tvar) / _rf(den.lc, fam.tvar)
        return mul(rf_to_expr(ratio), power(rf_to_expr(fam.f.lc), Fraction(1, 2)))
    raise SectionError("certificate has a pole at x = infinity")


def exact_inhomogeneity(cert: Certificate, section: SectionSpec, check: bool = True) -> Expr:
    """g(t) = operator applied to the integral of dx/y from infinity to X(t).

    Writing F(x, t) for the integral, nu(t) = F(X(t), t) and the j-th total
    derivative is d_t^j F at (X, t) plus an algebraic remainder A_j built
    from X' and the known partials d_t^i(1/y).  The operator then collapses
    the d_t^j F terms to the certificate boundary values.
    """
    fam = cert.family
    tv = fam.tvar
    if check and not section.on_curve():
        raise SectionError("section does not satisfy Y^2 = f(X, t)")
    X, Y = section.X, section.Y
    sub = {fam.xvar: X, "y": Y}
    try:
        boundary = add(substitute(cert.exact_part, sub), mul(Const(Fraction(-1)), _boundary_at_infinity(cert)))
    except ZeroDivisionError as exc:
        raise SectionError(f"certificate is singular along the section: {exc}") from exc
    partials = direct_derivatives(fam, cert.operator.order)
    Xp = differentiate(X, tv)
    moving = not is_zero(Xp, tv)
    A = Const(Fraction(0))
    rem = [A]
    for j in range(cert.operator.order):
        step = differentiate(A, tv)
        if moving:
            step = add(step, mul(substitute(partials[j].to_y_expr(fam), sub), Xp))
        A = step
        rem.append(A)
    g = boundary
    for a, Aj in zip(cert.operator.coeffs, rem):
        if not a.is_zero():
            g = add(g, mul(rf_to_expr(a), Aj))
    return simplify(g, tv)


def exact_inhomogeneity_sum(cert: Certificate, cycle: list[tuple[int, SectionSpec]]) -> Expr:
    """g of a formal integer combination of sections."""
    terms = [mul(Const(Fraction(n)), exact_inhomogeneity(cert, s)) for n, s in cycle]
    return simplify(add(*terms), cert.family.tvar)
