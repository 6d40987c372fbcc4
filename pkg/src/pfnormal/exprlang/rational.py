"""Dense univariate polynomials and exact rational functions over Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class PoleError(ZeroDivisionError):
    """Evaluation hit a pole (zero denominator)."""


def _is_zero(c) -> bool:
    return c == 0


def _div(a, b):
    """Field division that keeps integer operands exact."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


class Poly:
    """Dense polynomial with ascending coefficients.

    Coefficients only need field arithmetic, so the same class serves
    Q[t] (``Fraction`` coefficients) and Q(t)[x] (``RationalFunction``
    coefficients).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = list(coeffs)
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    def __rmul__(self, other):
        return Poly([other * c for c in self.coeffs])

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lc
        if len(rem) - 1 < dq:
            return Poly(), Poly(rem)
        quo = [0] * (len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = _div(rem[k + dq], lead)
            quo[k] = c
            if _is_zero(c):
                continue
            for j, b in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * b
        return Poly(quo), Poly(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.lc
        return Poly([_div(c, lead) for c in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def map(self, fn) -> "Poly":
        return Poly([fn(c) for c in self.coeffs])

    @staticmethod
    def gcd(a: "Poly", b: "Poly") -> "Poly":
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    @staticmethod
    def xgcd(a: "Poly", b: "Poly"):
        """Return (g, u, v) with u*a + v*b = g, g monic."""
        r0, r1 = a, b
        u0, u1 = Poly([1]), Poly()
        v0, v1 = Poly(), Poly([1])
        while not r1.is_zero():
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            u0, u1 = u1, u0 - q * u1
            v0, v1 = v1, v0 - q * v1
        if r0.is_zero():
            return r0, u0, v0
        lead = r0.lc
        inv = _div(1, lead)
        return r0 * inv, u0 * inv, v0 * inv


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _qpoly(p) -> Poly:
    if isinstance(p, Poly):
        return Poly([_frac(c) for c in p.coeffs])
    return Poly([_frac(c) for c in p])


class RationalFunction:
    """Exact element of Q(var): gcd-reduced, monic denominator."""

    __slots__ = ("num", "den", "var")

    def __init__(self, num, den=None, var: str = "t", _normalized: bool = False):
        num = _qpoly(num) if not isinstance(num, Poly) or not _normalized else num
        den = Poly([Fraction(1)]) if den is None else den
        den = _qpoly(den) if not _normalized else den
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            if num.is_zero():
                den = Poly([Fraction(1)])
            else:
                g = Poly.gcd(num, den)
                if g.degree > 0:
                    num = num // g
                    den = den // g
                lead = den.lc
                if lead != 1:
                    num = num * (1 / lead)
                    den = den * (1 / lead)
        self.num = num
        self.den = den
        self.var = var

    # construction helpers
    @classmethod
    def const(cls, c, var: str = "t") -> "RationalFunction":
        return cls(Poly([_frac(c)]), var=var)

    @classmethod
    def variable(cls, var: str = "t") -> "RationalFunction":
        return cls(Poly([Fraction(0), Fraction(1)]), var=var)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        return RationalFunction.const(other, self.var)

    # predicates
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num[0] if self.num.coeffs else Fraction(0)

    # arithmetic
    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            if isinstance(other, (int, Rational)):
                other = RationalFunction.const(other, self.var)
            else:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __neg__(self):
        return RationalFunction(-self.num, self.den, self.var, _normalized=True)

    def __add__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den, self.var)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den, self.var)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return RationalFunction.const(0, self.var)
        if o.is_constant():
            c = o.constant_value()
            return RationalFunction(self.num * c, self.den, self.var, _normalized=True)
        return RationalFunction(self.num * o.num, self.den * o.den, self.var)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, self.num, self.var)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("rational functions only take integer powers")
        if n < 0:
            return self.inverse() ** (-n)
        return RationalFunction(self.num ** n, self.den ** n, self.var, _normalized=True)

    # calculus and evaluation
    def derivative(self) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d, self.var)

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise PoleError(f"pole of {self} at {self.var}={x}")
        return self.num(x) / d

    def compose(self, inner: "RationalFunction") -> "RationalFunction":
        """self(inner) as a rational function in inner's variable."""
        num = self.num.map(lambda c: RationalFunction.const(c, inner.var))(inner)
        den = self.den.map(lambda c: RationalFunction.const(c, inner.var))(inner)
        num = num if isinstance(num, RationalFunction) else RationalFunction.const(num, inner.var)
        den = den if isinstance(den, RationalFunction) else RationalFunction.const(den, inner.var)
        return num / den

    def with_var(self, var: str) -> "RationalFunction":
        return RationalFunction(self.num, self.den, var, _normalized=True)

    def __repr__(self):
        return f"RationalFunction({self.to_text()!r})"

    def __str__(self):
        return self.to_text()

    def to_text(self) -> str:
        num = poly_text(self.num, self.var)
        if self.den.degree == 0:
            return num
        den = poly_text(self.den, self.var)
        if _n_terms(self.num) > 1:
            num = f"({num})"
        if _n_terms(self.den) > 1 or self.den.lc != 1:
            den = f"({den})"
        return f"{num}/{den}"


def _n_terms(p: Poly) -> int:
    return sum(1 for c in p.coeffs if c != 0)


def poly_text(p: Poly, var: str) -> str:
    """Ascending-order text form, parseable by the expression grammar."""
    if p.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = _rat_text(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{_rat_text(mag)}*{mono}"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(parts)


def _rat_text(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
