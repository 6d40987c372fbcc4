"""Special functions: Carlson RF, AGM, 2F1(1/2,1/2;1;t) and dx/y integrals.

Double precision goes through the kernel backend (compiled when built).
With ``ToleranceSpec.extended`` set, mpmath is used at >= 30 digits.
"""

from __future__ import annotations

import cmath
import math
import os
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from ._backend import KernelError, kernels
from ._kernels_py import DOMAIN

PRECISION_ENV = "PFNORMAL_PRECISION"
EXTENDED_DPS = 32


class SpecialFunctionError(ArithmeticError):
    pass


class DomainError(SpecialFunctionError):
    """Argument outside the principal-branch domain."""


class ConvergenceError(SpecialFunctionError):
    """Iteration limit reached before the tolerance was met."""


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-14
    max_iterations: int = 200
    extended: bool = False

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs_tol + self.rel_tol <= 0:
            raise ValueError("abs_tol + rel_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @classmethod
    def from_env(cls, **kw) -> "ToleranceSpec":
        """Default tolerances, with extended precision if the environment asks for it."""
        mode = os.environ.get(PRECISION_ENV, "").strip().lower()
        if mode and mode not in ("double", "extended"):
            raise ValueError(f"{PRECISION_ENV} must be 'double' or 'extended', got {mode!r}")
        kw.setdefault("extended", mode == "extended")
        return cls(**kw)

    def bound(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * abs(scale)


DEFAULT_TOL = ToleranceSpec()


def _kernel_call(fn, *args):
    try:
        return fn(*args)
    except KernelError as exc:
        cls = DomainError if exc.code == DOMAIN else ConvergenceError
        raise cls(str(exc)) from None


def carlson_rf(x: complex, y: complex, z: complex, tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """RF(x, y, z) = 1/2 int_0^inf ds / sqrt((s+x)(s+y)(s+z))."""
    if tol.extended:
        for v in (x, y, z):
            v = complex(v)
            if v.imag == 0 and v.real < 0:
                raise DomainError(f"argument {v} on the negative real axis")
        with mpmath.workdps(EXTENDED_DPS):
            return mpmath.elliprf(x, y, z)
    rtol = max(tol.rel_tol, 1e-16)
    return _kernel_call(kernels.carlson_rf, x, y, z, rtol, tol.max_iterations)


def agm(a: float, b: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    if tol.extended:
        if a <= 0 or b <= 0:
            raise DomainError("agm needs positive arguments")
        with mpmath.workdps(EXTENDED_DPS):
            return mpmath.agm(a, b)
    return _kernel_call(kernels.agm, float(a), float(b), tol.rel_tol, tol.max_iterations)


def agm_sequence(a: float, b: float, steps: int) -> list[tuple[float, float]]:
    """The first ``steps`` (arithmetic, geometric) pairs, starting with (a, b)."""
    out = [(a, b)]
    for _ in range(steps):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        out.append((a, b))
    return out


def complete_k(m: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """K(m) = pi / (2 agm(1, sqrt(1 - m))) for 0 <= m < 1."""
    if not 0 <= m < 1:
        raise DomainError("complete_k needs 0 <= m < 1")
    if tol.extended:
        with mpmath.workdps(EXTENDED_DPS):
            return mpmath.pi / (2 * mpmath.agm(1, mpmath.sqrt(1 - mpmath.mpf(m))))
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m), tol))


def hyp2f1_halves(t: complex, tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """2F1(1/2, 1/2; 1; t) by its power series, for |t| < 1."""
    if abs(t) >= 1:
        warnings.warn(f"2F1 series diverges for |t| = {abs(t):.3g} >= 1", RuntimeWarning, stacklevel=2)
        raise DomainError("hyp2f1_halves needs |t| < 1")
    if tol.extended:
        with mpmath.workdps(EXTENDED_DPS):
            return mpmath.hyp2f1(0.5, 0.5, 1, t)
    # enough terms for the geometric tail at this |t|
    q = abs(t)
    need = 50 + int(60.0 / max(1e-3, -math.log10(q))) if q > 0 else 1
    return _kernel_call(kernels.hyp2f1_halves, t, max(tol.abs_tol, 1e-17), max(tol.max_iterations, need))


def hyp2f1_coefficients(n: int) -> list:
    """Exact coefficients ((1/2)_k / k!)^2, k < n."""
    from fractions import Fraction

    c = Fraction(1)
    out = []
    for k in range(n):
        out.append(c)
        c = c * Fraction(2 * k + 1, 2 * k + 2) ** 2
    return out


# integrals of dx/y from infinity


_SNAP = 1e-13  # relative distance below which X is taken to be a root of f
_DIRECTIONS = [cmath.exp(1j * math.pi * k / 8) for k in (0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5, 6, -6, 7, -7, 8)]


def _arg_margin(w: complex) -> float:
    """Distance-like margin of w from the negative real axis (angle from pi)."""
    if w == 0:
        return math.pi
    return math.pi - abs(cmath.phase(w))


def choose_direction(X: complex, roots) -> complex:
    """Unit direction for the ray X + d*s, s >= 0, staying clear of every root.

    Prefers d = 1 and otherwise the candidate maximizing the smallest angle
    between (X - e_i)/d and the negative real axis.
    """
    roots = [e for e in roots if abs(X - e) > _SNAP * (1 + abs(X))] or [X - 1]
    best, best_margin = 1.0 + 0j, -1.0
    for d in _DIRECTIONS:
        margin = min(_arg_margin((X - e) / d) for e in roots)
        if margin > 0.2:
            return d
        if margin > best_margin:
            best, best_margin = d, margin
    if best_margin <= 1e-12:
        raise DomainError(f"no clear ray from {X} to infinity")
    return best


def _roots(coeffs_ascending, extended: bool):
    if extended:
        with mpmath.workdps(EXTENDED_DPS):
            cs = list(reversed(coeffs_ascending))
            return list(mpmath.polyroots(cs, maxsteps=200, extraprec=60))
    return list(np.roots(list(reversed([complex(c) for c in coeffs_ascending]))))


@dataclass(frozen=True)
class RayIntegral:
    """Integral from infinity to X along a ray, on the branch y_d of the ray."""

    value: complex
    y_ray: complex
    direction: complex


def ray_integral(X: complex, coeffs_ascending, direction: complex | None = None,
                 tol: ToleranceSpec = DEFAULT_TOL, roots=None) -> RayIntegral:
    """int_inf^X dx / y_d along x = X + d s, with y_d continuous on the ray.

    y_d(X + d s) = sqrt(lc) d^(n/2) prod_i sqrt(w_i + s), w_i = (X - e_i)/d.
    """
    n = len(coeffs_ascending) - 1
    lc = coeffs_ascending[-1]
    if roots is None:
        roots = _roots(coeffs_ascending, tol.extended)
    d = choose_direction(X, roots) if direction is None else direction
    # an endpoint on a branch point must give an exactly zero argument:
    # RF(eps, y, z) - RF(0, y, z) is O(sqrt(eps)), so root noise would cost 8 digits
    w = [0j if abs(X - e) <= _SNAP * (1 + abs(X)) else (X - e) / d for e in roots]
    for wi in w:
        if wi != 0 and abs(cmath.phase(wi)) >= math.pi - 1e-14:
            raise DomainError("integration ray passes through a root of f")
    if sum(1 for wi in w if abs(wi) == 0) > 1:
        raise DomainError("endpoint is a repeated root")
    if tol.extended:
        with mpmath.workdps(EXTENDED_DPS):
            return _ray_integral_mp(X, lc, n, w, d, tol)
    slc = cmath.sqrt(complex(lc))
    y_ray = slc * d ** (n / 2) if n == 4 else slc * cmath.sqrt(d) ** 3
    for wi in w:
        y_ray = y_ray * cmath.sqrt(wi)
    if n == 3:
        value = -2.0 * carlson_rf(w[0], w[1], w[2], tol) / (slc * cmath.sqrt(d))
    elif n == 4:
        value = -_quartic_ray(w, tol) / (slc * d)
    else:
        raise ValueError("only cubic and quartic f are supported")
    return RayIntegral(complex(value), complex(y_ray), d)


def _ray_integral_mp(X, lc, n, w, d, tol) -> RayIntegral:
    slc = mpmath.sqrt(mpmath.mpc(lc))
    sd = mpmath.sqrt(mpmath.mpc(d))
    y_ray = slc * (sd ** 3 if n == 3 else mpmath.mpc(d) ** 2)
    for wi in w:
        y_ray *= mpmath.sqrt(mpmath.mpc(wi))
    if n == 3:
        value = -2 * mpmath.elliprf(*w) / (slc * sd)
    else:
        f = lambda s: 1 / (mpmath.sqrt(w[0] + s) * mpmath.sqrt(w[1] + s) * mpmath.sqrt(w[2] + s) * mpmath.sqrt(w[3] + s))
        value = -mpmath.quad(f, [0, 1, mpmath.inf]) / (slc * d)
    return RayIntegral(value, y_ray, d)


def _quartic_ray(w, tol: ToleranceSpec) -> complex:
    def g(s):
        p = 1.0 + 0j
        for wi in w:
            p *= cmath.sqrt(wi + s)
        return 1.0 / p

    eps = max(tol.abs_tol, 1e-13)
    opts = dict(epsabs=eps, epsrel=max(tol.rel_tol, 1e-13), limit=max(200, tol.max_iterations))
    re = integrate.quad(lambda s: g(s).real, 0, 1, **opts)[0] + integrate.quad(lambda s: g(s).real, 1, np.inf, **opts)[0]
    im = integrate.quad(lambda s: g(s).imag, 0, 1, **opts)[0] + integrate.quad(lambda s: g(s).imag, 1, np.inf, **opts)[0]
    return complex(re, im)


def incomplete_first_kind(X: complex, family, t: complex, branch: int = 1,
                          tol: ToleranceSpec = DEFAULT_TOL, y: complex | None = None,
                          direction: complex | None = None) -> complex:
    """int_inf^X dx / y on the family at parameter t.

    Branch: with ``y`` given, the integrand branch is the one taking the
    value ``y`` at X; otherwise ``branch`` (+1 or -1) multiplies the ray
    branch, which for real X above every real root is the positive root.
    """
    if isinstance(X, float) and math.isinf(X):
        return 0j
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    coeffs = family.coeffs_at(t) if not tol.extended else _coeffs_mp(family, t)
    r = ray_integral(X, coeffs, direction, tol)
    return r.value * branch_sign(r.y_ray, y, branch)


def branch_sign(y_ray: complex, y: complex | None, branch: int = 1) -> int:
    """+1 or -1 so that sign * y_ray matches y (or ``branch`` if y is unknown or ~0)."""
    if y is None or abs(y) == 0 or abs(y_ray) < 1e-300:
        return branch
    return 1 if abs(y_ray - y) <= abs(y_ray + y) else -1


def _coeffs_mp(family, t):
    with mpmath.workdps(EXTENDED_DPS):
        tt = mpmath.mpmathify(t)
        return [c.num(tt) / c.den(tt) for c in family.f.coeffs]
