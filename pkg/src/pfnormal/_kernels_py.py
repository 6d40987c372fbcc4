"""Pure-Python versions of the hot numeric kernels.

Signatures and results match the compiled ``_kernels`` module exactly; this
module is used when the extension is not built.
"""

from __future__ import annotations

import cmath
import math

DOMAIN = 1
NO_CONVERGENCE = 2
# agm stops once a and b agree to a few ulps
EPS4 = 4.0 * 2.0 ** -52


class KernelError(ArithmeticError):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def carlson_rf(x: complex, y: complex, z: complex, rtol: float, max_iter: int) -> complex:
    """Symmetric elliptic integral RF by duplication (principal branch)."""
    x, y, z = complex(x), complex(y), complex(z)
    zeros = 0
    for v in (x, y, z):
        if v.imag == 0.0 and v.real < 0.0:
            raise KernelError(DOMAIN, f"argument {v} on the negative real axis")
        if v == 0:
            zeros += 1
    if zeros > 1:
        raise KernelError(DOMAIN, "more than one argument is zero")
    a0 = (x + y + z) / 3.0
    q = (3.0 * rtol) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    x0, y0 = x, y
    fourn = 1.0
    for _ in range(max_iter):
        if q < abs(a) * fourn:
            break
        sx, sy, sz = cmath.sqrt(x), cmath.sqrt(y), cmath.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = (x + lam) * 0.25
        y = (y + lam) * 0.25
        z = (z + lam) * 0.25
        a = (a + lam) * 0.25
        fourn *= 4.0
    else:
        raise KernelError(NO_CONVERGENCE, f"RF did not converge in {max_iter} iterations")
    dx = (a0 - x0) / (fourn * a)
    dy = (a0 - y0) / (fourn * a)
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    poly = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return poly / cmath.sqrt(a)


def agm(a: float, b: float, rtol: float, max_iter: int) -> float:
    if a <= 0.0 or b <= 0.0:
        raise KernelError(DOMAIN, "agm needs positive arguments")
    rtol = max(rtol, EPS4)
    for _ in range(max_iter):
        if abs(a - b) <= rtol * a:
            return 0.5 * (a + b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise KernelError(NO_CONVERGENCE, f"agm did not converge in {max_iter} iterations")


def hyp2f1_halves(t: complex, tol: float, max_terms: int) -> complex:
    """sum_n ((1/2)_n / n!)^2 t^n, stopped when a term drops below tol."""
    t = complex(t)
    term = 1.0 + 0.0j
    total = term
    for n in range(max_terms):
        r = (n + 0.5) / (n + 1.0)
        term = term * (r * r) * t
        total += term
        if abs(term) < tol:
            return total
    raise KernelError(NO_CONVERGENCE, f"series did not reach tol in {max_terms} terms")


def pvi_rhs(X: complex, V: complex, t: complex, alpha: float, beta: float, gamma: float, delta: float) -> complex:
    X, V, t = complex(X), complex(V), complex(t)
    xm1 = X - 1.0
    xmt = X - t
    tm1 = t - 1.0
    if X == 0:
        raise KernelError(DOMAIN, "X = 0")
    if xm1 == 0:
        raise KernelError(DOMAIN, "X = 1")
    if xmt == 0:
        raise KernelError(DOMAIN, "X = t")
    if t == 0 or tm1 == 0:
        raise KernelError(DOMAIN, "t in {0, 1}")
    bracket = alpha + beta * t / (X * X) + gamma * tm1 / (xm1 * xm1) + delta * t * tm1 / (xmt * xmt)
    return (0.5 * (1.0 / X + 1.0 / xm1 + 1.0 / xmt) * V * V
            - (1.0 / t + 1.0 / tm1 + 1.0 / xmt) * V
            + X * xm1 * xmt / (t * t * tm1 * tm1) * bracket)
