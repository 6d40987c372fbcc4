"""Pullback of an order-3 inhomogeneous Picard-Fuchs equation along t -> lambda(t).

Writing the solution as N(lambda(t)) and the coefficients and right-hand
side as functions of lambda turns the linear equation into a nonlinear
third-order ODE for lambda.  N0..N3 stand for N and its lambda-derivatives
and G for the right-hand side, all at lambda.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from scipy.optimize import brentq

from .exprlang import (
    DiffOperator,
    Expr,
    Var,
    add,
    as_expr,
    conjugate_operator,
    differentiate,
    eval_expr,
    is_zero,
    mul,
    neg,
    parse_expr,
    rf_to_expr,
    simplify,
    to_text,
)
from .pfverify import derivatives

__all__ = [
    "PullbackCoefficients", "SLOTS", "ClosedFormLambda", "InverseLambda", "PullbackReport", "invert_monotone",
    "pullback_expand", "remove_second_coefficient", "solved_form", "verify_pullback_numeric",
]

LAM = "lam"
SLOTS = ("c_ddd", "c_dd", "c_prod", "c_p1", "c_p2", "c_p3", "c_0")
# the lambda-derivative monomial each slot multiplies, as (l1, l2, l3) exponents
_MONOMIAL = {
    "c_ddd": (0, 0, 1), "c_dd": (0, 1, 0), "c_prod": (1, 1, 0), "c_p1": (1, 0, 0),
    "c_p2": (2, 0, 0), "c_p3": (3, 0, 0), "c_0": (0, 0, 0),
}


class BiholomorphicityError(ArithmeticError):
    """N1 vanished at a node, so lambda is not a local coordinate there."""


@dataclass(frozen=True)
class PullbackCoefficients:
    c_ddd: Expr
    c_dd: Expr
    c_prod: Expr
    c_p1: Expr
    c_p2: Expr
    c_p3: Expr
    c_0: Expr
    operator: DiffOperator

    def slots(self) -> dict[str, Expr]:
        return {s: getattr(self, s) for s in SLOTS}

    def vanishing(self) -> list[str]:
        return [s for s, e in self.slots().items() if is_zero(simplify(e))]

    def to_json(self) -> str:
        return json.dumps({s: to_text(e) for s, e in self.slots().items()}, sort_keys=True)

    def lhs(self, l1: Expr, l2: Expr, l3: Expr) -> Expr:
        """sum over slots of coefficient * monomial in (lambda', lambda'', lambda''')."""
        terms = []
        for s, e in self.slots().items():
            a, b, c = _MONOMIAL[s]
            terms.append(mul(e, _pow(l1, a), _pow(l2, b), _pow(l3, c)))
        return add(*terms)


def _pow(e: Expr, k: int) -> Expr:
    return mul(*([e] * k)) if k else as_expr(1)


def remove_second_coefficient(op: DiffOperator) -> DiffOperator:
    """Monic op conjugated by d -> d - a2/3, which clears the d^2 term."""
    m = op.monic()
    phi = -m.coeffs[op.order - 1] / op.order
    return conjugate_operator(m, phi).monic()


def pullback_expand(op: DiffOperator, monic: bool = True) -> PullbackCoefficients:
    """Chain-rule expansion of op[N(lambda(t))] = G(lambda), coefficients taken at lambda."""
    if op.order != 3:
        raise ValueError(f"pullback needs an order-3 operator, got order {op.order}")
    if monic:
        op = op.monic()
    a = [rf_to_expr(c.with_var(LAM)) for c in op.coeffs]
    N0, N1, N2, N3, G = (Var(n) for n in ("N0", "N1", "N2", "N3", "G"))
    a0, a1, a2, a3 = a
    return PullbackCoefficients(
        c_ddd=mul(a3, N1),
        c_dd=mul(a2, N1),
        c_prod=mul(as_expr(3), a3, N2),
        c_p1=mul(a1, N1),
        c_p2=mul(a2, N2),
        c_p3=mul(a3, N3),
        c_0=add(mul(a0, N0), neg(G)),
        operator=op,
    )


def solved_form(pc: PullbackCoefficients) -> Expr:
    """lambda''' in terms of lam, L1 = lambda', L2 = lambda'' and the formal symbols."""
    L1, L2 = Var("L1"), Var("L2")
    rest = add(pc.c_0, mul(pc.c_p1, L1), mul(pc.c_p2, L1, L1), mul(pc.c_p3, L1, L1, L1),
               mul(pc.c_prod, L1, L2), mul(pc.c_dd, L2))
    return simplify(mul(as_expr(-1), rest) / pc.c_ddd)


# numeric verification


@dataclass
class ClosedFormLambda:
    """lambda(t) from an expression, with exact derivatives."""

    expr: Expr
    var: str = "t"

    def __post_init__(self):
        if isinstance(self.expr, str):
            self.expr = parse_expr(self.expr)
        d1 = differentiate(self.expr, self.var)
        d2 = differentiate(d1, self.var)
        d3 = differentiate(d2, self.var)
        self._ds = (self.expr, d1, d2, d3)

    def jet(self, t: complex) -> tuple[complex, complex, complex, complex]:
        return tuple(complex(eval_expr(e, {self.var: t}, strict=False)) for e in self._ds)


class TrajectoryLambda:
    """lambda from an odeint trajectory of (lambda, lambda', lambda''); lambda''' by differencing."""

    def __init__(self, traj, h: float = 1e-3):
        self.traj = traj
        self.h = h

    def jet(self, t: complex):
        from .odeint import nth_derivative

        y = self.traj.state(t)
        l3, _ = nth_derivative(lambda s: complex(self.traj.state(s)[2]), t, 1, self.h)
        return complex(y[0]), complex(y[1]), complex(y[2]), l3


class InverseLambda:
    """lambda(t) as the local inverse of a real function nu on a monotone window [a, b].

    lambda is found by root bracketing; its derivatives follow from those of
    nu at lambda by the inverse-function rule.
    """

    def __init__(self, nu: Callable, a: float, b: float, singular=(0.0, 1.0)):
        self.nu, self.a, self.b, self.singular = nu, a, b, singular
        self._re = lambda x: complex(nu(x)).real
        lo, hi = sorted((self._re(a), self._re(b)))
        self.range = (lo, hi)

    def jet(self, t: complex):
        l0 = invert_monotone(self._re, float(complex(t).real), self.a, self.b)
        dist = min(abs(l0 - s) for s in self.singular)
        _, n1, n2, n3 = derivatives(self.nu, l0, 3, dist)
        if abs(n1) < 1e-12:
            raise BiholomorphicityError(f"nu' vanishes at lambda = {l0}")
        l1 = 1 / n1
        l2 = -n2 / n1 ** 3
        l3 = (3 * n2 ** 2 - n1 * n3) / n1 ** 5
        return complex(l0), l1, l2, l3


@dataclass
class PullbackReport:
    max_residual: float
    nodes: int
    residuals: list

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "nodes": self.nodes}


def verify_pullback_numeric(op: DiffOperator, Nfun: Callable, Gfun: Callable, lam, ts,
                            monic: bool = True, n1_floor: float = 1e-8,
                            singular=(0.0, 1.0)) -> PullbackReport:
    """max over ts of |lambda''' - solved-form RHS|.

    N1..N3 come from contour derivatives of Nfun at lambda(t); ``lam`` needs
    ``jet(t) -> (lambda, lambda', lambda'', lambda''')``.
    """
    if op.order != 3:
        raise ValueError("order-3 operator required")
    if monic:
        op = op.monic()
    res = []
    for t in ts:
        l0, l1, l2, l3 = lam.jet(t)
        dist = min((abs(l0 - s) for s in singular), default=1.0)
        N = derivatives(Nfun, l0, 3, dist)
        if abs(N[1]) < n1_floor:
            raise BiholomorphicityError(f"N1 = {abs(N[1]):.2e} at t = {t}")
        a = [c(l0) for c in op.coeffs]
        rhs = -(a[0] * N[0] - Gfun(l0) + a[1] * N[1] * l1 + a[2] * N[2] * l1 ** 2
                + a[3] * N[3] * l1 ** 3 + 3 * a[3] * N[2] * l1 * l2 + a[2] * N[1] * l2) / (a[3] * N[1])
        res.append(abs(l3 - rhs))
    return PullbackReport(float(max(res, default=0.0)), len(res), res)


def forward_rhs(op: DiffOperator, Nfun: Callable, lam, t: complex, monic: bool = True,
                singular=(0.0, 1.0)) -> complex:
    """op applied to N(lambda(t)) by the chain rule; G for a forward-constructed test."""
    if monic:
        op = op.monic()
    l0, l1, l2, l3 = lam.jet(t)
    dist = min((abs(l0 - s) for s in singular), default=1.0)
    N = derivatives(Nfun, l0, 3, dist)
    a = [c(l0) for c in op.coeffs]
    d1 = N[1] * l1
    d2 = N[2] * l1 ** 2 + N[1] * l2
    d3 = N[3] * l1 ** 3 + 3 * N[2] * l1 * l2 + N[1] * l3
    return a[0] * N[0] + a[1] * d1 + a[2] * d2 + a[3] * d3


def invert_monotone(fn: Callable[[float], float], target: float, a: float, b: float,
                    samples: int = 33) -> float:
    """The x in [a, b] with fn(x) = target, on a window where fn is monotone.

    Monotonicity is checked on a sample grid first, since the inverse is only
    a local coordinate where the derivative keeps its sign.
    """
    xs = [a + (b - a) * k / (samples - 1) for k in range(samples)]
    vs = [float(fn(x)) for x in xs]
    diffs = [v2 - v1 for v1, v2 in zip(vs, vs[1:])]
    if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise BiholomorphicityError("function is not monotone on the window")
    return brentq(lambda x: float(fn(x)) - target, a, b, xtol=1e-15, rtol=4 * 2.0 ** -52)
