from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from pfnormal.chazy import (
    SLOTS,
    BiholomorphicityError,
    ClosedFormLambda,
    InverseLambda,
    forward_rhs,
    invert_monotone,
    pullback_expand,
    remove_second_coefficient,
    solved_form,
    verify_pullback_numeric,
)
from pfnormal.exprlang import (
    Const,
    Var,
    add,
    as_expr,
    is_zero,
    mul,
    neg,
    parse_expr,
    parse_operator,
    rf_to_expr,
    substitute,
    symmetric_square,
)
from pfnormal.gmred import SectionSpec
from pfnormal.pfverify import nu_function
from pfnormal.specfun import hyp2f1_halves

TOY = "d^3 + t*d^2 + 1/(t+2)*d + t^2"


@pytest.fixture(scope="module")
def sym2(legendre_cert):
    return symmetric_square(legendre_cert.operator)


def _formal_apply(op):
    """sum a_j(lam) N_j - G, the original equation written with formal symbols."""
    terms = [mul(rf_to_expr(c.with_var("lam")), Var(f"N{j}")) for j, c in enumerate(op.monic().coeffs)]
    return add(*terms, neg(Var("G")))


@pytest.mark.parametrize("text", [TOY, "d^3", "t*d^3 - d + 1/t"])
def test_identity_substitution(text):
    op = parse_operator(text)
    pc = pullback_expand(op)
    assert set(pc.slots()) == set(SLOTS)
    lhs = pc.lhs(as_expr(1), as_expr(0), as_expr(0))
    assert is_zero(add(lhs, neg(_formal_apply(op))), "lam")


def test_pure_third_derivative():
    pc = pullback_expand(parse_operator("d^3"))
    assert pc.vanishing() == ["c_dd", "c_p1", "c_p2"]
    expected = parse_expr("G/N1 - 3*N2/N1*L1*L2 - N3/N1*L1^3")
    assert is_zero(add(solved_form(pc), neg(expected)), "lam")


def test_gauge_clears_second_order_slots(sym2):
    op = remove_second_coefficient(sym2)
    assert op.coeffs[2].is_zero()
    pc = pullback_expand(op)
    assert pc.vanishing() == ["c_dd", "c_p2"]
    assert not is_zero(pc.c_p1, "lam")


def test_second_order_slots_vanish_iff_a2_zero():
    for text in (TOY, "d^3 + 1/t*d", "d^3 - 1/3*d^2 + t"):
        pc = pullback_expand(parse_operator(text))
        a2_zero = parse_operator(text).monic().coeffs[2].is_zero()
        assert ("c_dd" in pc.vanishing()) == a2_zero
        assert ("c_p2" in pc.vanishing()) == a2_zero


def test_rejects_wrong_order():
    with pytest.raises(ValueError):
        pullback_expand(parse_operator("d^2 + t"))


def test_solved_form_affine_equivariance():
    rng = random.Random(17)
    for _ in range(3):
        a = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
        b = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        base = parse_operator(TOY)
        moved = parse_operator(TOY.replace("t", f"((t-({b}))/({a}))"))
        S = solved_form(pullback_expand(base))
        St = solved_form(pullback_expand(moved))
        A = Const(a)
        mapping = {
            "lam": add(mul(A, Var("lam")), Const(b)),
            "L1": mul(A, Var("L1")), "L2": mul(A, Var("L2")),
            "N1": mul(Var("N1"), Const(1 / a)), "N2": mul(Var("N2"), Const(1 / a ** 2)),
            "N3": mul(Var("N3"), Const(1 / a ** 3)),
        }
        assert is_zero(add(substitute(St, mapping), neg(mul(A, S))), "lam")


# numeric verification


def test_toy_numeric():
    op = parse_operator("d^3")
    ts = np.linspace(0.1, 0.5, 5)
    good = verify_pullback_numeric(op, lambda l: l, lambda l: 0, ClosedFormLambda("1+t+t^2"), ts)
    assert good.max_residual < 1e-9
    bad = verify_pullback_numeric(op, lambda l: l, lambda l: 0, ClosedFormLambda("t^3"), ts)
    assert bad.max_residual == pytest.approx(6.0, rel=1e-9)


def test_mobius_forward_construction(sym2):
    lam = ClosedFormLambda("(1+t)/(1-t)")
    N = lambda l: 1 / (1 + l * l) + l
    G = lambda l: forward_rhs(sym2, N, lam, (l - 1) / (l + 1))
    rep = verify_pullback_numeric(sym2, N, G, lam, np.linspace(0.1, 0.4, 9))
    assert rep.max_residual < 1e-8


def test_forward_rhs_matches_exact_chain_rule(sym2):
    lam = ClosedFormLambda("(1+t)/(1-t)")
    # N(lam) = lam^2, composed: ((1+t)/(1-t))^2; forward_rhs must equal the monic operator applied
    # to the composite, with coefficients read at lam rather than t
    t0 = 0.3
    l0 = (1 + t0) / (1 - t0)
    comp = parse_expr("((1+t)/(1-t))^2")
    from pfnormal.exprlang import differentiate, eval_expr

    ds = [comp]
    for _ in range(3):
        ds.append(differentiate(ds[-1], "t"))
    m = sym2.monic()
    want = sum(complex(m.coeffs[j](l0)) * eval_expr(ds[j], {"t": t0}) for j in range(4))
    got = forward_rhs(sym2, lambda l: l * l, lam, t0)
    assert abs(got - want) < 1e-9 * abs(want)


def test_inverse_lambda_pipeline(sym2, legendre):
    """lambda = local inverse of nu for the constant section, N the squared period."""
    nu = nu_function(SectionSpec.from_x("2", legendre), 0.5)
    lam = InverseLambda(nu, 0.2, 0.6)
    N = lambda l: (math.pi * hyp2f1_halves(l)) ** 2
    G = lambda l: forward_rhs(sym2, N, lam, nu(l).real)
    lo, hi = lam.range
    rep = verify_pullback_numeric(sym2, N, G, lam, np.linspace(lo + 0.002, hi - 0.002, 7))
    assert rep.max_residual < 1e-6


def test_biholomorphicity_violation():
    op = parse_operator("d^3")
    with pytest.raises(BiholomorphicityError):
        verify_pullback_numeric(op, lambda l: (l - 0.5) ** 2, lambda l: 0, ClosedFormLambda("t"), [0.5])


def test_invert_monotone():
    x = invert_monotone(lambda s: s ** 3, 0.125, 0.1, 0.9)
    assert abs(x - 0.5) < 1e-15
    with pytest.raises(BiholomorphicityError):
        invert_monotone(lambda s: (s - 0.5) ** 2, 0.01, 0.1, 0.9)
