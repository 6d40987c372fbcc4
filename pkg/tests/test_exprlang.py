from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfnormal.exprlang import (
    BranchError,
    Const,
    DiffOperator,
    ExprSyntaxError,
    NotRationalError,
    PoleError,
    Pow,
    Prod,
    RationalFunction,
    Sum,
    UnboundVariableError,
    Var,
    add,
    apply_operator,
    conjugate_operator,
    differentiate,
    div,
    eval_expr,
    is_zero,
    mul,
    normalize,
    parse_expr,
    parse_operator,
    power,
    simplify,
    simplify_rational,
    symmetric_square,
    to_text,
)
from pfnormal.specfun import hyp2f1_coefficients

LEGENDRE_OP = "t*(1-t)*d^2 + (1-2*t)*d - 1/4"

# random expressions for property tests

_consts = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)).map(Const)
_vars = st.sampled_from(["t", "x"]).map(Var)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: add(*p)),
        st.tuples(children, children).map(lambda p: mul(*p)),
        st.tuples(children, children.filter(lambda e: not (isinstance(e, Const) and e.value == 0)))
          .map(lambda p: div(*p)),
        st.tuples(children, st.sampled_from([Fraction(2), Fraction(3), Fraction(1, 2), Fraction(-1)]))
          .filter(lambda p: not (isinstance(p[0], Const) and p[0].value <= 0))
          .map(lambda p: power(*p)),
    )


exprs = st.recursive(st.one_of(_consts, _vars), _extend, max_leaves=8)


def _depth(e) -> int:
    kids = getattr(e, "terms", None) or getattr(e, "factors", None)
    if kids:
        return 1 + max(_depth(k) for k in kids)
    if hasattr(e, "num"):
        return 1 + max(_depth(e.num), _depth(e.den))
    if hasattr(e, "base"):
        return 1 + _depth(e.base)
    return 0


# parse_expr


def test_parse_product_structure():
    e = parse_expr("t*(1-t)")
    assert isinstance(e, Prod)
    assert e.factors[0] == Var("t")
    assert isinstance(e.factors[1], Sum)
    assert e.factors[1].terms[0] == Const(Fraction(1))
    assert eval_expr(e.factors[1].terms[1], {"t": 3}) == -3


def test_parse_sqrt_sugar():
    assert parse_expr("sqrt(t)") == Pow(Var("t"), Fraction(1, 2))


def test_parse_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("1/(x-")
    assert info.value.offset == 5


def test_unknown_identifier_is_an_evaluation_error():
    e = parse_expr("u + 1")
    with pytest.raises(UnboundVariableError):
        eval_expr(e, {"t": 1})


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    if _depth(e) > 8:
        return
    assert parse_expr(to_text(e)) == normalize(e)


# differentiate


def test_differentiate_examples():
    assert to_text(simplify(differentiate(parse_expr("t^2"), "t"))) == "2*t"
    d = differentiate(parse_expr("sqrt(t)"), "t")
    assert is_zero(add(d, mul(Const(Fraction(-1, 2)), power(Var("t"), Fraction(-1, 2)))))
    assert is_zero(differentiate(parse_expr("5"), "t"))


@settings(max_examples=60, deadline=None)
@given(exprs, exprs)
def test_product_rule(e1, e2):
    lhs = differentiate(mul(e1, e2), "t")
    rhs = add(mul(differentiate(e1, "t"), e2), mul(e1, differentiate(e2, "t")))
    assert is_zero(add(lhs, mul(Const(Fraction(-1)), rhs)))


@settings(max_examples=60, deadline=None)
@given(exprs, exprs, st.fractions(-5, 5, max_denominator=7))
def test_differentiate_is_linear(e1, e2, c):
    lhs = differentiate(add(e1, mul(Const(c), e2)), "t")
    rhs = add(differentiate(e1, "t"), mul(Const(c), differentiate(e2, "t")))
    assert is_zero(add(lhs, mul(Const(Fraction(-1)), rhs)))


# eval_expr


def test_eval_examples():
    assert eval_expr(parse_expr("t*(1-t)"), {"t": 0.5}) == 0.25
    assert eval_expr(parse_expr("sqrt(t)"), {"t": 4}) == 2.0


def test_eval_errors_are_distinct():
    with pytest.raises(PoleError):
        eval_expr(parse_expr("1/t"), {"t": 0})
    with pytest.raises(BranchError):
        eval_expr(parse_expr("sqrt(t)"), {"t": -1})
    with pytest.raises(UnboundVariableError):
        eval_expr(parse_expr("s"), {"t": 0})


# simplify_rational


def test_simplify_rational_examples():
    assert simplify_rational(parse_expr("(t^2-1)/(t-1)")) == RationalFunction([1, 1], [1])
    assert simplify_rational(parse_expr("t*(1-t)")) == RationalFunction([0, 1, -1], [1])
    with pytest.raises(NotRationalError):
        simplify_rational(parse_expr("sqrt(t)+1"))


def test_rational_function_normal_form():
    r = simplify_rational(parse_expr("(2*t+2)/(4*t^2-4)"))
    assert r.den.lc == 1
    assert r == simplify_rational(parse_expr("1/(2*t-2)"))


# apply_operator


def test_apply_legendre_to_constants_and_t():
    L = parse_operator(LEGENDRE_OP)
    assert simplify_rational(apply_operator(L, parse_expr("1"))) == RationalFunction.const(Fraction(-1, 4))
    assert simplify_rational(apply_operator(L, parse_expr("t"))) == simplify_rational(parse_expr("1 - 9/4*t"))


def test_apply_legendre_to_hypergeometric_series():
    # oracle: the hypergeometric recurrence c_{n+1} = c_n ((n+1/2)/(n+1))^2, built here independently
    c = [Fraction(1)]
    for n in range(60):
        c.append(c[-1] * (Fraction(2 * n + 1, 2 * n + 2)) ** 2)
    assert c == hyp2f1_coefficients(61)
    series = add(*[mul(Const(cn), power(Var("t"), n)) for n, cn in enumerate(c)])
    res = simplify_rational(apply_operator(parse_operator(LEGENDRE_OP), series))
    assert res.den.degree == 0
    coeffs = list(res.num)
    assert all(v == 0 for v in coeffs[:60])
    assert any(v != 0 for v in coeffs[60:])


@settings(max_examples=40, deadline=None)
@given(exprs, exprs, st.fractions(-5, 5, max_denominator=7))
def test_apply_operator_is_linear(e1, e2, c):
    L = parse_operator(LEGENDRE_OP)
    lhs = apply_operator(L, add(e1, mul(Const(c), e2)))
    rhs = add(apply_operator(L, e1), mul(Const(c), apply_operator(L, e2)))
    assert is_zero(add(lhs, mul(Const(Fraction(-1)), rhs)))


# conjugate_operator


def test_conjugate_examples():
    d = parse_operator("d")
    assert conjugate_operator(d, RationalFunction.const(0)) == d
    assert conjugate_operator(d, simplify_rational(parse_expr("1/t"))) == parse_operator("d + 1/t")


def test_conjugate_matches_definition():
    # D~(f) = exp(-int phi) D(exp(int phi) f) with phi = 1/t, so exp(int phi) = t
    D = parse_operator(LEGENDRE_OP)
    Dt = conjugate_operator(D, simplify_rational(parse_expr("1/t")))
    f = parse_expr("t^3 + 2*t")
    lhs = apply_operator(Dt, f)
    rhs = div(apply_operator(D, mul(Var("t"), f)), Var("t"))
    assert is_zero(add(lhs, mul(Const(Fraction(-1)), rhs)))


def test_conjugate_round_trip_random():
    rng = random.Random(3)
    for _ in range(10):
        coeffs = [simplify_rational(parse_expr(f"({rng.randint(-5, 5)}*t + {rng.randint(1, 5)})/(t + {rng.randint(1, 4)})"))
                  for _ in range(3)] + [RationalFunction.const(1)]
        D = DiffOperator(tuple(coeffs), "t")
        phi = simplify_rational(parse_expr(f"{rng.randint(1, 6)}/(t - {rng.randint(2, 7)})"))
        assert conjugate_operator(conjugate_operator(D, phi), -phi) == D


def test_conjugate_removes_second_coefficient():
    D = symmetric_square(parse_operator(LEGENDRE_OP)).monic()
    phi = -D.coeffs[2] / 3
    assert conjugate_operator(D, phi).monic().coeffs[2].is_zero()


# symmetric_square


def test_symmetric_square_examples():
    assert symmetric_square(parse_operator("d^2")) == parse_operator("d^3")
    q = simplify_rational(parse_expr("1/(1+t^2)"))
    got = symmetric_square(parse_operator("d^2 + 1/(1+t^2)"))
    assert got.order == 3 and got.coeffs[3] == RationalFunction.const(1) and got.coeffs[2].is_zero()
    assert got.coeffs[1] == 4 * q
    assert got.coeffs[0] == 2 * q.derivative()


def test_symmetric_square_rejects_other_orders():
    with pytest.raises(ValueError):
        symmetric_square(parse_operator("d^3"))


def test_symmetric_square_annihilates_products_numerically():
    """d^2 + q with q = 1: solutions cos, sin; products span 1, cos 2t, sin 2t."""
    import math

    S = symmetric_square(parse_operator("d^2 + 1"))
    for t in (0.1, 0.7, 1.3):
        # u v = sin t cos t = sin(2t)/2
        d = [math.sin(2 * t) / 2, math.cos(2 * t), -2 * math.sin(2 * t), -4 * math.cos(2 * t)]
        val = sum(complex(c(t)) * d[k] for k, c in enumerate(S.coeffs))
        assert abs(val) < 1e-12
