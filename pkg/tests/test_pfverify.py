from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pfnormal.exprlang import Poly, RationalFunction, eval_expr, parse_expr
from pfnormal.gmred import SectionSpec, exact_inhomogeneity
from pfnormal.pfverify import (
    ReconstructionError,
    SampleSet,
    SectionCollisionError,
    analyze_section,
    chebyshev_grid,
    check_homogeneous_extension,
    compute_g,
    nu_function,
    periods_at,
    rationality_verdict,
    reconstruct_rational,
    torsion_check,
    truncated_normal_function,
)
from pfnormal.specfun import hyp2f1_halves, ray_integral


def legendre_integral(X, t):
    return -integrate.quad(lambda x: 1 / math.sqrt(x * (x - 1) * (x - t)), X, math.inf,
                           epsabs=1e-14, epsrel=1e-13, limit=400)[0]


# truncated normal function


def test_constant_section_against_quadrature(section2):
    assert abs(truncated_normal_function(section2, 0.5) - legendre_integral(2.0, 0.5)) < 1e-10


def test_far_section_tends_to_zero(legendre):
    vals = [abs(truncated_normal_function(SectionSpec.from_x(str(10 ** k), legendre), 0.5)) for k in (4, 8, 12)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-5


def test_two_torsion_section_is_half_period(legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    for t in (0.2, 0.5, 0.8):
        v = truncated_normal_function(sec, t)
        # oracle: the half period from the other real cycle, via the AGM-backed 2F1
        assert abs(abs(v) - math.pi * hyp2f1_halves(1 - t).real) < 1e-12


def test_section_collision(legendre):
    # X = 1/2 meets the root x = t at t = 1/2
    with pytest.raises(SectionCollisionError):
        truncated_normal_function(SectionSpec.from_x("1/2", legendre), 0.5)


def test_sample_grid_must_increase():
    with pytest.raises(ValueError):
        SampleSet([0.2, 0.1], [1, 2], [0, 0])


def test_chebyshev_grid():
    g = chebyshev_grid()
    assert len(g) == 33 and g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(0.9)
    assert all(b > a for a, b in zip(g, g[1:]))


# compute_g


def test_torsion_section_g_vanishes(legendre_cert, legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    s = compute_g(legendre_cert, sec, chebyshev_grid())
    assert max(abs(v) for v in s.values) < 1e-7


def test_constant_section_matches_certificate(legendre_cert, section2):
    grid = chebyshev_grid()
    s = compute_g(legendre_cert, section2, grid)
    g = exact_inhomogeneity(legendre_cert, section2)
    for t, v in zip(grid, s.values):
        ex = eval_expr(g, {"t": t}, strict=False)
        assert abs(v - ex) < 1e-8 * abs(ex)


def test_full_period_is_annihilated(legendre_cert):
    s = compute_g(legendre_cert, None, chebyshev_grid(0.1, 0.9, 9), nu=lambda t: math.pi * hyp2f1_halves(t))
    assert max(abs(v) for v in s.values) < 1e-7


def test_g_is_linear_in_the_section(legendre_cert, legendre, section2):
    s2 = SectionSpec.from_x("t^2", legendre)
    grid = chebyshev_grid(0.2, 0.8, 7)
    a = compute_g(legendre_cert, section2, grid)
    b = compute_g(legendre_cert, s2, grid)
    diff = compute_g(legendre_cert, None, grid,
                     nu=_difference(nu_function(section2, 0.5), nu_function(s2, 0.5)))
    for va, vb, vd, ea, eb, ed in zip(a.values, b.values, diff.values, a.errors, b.errors, diff.errors):
        assert abs((va - vb) - vd) <= 10 * (ea + eb + ed) + 1e-12


def _difference(f1, f2):
    return lambda t: f1(t) - f2(t)


def test_g_is_single_valued_across_homotopic_paths(legendre_cert, section2):
    """A second ray direction from X = 2 sweeps no root, so g must not change."""
    fam = section2.family
    base = nu_function(section2, 0.5)
    d2 = complex(math.cos(math.pi / 8), math.sin(math.pi / 8))

    def nu2(t):
        return base.sigma * ray_integral(2.0, fam.coeffs_at(t), d2).value

    grid = chebyshev_grid(0.2, 0.8, 7)
    a = compute_g(legendre_cert, section2, grid)
    b = compute_g(legendre_cert, None, grid, nu=nu2)
    assert max(abs(x - y) for x, y in zip(a.values, b.values)) < 1e-8


def test_richardson_method_still_available(legendre_cert, section2):
    grid = chebyshev_grid(0.3, 0.7, 5)
    s = compute_g(legendre_cert, section2, grid, method="richardson")
    g = exact_inhomogeneity(legendre_cert, section2)
    for t, v in zip(grid, s.values):
        assert abs(v - eval_expr(g, {"t": t}, strict=False)) < 1e-6


# reconstruct_rational


def test_reconstruct_exact_mobius():
    xs = [Fraction(k, 7) for k in range(2, 7)]
    f = lambda x: (1 + x) / (1 - x)
    r = reconstruct_rational(SampleSet(xs, [f(x) for x in xs], [0] * 5), 2)
    assert r == RationalFunction(Poly([1, 1]), Poly([1, -1]))


coef = st.integers(-9, 9)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=3, max_size=3), st.lists(coef, min_size=3, max_size=3))
def test_reconstruct_random_22_exact(num, den):
    if all(c == 0 for c in den) or all(c == 0 for c in num):
        return
    target = RationalFunction(Poly([Fraction(c) for c in num]), Poly([Fraction(c) for c in den]))
    xs = [Fraction(k, 11) for k in range(1, 30)]
    xs = [x for x in xs if target.den(x) != 0][:7]
    ys = [target(x) for x in xs]
    r = reconstruct_rational(SampleSet(xs, ys, [0] * 7), 2)
    assert r == target


def test_sqrt_is_not_rational_at_bound_4():
    grid = chebyshev_grid(0.1, 0.9, 33)
    s = SampleSet(grid, [math.sqrt(t) for t in grid], [1e-16] * 33)
    with pytest.raises(ReconstructionError, match="not rational at this bound"):
        reconstruct_rational(s, 4)


def test_reconstruct_needs_enough_samples():
    with pytest.raises(ValueError):
        reconstruct_rational(SampleSet([0.1, 0.2], [1.0, 2.0], [0, 0]), 2)


def test_reconstruct_float_samples_back_substitution():
    grid = chebyshev_grid(0.1, 0.9, 21)
    f = lambda t: (3 - t) / (t * t + 2 * t + 5)
    r = reconstruct_rational(SampleSet(grid, [f(t) for t in grid], [1e-16] * 21), 4)
    assert r.residual < 1e-12
    assert r.degrees == (1, 2)


# rationality_verdict


def _best_distance(v: float, bound: int) -> float:
    """Brute-force oracle: distance to the nearest p/q with q <= bound."""
    return min(abs(v - round(v * q) / q) for q in range(1, bound + 1))


def test_rationality_verdict_examples():
    v = rationality_verdict([0.25, 0.333333333])
    assert v[0].nearest[0] == Fraction(1, 4) and v[0].distance == 0 and v[0].rational
    assert v[1].nearest[0] == Fraction(1, 3) and v[1].distance < 1e-8 and v[1].rational


@pytest.mark.parametrize("value", [0.7071067811, math.sqrt(2) / 2, math.pi, math.e, 0.123456789])
def test_rationality_verdict_matches_best_approximation(value):
    (v,) = rationality_verdict([value], 10 ** 4)
    best = _best_distance(value, 10 ** 4)
    assert v.distance == pytest.approx(best, abs=1e-17)
    assert v.rational == (best < 1e-8)


def test_pi_is_not_rational_at_bound():
    (v,) = rationality_verdict([math.pi], 10 ** 4)
    assert not v.rational and v.nearest[0] == Fraction(355, 113)


# homogeneous extension


def test_homogeneous_extension_constant_section(legendre_cert, section2):
    grid = chebyshev_grid(0.2, 0.8, 13)
    s = compute_g(legendre_cert, section2, grid)
    g = exact_inhomogeneity(legendre_cert, section2)
    rep = check_homogeneous_extension(s, legendre_cert, section2, g=g)
    assert rep.status == "ok" and rep.excluded == 0
    assert rep.max_residual < 1e-6 * rep.scale


def test_homogeneous_extension_degenerate_for_torsion(legendre_cert, legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    s = compute_g(legendre_cert, sec, chebyshev_grid(0.2, 0.8, 5))
    rep = check_homogeneous_extension(s, legendre_cert, sec)
    assert rep.status == "identically homogeneous; extension equation degenerate"


def test_homogeneous_extension_synthetic(legendre_cert):
    """nu = period + t^2, so D nu = D(t^2) exactly; compare against the exact operator image."""
    from pfnormal.exprlang import apply_operator

    D = legendre_cert.operator
    g = apply_operator(D, parse_expr("t^2"))
    nu = lambda t: math.pi * hyp2f1_halves(t) + t * t
    grid = chebyshev_grid(0.2, 0.8, 9)
    s = compute_g(legendre_cert, None, grid, nu=nu)
    for t, v in zip(grid, s.values):
        assert abs(v - eval_expr(g, {"t": t})) < 1e-8
    rep = check_homogeneous_extension(s, legendre_cert, None, g=g, nu=nu)
    assert rep.max_residual < 1e-8


# torsion and periods


def test_periods_against_hypergeometric(legendre):
    """Lattice basis: w1 = 2 int to x=0, w2 = 2 int to x=t = -2 pi F(t) +- 2 pi i F(1-t)."""
    for t in (0.3, 0.6):
        w1, w2 = periods_at(legendre, t)
        pa = 2 * math.pi * hyp2f1_halves(t).real
        pb = 2 * math.pi * hyp2f1_halves(1 - t).real
        assert abs(w1) == pytest.approx(pb, rel=1e-12)
        assert abs(w2.real) == pytest.approx(pa, rel=1e-12)
        assert abs(w2.imag) == pytest.approx(pb, rel=1e-12)


def test_torsion_check(legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    rep = torsion_check(sec, chebyshev_grid(0.2, 0.8, 5))
    assert rep["torsion"]
    rep = torsion_check(SectionSpec.from_x("2", legendre), chebyshev_grid(0.2, 0.8, 5))
    assert not rep["torsion"]


# full reports


def test_report_constant_section(legendre_cert, section2):
    rep = analyze_section(legendre_cert, section2, chebyshev_grid(), degree_bound=6)
    assert rep.verdict == "nontrivial" and rep.algebraic
    assert "nontrivial modulo torsion" in rep.statement
    assert rep.exact_vs_numeric < 1e-8
    assert all(c.rational for c in rep.coefficients)
    doc = rep.to_dict()
    for key in ("g", "algebraic", "max_inhomog_residual", "max_homog_ext_residual", "coefficients", "verdict"):
        assert key in doc
    assert set(doc["coefficients"][0]) >= {"value", "nearest_rational", "distance"}


def test_report_torsion_section_is_undetected(legendre_cert, legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    rep = analyze_section(legendre_cert, sec, chebyshev_grid(0.2, 0.8, 9))
    assert rep.verdict == "undetected"
    assert "trivial" not in rep.statement.replace("nontrivial", "").replace("not shown trivial", "")
    assert rep.torsion["torsion"]


def test_report_sqrt_section_is_algebraic(legendre_cert, legendre):
    sec = SectionSpec.from_x("2*t^(1/2)", legendre)
    rep = analyze_section(legendre_cert, sec, chebyshev_grid(0.3, 0.9, 33))
    assert rep.algebraic and rep.verdict == "nontrivial"
    assert rep.ladder[0]["status"] != "rational"
    assert "s=sqrt(t)" in [r for r in rep.ladder if r["status"] != "skipped"][-1]["rung"]
