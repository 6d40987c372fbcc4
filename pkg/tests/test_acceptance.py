"""One test per acceptance criterion; each records a PASS/FAIL line."""

from __future__ import annotations

import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from conftest import ACCEPTANCE
from pfnormal.chazy import ClosedFormLambda, forward_rhs, pullback_expand, remove_second_coefficient, verify_pullback_numeric
from pfnormal.cli import main
from pfnormal.exprlang import (
    add,
    apply_operator,
    as_expr,
    is_zero,
    mul,
    neg,
    parse_expr,
    parse_operator,
    rf_to_expr,
    simplify_rational,
    symmetric_square,
    Var,
)
from pfnormal.gmred import CurveFamily, NotSquarefreeError, SectionSpec, derive_picard_fuchs, exact_inhomogeneity, verify_certificate
from pfnormal.odeint import PathSpec, integrate as ode_integrate
from pfnormal.painleve import derive_special_solution_constraints, solve_pvi, verify_fuchs_correspondence
from pfnormal.pfverify import analyze_section, chebyshev_grid, compute_g
from pfnormal.specfun import ToleranceSpec, agm, carlson_rf, hyp2f1_halves

LEGENDRE_OP = "t*(1-t)*d^2 + (1-2*t)*d - 1/4"


def record(n: int, passed: bool, text: str) -> None:
    line = f"criterion {n}: {'PASS' if passed else 'FAIL'} {text}"
    ACCEPTANCE.append(line)
    print(line)
    assert passed, line


def test_criterion_01_operator_derivation(capsys):
    start = time.perf_counter()
    code = main(["pf", "derive", "--curve", "x*(x-1)*(x-t)"])
    elapsed = time.perf_counter() - start
    doc = json.loads(capsys.readouterr().out)
    got = parse_operator(doc["operator"])
    ok = code == 0 and got.is_proportional(parse_operator(LEGENDRE_OP)) and elapsed < 5
    record(1, ok, f"operator {doc['operator']} proportional to {LEGENDRE_OP}; {elapsed:.2f} s (< 5 s)")


def _random_cubics(n: int, seed: int) -> list[CurveFamily]:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        a, b, c = (Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3))
        try:
            out.append(CurveFamily.from_text(f"x^3 + ({a})*t*x^2 + ({b}+t)*x + ({c})"))
        except (NotSquarefreeError, ValueError):
            continue
    return out


def test_criterion_02_certificate_exactness():
    start = time.perf_counter()
    fams = [CurveFamily.from_text("x*(x-1)*(x-t)")] + _random_cubics(5, 31)
    results = [verify_certificate(derive_picard_fuchs(f)) for f in fams]
    elapsed = time.perf_counter() - start
    record(2, all(results) and elapsed < 30,
           f"{sum(results)}/{len(results)} certificates re-differentiate exactly; {elapsed:.2f} s (< 30 s)")


def test_criterion_03_period_annihilation(legendre_cert):
    grid = list(np.linspace(0.1, 0.9, 9))
    s = compute_g(legendre_cert, None, grid, nu=lambda t: math.pi * hyp2f1_halves(t))
    worst = max(abs(v) for v in s.values)
    c = [Fraction(1)]
    for n in range(60):
        c.append(c[-1] * Fraction((2 * n + 1) ** 2, (2 * n + 2) ** 2))
    series = add(*[mul(as_expr(cn), Var("t") ** n) for n, cn in enumerate(c)])
    res = simplify_rational(apply_operator(parse_operator(LEGENDRE_OP), series))
    exact_ok = res.den.degree == 0 and all(v == 0 for v in list(res.num)[:60])
    record(3, worst < 1e-7 and exact_ok,
           f"max |D(pi F)| = {worst:.2e} at 9 nodes (< 1e-7); series residual zero through degree 59: {exact_ok}")


@pytest.fixture(scope="module")
def constant_report(legendre_cert, section2):
    start = time.perf_counter()
    rep = analyze_section(legendre_cert, section2, chebyshev_grid(0.1, 0.9, 33), degree_bound=6, denom_bound=10 ** 4)
    return rep, time.perf_counter() - start


def test_criterion_04_constant_section_rationality(constant_report, legendre_cert, section2):
    rep, elapsed = constant_report
    accepted = [r for r in rep.ladder if r["status"] in ("rational", "rational by exact back-substitution")]
    resid = accepted[-1]["residual"] if accepted else math.inf
    g_exact = exact_inhomogeneity(legendre_cert, section2)
    same = is_zero(add(parse_expr(rep.g), neg(g_exact))) if rep.g else False
    ok = rep.exact_vs_numeric < 1e-8 and resid < 1e-9 and same and elapsed < 60
    record(4, ok, f"numeric vs certificate rel err {rep.exact_vs_numeric:.2e} (< 1e-8); back-substitution "
                  f"residual {resid:.2e} (< 1e-9); reconstructed g equals certificate g: {same}; {elapsed:.1f} s (< 60 s)")


def test_criterion_05_coefficient_rationality(constant_report, legendre_cert, legendre):
    rep, _ = constant_report
    coeffs_ok = bool(rep.coefficients) and all(c.rational and c.distance < 1e-8 for c in rep.coefficients)
    worst = max(c.distance for c in rep.coefficients)
    control = analyze_section(legendre_cert, SectionSpec.from_x("2*t^(1/2)", legendre),
                              chebyshev_grid(0.3, 0.9, 33), degree_bound=6)
    rung = next((r["rung"] for r in control.ladder if r["status"].startswith("rational")), None)
    flagged = control.algebraic and rung is not None and "s=sqrt(t)" in rung
    record(5, coeffs_ok and flagged,
           f"{len(rep.coefficients)} coefficients rational, max distance {worst:.1e} (< 1e-8, q <= 1e4); "
           f"2*sqrt(t) control algebraic via {rung!r}: {flagged}")


def test_criterion_06_torsion_section(legendre_cert, legendre):
    sec = SectionSpec(parse_expr("0"), parse_expr("0"), legendre)
    rep = analyze_section(legendre_cert, sec, chebyshev_grid())
    gmax = max(abs(v) for v in rep.samples.values)
    says_trivial = "trivial" in rep.statement.replace("nontrivial", "").replace("not shown trivial", "")
    ok = gmax < 1e-7 and rep.verdict == "undetected" and not says_trivial
    record(6, ok, f"max |g| = {gmax:.2e} (< 1e-7); verdict {rep.verdict!r}; claims trivial: {says_trivial}")


def test_criterion_07_fuchs_correspondence():
    start = time.perf_counter()
    cs = derive_special_solution_constraints("t^(1/2)")
    p = cs.particular
    sol = solve_pvi(p, 0.25, 0.5, 1.0, PathSpec((0.25, 0.7)), ToleranceSpec(1e-12, 1e-12))
    rep = verify_fuchs_correspondence(p, sol, window=(0.3, 0.7))

    class Perturbed:
        @staticmethod
        def x_at(t):
            return complex(t) ** 0.5 + 0.1 * (t - 0.25)

    bad = verify_fuchs_correspondence(p, Perturbed(), window=(0.3, 0.7))
    elapsed = time.perf_counter() - start
    ok = rep.max_rel_residual < 1e-6 and bad.max_rel_residual > 1e-2 and elapsed < 120
    record(7, ok, f"sqrt(t) solution residual {rep.max_rel_residual:.2e} (< 1e-6); perturbed control "
                  f"{bad.max_rel_residual:.2e} (> 1e-2); {elapsed:.1f} s (< 120 s)")


def test_criterion_08_homogeneous_extension(legendre_cert, section2):
    from pfnormal.pfverify import check_homogeneous_extension

    grid = chebyshev_grid(0.1, 0.9, 33)
    s = compute_g(legendre_cert, section2, grid)
    rep = check_homogeneous_extension(s, legendre_cert, section2, g=exact_inhomogeneity(legendre_cert, section2))
    ok = rep.status == "ok" and rep.max_residual < 1e-6 * rep.scale
    record(8, ok, f"residual {rep.max_residual:.2e} vs 1e-6 * scale = {1e-6 * rep.scale:.2e}; "
                  f"{rep.nodes - rep.excluded}/{rep.nodes} nodes used")


def test_criterion_09_symmetric_square():
    L = parse_operator(LEGENDRE_OP).monic()
    S = symmetric_square(parse_operator(LEGENDRE_OP)).monic()
    p, q = L.coeffs[1], L.coeffs[0]
    dp, dq = p.derivative(), q.derivative()
    field = lambda t, y: np.array([y[1], -(complex(p(t)) * y[1] + complex(q(t)) * y[0])])
    tol = ToleranceSpec(1e-13, 1e-13)
    rng = random.Random(99)
    worst_rel = 0.0
    for _ in range(20):
        t = Fraction(rng.randint(11, 89), 100)
        tf = float(t)
        if tf == 0.5:
            tf = 0.5 + 1e-3
        path = PathSpec((0.5, tf))
        (u, u1) = ode_integrate(field, 0.5, [1.0, 0.0], path, tol).y_end
        (v, v1) = ode_integrate(field, 0.5, [0.0, 1.0], path, tol).y_end
        P, Q, DP, DQ = (complex(f(tf)) for f in (p, q, dp, dq))
        u2, v2 = -(P * u1 + Q * u), -(P * v1 + Q * v)
        u3, v3 = -(DP * u1 + P * u2 + DQ * u + Q * u1), -(DP * v1 + P * v2 + DQ * v + Q * v1)
        w = [u * v, u1 * v + u * v1, u2 * v + 2 * u1 * v1 + u * v2, u3 * v + 3 * u2 * v1 + 3 * u1 * v2 + u * v3]
        terms = [complex(S.coeffs[j](tf)) * w[j] for j in range(4)]
        worst_rel = max(worst_rel, abs(sum(terms)) / max(abs(x) for x in terms))
    record(9, worst_rel < 1e-8, f"max |sym^2(D)(u v)| / scale = {worst_rel:.2e} over 20 random rational t (< 1e-8)")


def test_criterion_10_chazy_pullback(legendre_cert):
    sym2 = symmetric_square(legendre_cert.operator)
    pc = pullback_expand(sym2)
    formal = add(*[mul(rf_to_expr(c.with_var("lam")), Var(f"N{j}")) for j, c in enumerate(sym2.monic().coeffs)],
                 neg(Var("G")))
    identity = is_zero(add(pc.lhs(as_expr(1), as_expr(0), as_expr(0)), neg(formal)), "lam")
    gauged = pullback_expand(remove_second_coefficient(sym2))
    vanish = {"c_dd", "c_p2"} <= set(gauged.vanishing())
    lam = ClosedFormLambda("(1+t)/(1-t)")
    N = lambda l: 1 / (1 + l * l) + l
    G = lambda l: forward_rhs(sym2, N, lam, (l - 1) / (l + 1))
    rep = verify_pullback_numeric(sym2, N, G, lam, list(np.linspace(0.1, 0.4, 9)))
    record(10, identity and vanish and rep.max_residual < 1e-8,
           f"lambda=t identity exact: {identity}; c_dd, c_p2 zero after gauge: {vanish}; "
           f"Mobius residual {rep.max_residual:.2e} (< 1e-8)")


def test_criterion_11_special_functions():
    rf111 = carlson_rf(1, 1, 1)
    oracle = integrate.quad(lambda u: 1 / math.sqrt((u * u + 1) * (u * u + 2)), 0, math.inf,
                            epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    d_rf = abs(carlson_rf(0, 1, 2) - oracle)
    m = 0.5
    d_k = abs(math.pi / (2 * agm(1, math.sqrt(1 - m))) - carlson_rf(0, 1 - m, 1).real)
    ok = abs(rf111 - 1) <= 2.2e-16 and d_rf < 1e-12 and d_k < 1e-12
    record(11, ok, f"|RF(1,1,1)-1| = {abs(rf111 - 1):.1e}; |RF(0,1,2) - quad| = {d_rf:.1e} (< 1e-12); "
                   f"|AGM K - RF K| at m=1/2 = {d_k:.1e} (< 1e-12)")
