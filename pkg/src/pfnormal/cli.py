"""Command-line interface: ``pfnormal <group> <verb> [flags]``.

Every command writes one JSON document (sorted keys, no timestamps) to
stdout or ``--out``.  Exit codes: 0 success, 2 invalid input, 3 numeric
failure, 4 failed correspondence verdict.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from ._backend import BACKEND

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
EXIT_VERDICT = 4

LEGENDRE = "x*(x-1)*(x-t)"


class InvalidConfig(ValueError):
    pass


class VerdictFailed(RuntimeError):
    def __init__(self, doc: dict):
        super().__init__("verdict failed")
        self.doc = doc


# number formatting


def _text(v: float) -> str:
    return repr(float(v))


def with_text(obj):
    """Add a decimal-string twin "<key>_text" next to every float field."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out[k] = with_text(v)
            if isinstance(v, float) and not isinstance(v, bool):
                out[f"{k}_text"] = _text(v) if math.isfinite(v) else str(v)
        return out
    if isinstance(obj, (list, tuple)):
        return [with_text(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag, "re_text": _text(obj.real), "im_text": _text(obj.imag)}
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return with_text(obj.item())
    return obj


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag, "re_text": _text(z.real), "im_text": _text(z.imag)}


def emit_csv(samples, path: str) -> None:
    """t,re_g,im_g,err with 17 significant digits, one row per node."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "re_g", "im_g", "err"])
        for t, g, e in zip(samples.grid, samples.values, samples.errors):
            g = complex(g)
            w.writerow([f"{float(complex(t).real):.17g}", f"{g.real:.17g}", f"{g.imag:.17g}", f"{float(e):.17g}"])


def read_csv(path: str) -> list[tuple[float, complex, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(float(r["t"]), complex(float(r["re_g"]), float(r["im_g"])), float(r["err"])) for r in rows]


# argument parsing


def _grid(text: str) -> tuple[float, float, int]:
    try:
        a, b, n = text.split(":")
        return float(Fraction(a)), float(Fraction(b)), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(Fraction(a)), float(Fraction(b))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like a:b, got {text!r}") from None


def _num(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j")) if "j" in text or "i" in text else float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfnormal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pfnormal {__version__}")
    groups = p.add_subparsers(dest="group", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--config", help="JSON file whose keys mirror the flags")
        sp.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
        sp.add_argument("--abs-tol", type=float, default=1e-14)
        sp.add_argument("--rel-tol", type=float, default=1e-14)
        return sp

    pf = groups.add_parser("pf", help="Picard-Fuchs operators").add_subparsers(dest="verb", required=True)
    sp = common(pf.add_parser("derive", help="derive the operator and certificate of a curve family"))
    sp.add_argument("--curve", default=LEGENDRE)
    sp.add_argument("--max-order", type=int, default=2)
    sp = common(pf.add_parser("apply", help="apply an operator to an expression exactly"))
    sp.add_argument("--operator", required=True)
    sp.add_argument("--expr", required=True)
    sp.add_argument("--var", default="t")

    nu = groups.add_parser("nu", help="truncated normal function").add_subparsers(dest="verb", required=True)
    sp = common(nu.add_parser("eval", help="integral of dx/y from infinity to X(t)"))
    sp.add_argument("--curve", default=LEGENDRE)
    sp.add_argument("--section-x", required=True)
    sp.add_argument("--t", type=_num, required=True)

    g = groups.add_parser("g", help="inhomogeneity of a section").add_subparsers(dest="verb", required=True)
    sp = common(g.add_parser("compute", help="sample g = D nu and optionally reconstruct it"))
    sp.add_argument("--curve", default=LEGENDRE)
    sp.add_argument("--section-x", required=True)
    sp.add_argument("--grid", type=_grid, default=(0.1, 0.9, 33))
    sp.add_argument("--reconstruct", action="store_true")
    sp.add_argument("--degree", type=int, default=6)
    sp.add_argument("--denom-bound", type=int, default=10 ** 4)
    sp.add_argument("--csv", help="also write the samples as CSV")

    pvi = groups.add_parser("pvi", help="Painleve VI").add_subparsers(dest="verb", required=True)
    sp = common(pvi.add_parser("solve", help="integrate Painleve VI"))
    sp.add_argument("--params", required=True, help="alpha,beta,gamma,delta")
    sp.add_argument("--t0", type=_num, required=True)
    sp.add_argument("--t1", type=_num, required=True)
    sp.add_argument("--x0", type=_num, required=True)
    sp.add_argument("--v0", type=_num, required=True)
    sp.add_argument("--constraints", metavar="EXPR", help="also derive the parameter constraints for X = EXPR")

    fu = groups.add_parser("fuchs", help="R. Fuchs correspondence").add_subparsers(dest="verb", required=True)
    sp = common(fu.add_parser("check", help="check the Fuchs identity along a Painleve VI solution"))
    sp.add_argument("--params", default="derived",
                    help="alpha,beta,gamma,delta, or 'derived' for the constraints of --special")
    sp.add_argument("--special", default="t^(1/2)",
                    help="closed-form solution supplying derived parameters and the default X0, V0")
    sp.add_argument("--t0", type=_num, default=0.25)
    sp.add_argument("--x0", type=_num)
    sp.add_argument("--v0", type=_num)
    sp.add_argument("--window", type=_window, default=(0.3, 0.7))
    sp.add_argument("--nodes", type=int, default=9)

    ch = groups.add_parser("chazy", help="third-order pullback").add_subparsers(dest="verb", required=True)
    sp = common(ch.add_parser("expand", help="chain-rule expansion of an order-3 operator"))
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--operator")
    src.add_argument("--sym2-curve", help="use the symmetric square of this family's operator")
    sp.add_argument("--gauge", action="store_true", help="remove the d^2 coefficient first")
    sp = common(ch.add_parser("verify", help="numeric check of the solved form"))
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--operator")
    src.add_argument("--sym2-curve")
    sp.add_argument("--lambda", dest="lam", required=True, help="lambda(t)")
    sp.add_argument("--n", dest="nfun", required=True, help="N as an expression in lam")
    sp.add_argument("--g", dest="gfun", default="forward",
                    help="G as an expression in lam, or 'forward' to build it from --lambda-inverse")
    sp.add_argument("--lambda-inverse", help="t as an expression in lam (for --g forward)")
    sp.add_argument("--window", type=_window, default=(0.1, 0.5))
    sp.add_argument("--nodes", type=int, default=9)
    return p


# commands


def _tol(args):
    from .specfun import ToleranceSpec

    return ToleranceSpec.from_env(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


def _family(text: str):
    from .gmred import CurveFamily

    return CurveFamily.from_text(text)


def _check_window(a: float, b: float, clearance: float = 0.05):
    if not (clearance <= a < b <= 1 - clearance):
        raise InvalidConfig(f"window [{a}, {b}] must lie in [{clearance}, {1 - clearance}]")


def cmd_pf_derive(args) -> dict:
    from .gmred import derive_picard_fuchs, verify_certificate

    fam = _family(args.curve)
    if args.dry_run:
        return {"plan": {"curve": fam.text, "max_order": args.max_order}}
    cert = derive_picard_fuchs(fam, args.max_order)
    return {"operator": cert.operator.to_text(), "monic": cert.operator.monic().to_text(),
            "certificate": json.loads(cert.to_json()), "unit": cert.unit.to_text(),
            "verified": bool(verify_certificate(cert))}


def cmd_pf_apply(args) -> dict:
    from .exprlang import apply_operator, parse_expr, parse_operator, simplify, to_text

    op = parse_operator(args.operator, args.var)
    e = parse_expr(args.expr)
    if args.dry_run:
        return {"plan": {"operator": op.to_text(), "expr": to_text(e)}}
    return {"operator": op.to_text(), "expr": to_text(e), "result": to_text(simplify(apply_operator(op, e)))}


def _section(args):
    from .gmred import SectionSpec

    fam = _family(args.curve)
    return SectionSpec.from_x(args.section_x, fam)


def cmd_nu_eval(args) -> dict:
    from .exprlang import eval_expr, to_text
    from .pfverify import truncated_normal_function

    sec = _section(args)
    t = complex(args.t)
    if args.dry_run:
        return {"plan": {"X": to_text(sec.X), "Y": to_text(sec.Y), "t": _cnum(t)}}
    v = truncated_normal_function(sec, t, _tol(args))
    return {"X": to_text(sec.X), "Y": to_text(sec.Y), "t": _cnum(t),
            "X_value": _cnum(eval_expr(sec.X, {sec.family.tvar: t}, strict=False)), "nu": _cnum(v)}


def cmd_g_compute(args) -> dict:
    from .exprlang import to_text
    from .gmred import derive_picard_fuchs
    from .pfverify import analyze_section, chebyshev_grid, compute_g

    a, b, n = args.grid
    _check_window(a, b)
    if args.reconstruct and n < 2 * args.degree + 1:
        raise InvalidConfig(f"need at least {2 * args.degree + 1} nodes for degree {args.degree}")
    sec = _section(args)
    if args.dry_run:
        return {"plan": {"X": to_text(sec.X), "grid": [a, b, n], "reconstruct": args.reconstruct,
                         "degree": args.degree}}
    cert = derive_picard_fuchs(sec.family)
    grid = chebyshev_grid(a, b, n)
    tol = _tol(args)
    if args.reconstruct:
        rep = analyze_section(cert, sec, grid, args.degree, args.denom_bound, tol)
        samples = rep.samples
        doc = rep.to_dict()
    else:
        samples = compute_g(cert, sec, grid, tol)
        doc = {}
    doc["operator"] = cert.operator.to_text()
    doc["samples"] = [{"t": t, "g": _cnum(v), "err": float(e), "flag": f}
                      for t, v, e, f in zip(samples.grid, samples.values, samples.errors, samples.flags)]
    if args.csv:
        emit_csv(samples, args.csv)
    return doc


def cmd_pvi_solve(args) -> dict:
    from .odeint import PathSpec
    from .painleve import PainleveParams, derive_special_solution_constraints, solve_pvi

    p = PainleveParams.parse(args.params)
    path = PathSpec((complex(args.t0), complex(args.t1)))
    if args.dry_run:
        return {"plan": {"params": p.to_dict(), "path": [_cnum(args.t0), _cnum(args.t1)]}}
    sol = solve_pvi(p, args.t0, args.x0, args.v0, path, _tol_pvi(args))
    tr = sol.trajectory
    doc = {"params": p.to_dict(), "steps": len(tr) - 1, "t_end": _cnum(tr.t_end),
           "X_end": _cnum(tr.y_end[0]), "V_end": _cnum(tr.y_end[1])}
    if args.constraints:
        doc["constraints"] = derive_special_solution_constraints(args.constraints).to_dict()
    return doc


def _tol_pvi(args):
    from .specfun import ToleranceSpec

    # the shared defaults are for special functions; an ODE at 1e-14 is slow
    a = args.abs_tol if args.abs_tol != 1e-14 else 1e-12
    r = args.rel_tol if args.rel_tol != 1e-14 else 1e-12
    return ToleranceSpec.from_env(abs_tol=a, rel_tol=r)


def cmd_fuchs_check(args) -> dict:
    from .exprlang import differentiate, eval_expr, parse_expr
    from .odeint import PathSpec
    from .painleve import PainleveParams, derive_special_solution_constraints, solve_pvi, verify_fuchs_correspondence

    wa, wb = args.window
    _check_window(wa, wb)
    special = parse_expr(args.special)
    if args.params == "derived":
        cs = derive_special_solution_constraints(special)
        if cs.empty:
            raise InvalidConfig(f"no parameters make {args.special} a solution")
        p = cs.particular
    else:
        p = PainleveParams.parse(args.params)
    t0 = float(complex(args.t0).real)
    x0 = args.x0 if args.x0 is not None else eval_expr(special, {"t": t0}, strict=False)
    v0 = args.v0 if args.v0 is not None else eval_expr(differentiate(special, "t"), {"t": t0}, strict=False)
    lo, hi = min(t0, wa), max(t0, wb)
    if args.dry_run:
        return {"plan": {"params": p.to_dict(), "t0": t0, "x0": _cnum(x0), "v0": _cnum(v0),
                         "window": [wa, wb]}}
    if wa < t0 < wb:
        raise InvalidConfig("t0 must lie at or outside one end of the window")
    tol = _tol_pvi(args)
    sol = solve_pvi(p, t0, x0, v0, PathSpec((t0, hi)) if hi > t0 else PathSpec((t0, lo)), tol)
    rep = verify_fuchs_correspondence(p, sol, window=(wa, wb), nodes=args.nodes)
    doc = rep.to_dict()
    doc["x0"], doc["v0"], doc["t0"] = _cnum(x0), _cnum(v0), t0
    if not rep.passed:
        raise VerdictFailed(doc)
    return doc


def _order3(args):
    from .exprlang import parse_operator, symmetric_square
    from .gmred import derive_picard_fuchs

    if args.operator:
        return parse_operator(args.operator)
    return symmetric_square(derive_picard_fuchs(_family(args.sym2_curve)).operator)


def cmd_chazy_expand(args) -> dict:
    from .chazy import pullback_expand, remove_second_coefficient, solved_form
    from .exprlang import to_text

    op = _order3(args)
    if op.order != 3:
        raise InvalidConfig(f"operator has order {op.order}, expected 3")
    if args.gauge:
        op = remove_second_coefficient(op)
    if args.dry_run:
        return {"plan": {"operator": op.to_text(), "gauge": args.gauge}}
    pc = pullback_expand(op)
    return {"operator": op.monic().to_text(), "slots": json.loads(pc.to_json()),
            "vanishing": pc.vanishing(), "solved_form": to_text(solved_form(pc))}


def cmd_chazy_verify(args) -> dict:
    import numpy as np

    from .chazy import ClosedFormLambda, forward_rhs, verify_pullback_numeric
    from .exprlang import eval_expr, parse_expr

    op = _order3(args)
    lam = ClosedFormLambda(args.lam)
    nexpr = parse_expr(args.nfun)
    Nfun = lambda l: eval_expr(nexpr, {"lam": l}, strict=False)
    if args.gfun == "forward":
        if not args.lambda_inverse:
            raise InvalidConfig("--g forward needs --lambda-inverse")
        inv = parse_expr(args.lambda_inverse)
        Gfun = lambda l: forward_rhs(op, Nfun, lam, eval_expr(inv, {"lam": l}, strict=False))
    else:
        gexpr = parse_expr(args.gfun)
        Gfun = lambda l: eval_expr(gexpr, {"lam": l}, strict=False)
    a, b = args.window
    ts = list(np.linspace(a, b, args.nodes))
    if args.dry_run:
        return {"plan": {"operator": op.to_text(), "window": [a, b], "nodes": args.nodes}}
    rep = verify_pullback_numeric(op, Nfun, Gfun, lam, ts)
    return {"operator": op.monic().to_text(), "window": [a, b], **rep.to_dict()}


COMMANDS = {
    ("pf", "derive"): cmd_pf_derive,
    ("pf", "apply"): cmd_pf_apply,
    ("nu", "eval"): cmd_nu_eval,
    ("g", "compute"): cmd_g_compute,
    ("pvi", "solve"): cmd_pvi_solve,
    ("fuchs", "check"): cmd_fuchs_check,
    ("chazy", "expand"): cmd_chazy_expand,
    ("chazy", "verify"): cmd_chazy_verify,
}


def _config_flags(path: str) -> list[str]:
    """A JSON config as command-line flags; booleans become bare switches."""
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InvalidConfig("config file must hold a JSON object")
    flags = []
    for k, v in cfg.items():
        flag = "--" + k.replace("_", "-")
        if v is True:
            flags.append(flag)
        elif v is False or v is None:
            continue
        elif isinstance(v, list):
            flags += [flag, ":".join(str(x) for x in v)]
        else:
            flags += [flag, str(v)]
    return flags


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse argv; config-file keys act as flags that explicit flags override."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and len(argv) >= 2:
        argv = [argv[0], argv[1], *_config_flags(known.config), *argv[2:]]
    sub = _subparser(parser, argv)
    if known.config and sub is not None:
        valid = {o for a in sub._actions for o in a.option_strings}
        unknown = [f for f in _config_flags(known.config) if f.startswith("--") and f not in valid]
        if unknown:
            raise InvalidConfig(f"unknown config keys: {', '.join(sorted(unknown))}")
    return parser.parse_args(argv)


def _subparser(parser: argparse.ArgumentParser, argv: Sequence[str]):
    if len(argv) < 2:
        return None
    for act in parser._subparsers._group_actions:
        grp = act.choices.get(argv[0])
        if grp is None:
            return None
        for act2 in grp._subparsers._group_actions:
            return act2.choices.get(argv[1])
    return None


def _emit(doc: dict, out: str | None) -> None:
    from .specfun import ToleranceSpec

    doc = dict(doc)
    doc["metadata"] = {"version": __version__, "backend": BACKEND,
                       "precision": "extended" if ToleranceSpec.from_env().extended else "double"}
    text = json.dumps(with_text(doc), sort_keys=True, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    from .exprlang import ExprSyntaxError
    from .odeint import IntegrationError, NoiseFloorError
    from .specfun import SpecialFunctionError

    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        doc = COMMANDS[(args.group, args.verb)](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0) and EXIT_INVALID
    except VerdictFailed as exc:
        _emit(exc.doc, getattr(args, "out", None))
        print("pfnormal: correspondence failed", file=sys.stderr)
        return EXIT_VERDICT
    except (InvalidConfig, ExprSyntaxError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"pfnormal: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SpecialFunctionError, IntegrationError, NoiseFloorError, ArithmeticError) as exc:
        print(f"pfnormal: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"pfnormal: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(doc, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
