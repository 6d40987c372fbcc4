"""Exact symbolic kernel: expressions, rational functions, differential operators."""

from .canon import Normal, NotRationalError, is_zero, simplify, simplify_rational, to_normal
from .expr import (
    BranchError,
    Const,
    Expr,
    Pow,
    Prod,
    Quot,
    Sum,
    UnboundVariableError,
    Var,
    add,
    as_expr,
    differentiate,
    div,
    eval_expr,
    free_vars,
    mul,
    neg,
    normalize,
    poly_to_expr,
    power,
    rf_to_expr,
    substitute,
    to_text,
)
from .operator import (
    DiffOperator,
    apply_operator,
    conjugate_operator,
    parse_operator,
    symmetric_square,
)
from .parser import ExprSyntaxError, parse_expr
from .rational import PoleError, Poly, RationalFunction

__all__ = [
    "BranchError", "Const", "DiffOperator", "Expr", "ExprSyntaxError", "Normal",
    "NotRationalError", "PoleError", "Poly", "Pow", "Prod", "Quot", "RationalFunction",
    "Sum", "UnboundVariableError", "Var", "add", "apply_operator", "as_expr",
    "conjugate_operator", "differentiate", "div", "eval_expr", "free_vars", "is_zero",
    "mul", "neg", "normalize", "parse_expr", "parse_operator", "poly_to_expr", "power",
    "rf_to_expr", "simplify", "simplify_rational", "substitute", "symmetric_square",
    "to_normal", "to_text",
]
