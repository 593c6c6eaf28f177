"""Symbolic expression engine: parse, differentiate, evaluate, print."""

from .nodes import (Expr, Const, Var, Sum, Prod, Quot, Pow, Func,
                    const, var, add, mul, div, pow_, func,
                    diff, substitute, evaluate, evaluate_batch,
                    to_source, as_rational, FUNCTIONS,
                    ExprError, DomainError, UnboundVariableError, PI, PHI)
from .parser import parse, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Expr", "Const", "Var", "Sum", "Prod", "Quot", "Pow", "Func",
    "const", "var", "add", "mul", "div", "pow_", "func",
    "diff", "substitute", "evaluate", "evaluate_batch",
    "to_source", "as_rational", "FUNCTIONS",
    "ExprError", "DomainError", "UnboundVariableError", "PI", "PHI",
    "parse", "ExprSyntaxError", "UnknownIdentifierError",
]
