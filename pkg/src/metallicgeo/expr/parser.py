"""Recursive-descent parser for chart component expressions.

Grammar (standard precedence; ``^`` is right-associative and binds tighter
than unary minus, which binds tighter than ``*``/``/``, which bind tighter
than ``+``/``-``)::

    expr     := term { ("+" | "-") term }
    term     := unary { ("*" | "/") unary }
    unary    := "-" unary | power
    power    := atom [ "^" exponent ]
    exponent := unary                 -- must fold to a rational constant
    atom     := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

``pi`` and ``phi`` are predefined constants; the unary function table is
fixed (sin, cos, tan, exp, log, sqrt, sinh, cosh).  General ``f^g`` with a
non-rational exponent is rejected at parse time.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .nodes import (PHI, PI, Expr, ExprError, add, as_rational, const, div,
                    func, mul, pow_, var, FUNCTIONS)

__all__ = ["parse", "ExprSyntaxError", "UnknownIdentifierError"]


class ExprSyntaxError(ExprError):
    """Parse failure with 1-based line/column location."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnknownIdentifierError(ExprSyntaxError):
    """An identifier that is neither a declared variable, a predefined
    constant, nor a known function."""

    def __init__(self, name: str, line: int, col: int):
        super().__init__(f"unknown identifier '{name}'", line, col)
        self.name = name


_CONSTANTS = {"pi": PI, "phi": PHI}


@dataclass
class _Token:
    kind: str  # 'num' | 'ident' | 'op' | 'lparen' | 'rparen' | 'end'
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or
                             (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(_Token("num", text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, start_line, start_col))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, start_line, start_col))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, start_line, start_col))
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}",
                                  start_line, start_col)
        i += 1
        col += 1
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], variables: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, tok.line, tok.col)

    # grammar -------------------------------------------------------------
    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            rhs = self.term()
            node = add(node, rhs) if op.text == "+" else \
                add(node, mul(const(-1.0), rhs))
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            rhs = self.unary()
            node = mul(node, rhs) if op.text == "*" else div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return mul(const(-1.0), self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            caret = self.advance()
            exponent = self.unary()
            r = as_rational(exponent)
            if r is None:
                raise ExprSyntaxError(
                    "exponent must be a rational constant",
                    caret.line, caret.col)
            return pow_(base, r)
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            try:
                frac = Fraction(Decimal(tok.text))
            except InvalidOperation:  # pragma: no cover
                self.fail(f"malformed number {tok.text!r}", tok)
            return const(float(frac), frac)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.peek().kind == "lparen":
                if name not in FUNCTIONS:
                    if name in self.variables or name in _CONSTANTS:
                        self.fail(f"'{name}' is not a function", tok)
                    raise UnknownIdentifierError(name, tok.line, tok.col)
                self.advance()
                arg = self.expr()
                closing = self.peek()
                if closing.kind != "rparen":
                    self.fail("expected ')'", closing)
                self.advance()
                return func(name, arg)
            if name in self.variables:
                return var(name)
            if name in _CONSTANTS:
                return _CONSTANTS[name]
            if name in FUNCTIONS:
                self.fail(f"function '{name}' requires an argument list", tok)
            raise UnknownIdentifierError(name, tok.line, tok.col)
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            closing = self.peek()
            if closing.kind != "rparen":
                self.fail("expected ')'", closing)
            self.advance()
            return node
        if tok.kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected token {tok.text!r}", tok)


def parse(source: str, variables=()) -> Expr:
    """Parse ``source`` into an expression over the given variable names."""
    tokens = _tokenize(source)
    parser = _Parser(tokens, frozenset(variables))
    node = parser.expr()
    tail = parser.peek()
    if tail.kind != "end":
        parser.fail(f"unexpected token {tail.text!r}", tail)
    return node
