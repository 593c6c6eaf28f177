"""Immutable symbolic expression trees with exact differentiation.

Nodes are hash-consed: structurally equal trees are the same Python object,
so identity comparison, derivative caching, and shared-subtree evaluation are
all O(1) per node.  The node set is deliberately small (constants, variables,
n-ary sums and products, quotients, rational powers, and a fixed unary
function table); simplification is limited to constant folding, 0/1
identities, and flattening of nested sums/products.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Sum", "Prod", "Quot", "Pow", "Func",
    "const", "var", "add", "mul", "div", "pow_", "func",
    "diff", "substitute", "evaluate", "evaluate_batch",
    "to_source", "as_rational", "FUNCTIONS",
    "ExprError", "DomainError", "UnboundVariableError",
    "PI", "PHI",
]


class ExprError(Exception):
    """Base class for expression-engine errors."""


class DomainError(ExprError):
    """Raised when evaluation hits a singular point (division by zero,
    log of a non-positive number, fractional power of a negative base...)."""


class UnboundVariableError(ExprError):
    """Raised when evaluation meets a variable absent from the binding."""


# Unary functions understood by the engine: name -> (scalar fn, numpy fn).
FUNCTIONS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "tan": (math.tan, np.tan),
    "exp": (math.exp, np.exp),
    "log": (math.log, np.log),
    "sqrt": (math.sqrt, np.sqrt),
    "sinh": (math.sinh, np.sinh),
    "cosh": (math.cosh, np.cosh),
}

_TABLE: dict[tuple, "Expr"] = {}
_LOCK = threading.RLock()


def _intern(key: tuple, build) -> "Expr":
    node = _TABLE.get(key)
    if node is None:
        with _LOCK:
            node = _TABLE.get(key)
            if node is None:
                node = build()
                _TABLE[key] = node
    return node


class Expr:
    """Base class.  Instances are immutable after construction."""

    __slots__ = ("free",)

    # -- operator sugar so numpy object arrays compose symbolically --------
    def __add__(self, other):
        other = _coerce(other)
        return add(self, other) if other is not None else NotImplemented

    __radd__ = __add__

    def __mul__(self, other):
        other = _coerce(other)
        return mul(self, other) if other is not None else NotImplemented

    __rmul__ = __mul__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return add(self, mul(const(-1.0), other))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return add(other, mul(const(-1.0), self))

    def __neg__(self):
        return mul(const(-1.0), self)

    def __truediv__(self, other):
        other = _coerce(other)
        return div(self, other) if other is not None else NotImplemented

    def __rtruediv__(self, other):
        other = _coerce(other)
        return div(other, self) if other is not None else NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, (int, Fraction)):
            return pow_(self, exponent)
        return NotImplemented

    def __repr__(self):
        return f"<Expr {to_source(self)}>"


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, np.integer, np.floating)):
        return const(float(x))
    return None


class Const(Expr):
    __slots__ = ("value", "exact")

    def __init__(self, value: float, exact: Fraction | None):
        self.value = value
        self.exact = exact
        self.free = frozenset()


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.free = frozenset((name,))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self.terms = terms
        self.free = frozenset().union(*(t.free for t in terms))


class Prod(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        self.factors = factors
        self.free = frozenset().union(*(f.free for f in factors))


class Quot(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        self.num = num
        self.den = den
        self.free = num.free | den.free


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Fraction):
        self.base = base
        self.exponent = exponent
        self.free = base.free


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        self.name = name
        self.arg = arg
        self.free = arg.free


# ---------------------------------------------------------------------------
# constructors (the only way to build nodes; they simplify and intern)
# ---------------------------------------------------------------------------

def const(value: float, exact: Fraction | None = None) -> Const:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    if exact is None and value.is_integer() and abs(value) <= 2 ** 53:
        exact = Fraction(int(value))
    if exact is not None:
        value = float(exact)
        if value == 0.0:  # collapse -0.0
            value = 0.0
    key = ("c", value, exact)
    return _intern(key, lambda: Const(value, exact))


def var(name: str) -> Var:
    return _intern(("v", name), lambda: Var(name))


def add(*terms) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        t = _coerce(t)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    consts = [t for t in flat if isinstance(t, Const)]
    rest = [t for t in flat if not isinstance(t, Const)]
    if consts:
        if all(c.exact is not None for c in consts):
            total = sum((c.exact for c in consts), Fraction(0))
            folded = const(float(total), total)
        else:
            folded = const(math.fsum(c.value for c in consts))
        if folded.value != 0.0 or not rest:
            rest.append(folded)
    if not rest:
        return const(0.0)
    if len(rest) == 1:
        return rest[0]
    key = ("+",) + tuple(id(t) for t in rest)
    tup = tuple(rest)
    return _intern(key, lambda: Sum(tup))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        f = _coerce(f)
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    consts = [f for f in flat if isinstance(f, Const)]
    rest = [f for f in flat if not isinstance(f, Const)]
    coeff = None
    if consts:
        if all(c.exact is not None for c in consts):
            total = Fraction(1)
            for c in consts:
                total *= c.exact
            coeff = const(float(total), total)
        else:
            total = 1.0
            for c in consts:
                total *= c.value
            coeff = const(total)
        if coeff.value == 0.0:
            return const(0.0)
    if coeff is not None and (coeff.value != 1.0 or not rest):
        rest.insert(0, coeff)
    if not rest:
        return const(1.0)
    if len(rest) == 1:
        return rest[0]
    key = ("*",) + tuple(id(f) for f in rest)
    tup = tuple(rest)
    return _intern(key, lambda: Prod(tup))


def div(num, den) -> Expr:
    num = _coerce(num)
    den = _coerce(den)
    if isinstance(den, Const) and den.value == 1.0:
        return num
    if isinstance(num, Const) and num.value == 0.0 and not (
            isinstance(den, Const) and den.value == 0.0):
        return const(0.0)
    if isinstance(num, Const) and isinstance(den, Const) and den.value != 0.0:
        if num.exact is not None and den.exact is not None:
            q = num.exact / den.exact
            return const(float(q), q)
        return const(num.value / den.value)
    key = ("/", id(num), id(den))
    return _intern(key, lambda: Quot(num, den))


def pow_(base, exponent) -> Expr:
    base = _coerce(base)
    exponent = Fraction(exponent)
    if exponent == 0:
        return const(1.0)
    if exponent == 1:
        return base
    if isinstance(base, Const):
        folded = _fold_pow(base, exponent)
        if folded is not None:
            return folded
    key = ("^", id(base), exponent)
    return _intern(key, lambda: Pow(base, exponent))


def _fold_pow(base: Const, exponent: Fraction) -> Expr | None:
    v = base.value
    if v == 0.0:
        return const(0.0) if exponent > 0 else None
    if base.exact is not None and exponent.denominator == 1:
        try:
            q = base.exact ** exponent.numerator
        except (OverflowError, ZeroDivisionError):
            return None
        return const(float(q), q)
    if v > 0 or exponent.denominator == 1:
        try:
            return const(v ** float(exponent))
        except (OverflowError, ValueError):
            return None
    return None  # negative base, fractional exponent: leave for evaluation


def func(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    arg = _coerce(arg)
    if isinstance(arg, Const):
        try:
            return const(FUNCTIONS[name][0](arg.value))
        except (ValueError, OverflowError):
            pass
    key = ("f", name, id(arg))
    return _intern(key, lambda: Func(name, arg))


PI = const(math.pi)
PHI = const((1.0 + math.sqrt(5.0)) / 2.0)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

_DIFF_CACHE: dict[tuple[int, str], Expr] = {}


def diff(e: Expr, name: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``name``."""
    if name not in e.free:
        return const(0.0)
    key = (id(e), name)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    out = _diff(e, name)
    with _LOCK:
        _DIFF_CACHE[key] = out
    return out


def _diff(e: Expr, name: str) -> Expr:
    if isinstance(e, Var):
        return const(1.0) if e.name == name else const(0.0)
    if isinstance(e, Sum):
        return add(*[diff(t, name) for t in e.terms])
    if isinstance(e, Prod):
        pieces = []
        for i, f in enumerate(e.factors):
            if name not in f.free:
                continue
            others = e.factors[:i] + e.factors[i + 1:]
            pieces.append(mul(diff(f, name), *others))
        return add(*pieces) if pieces else const(0.0)
    if isinstance(e, Quot):
        du = diff(e.num, name)
        dv = diff(e.den, name)
        return div(add(mul(du, e.den), mul(const(-1.0), e.num, dv)),
                   mul(e.den, e.den))
    if isinstance(e, Pow):
        r = e.exponent
        return mul(const(float(r), r), pow_(e.base, r - 1), diff(e.base, name))
    if isinstance(e, Func):
        u, du = e.arg, diff(e.arg, name)
        if e.name == "sin":
            return mul(func("cos", u), du)
        if e.name == "cos":
            return mul(const(-1.0), func("sin", u), du)
        if e.name == "tan":
            return div(du, pow_(func("cos", u), 2))
        if e.name == "exp":
            return mul(func("exp", u), du)
        if e.name == "log":
            return div(du, u)
        if e.name == "sqrt":
            return div(du, mul(const(2.0), func("sqrt", u)))
        if e.name == "sinh":
            return mul(func("cosh", u), du)
        if e.name == "cosh":
            return mul(func("sinh", u), du)
    raise TypeError(f"cannot differentiate {e!r}")


def substitute(e: Expr, mapping: dict[str, "Expr | float"]) -> Expr:
    """Replace variables by expressions, rebuilding (and re-simplifying)."""
    subs = {k: _coerce(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}

    def rec(node: Expr) -> Expr:
        if not (node.free & subs.keys()):
            return node
        out = memo.get(id(node))
        if out is not None:
            return out
        if isinstance(node, Var):
            out = subs.get(node.name, node)
        elif isinstance(node, Sum):
            out = add(*[rec(t) for t in node.terms])
        elif isinstance(node, Prod):
            out = mul(*[rec(f) for f in node.factors])
        elif isinstance(node, Quot):
            out = div(rec(node.num), rec(node.den))
        elif isinstance(node, Pow):
            out = pow_(rec(node.base), node.exponent)
        elif isinstance(node, Func):
            out = func(node.name, rec(node.arg))
        else:
            out = node
        memo[id(node)] = out
        return out

    return rec(e)


def as_rational(e: Expr) -> Fraction | None:
    """Exact rational value of a constant subtree, or None."""
    if isinstance(e, Const):
        return e.exact
    if isinstance(e, Sum):
        total = Fraction(0)
        for t in e.terms:
            r = as_rational(t)
            if r is None:
                return None
            total += r
        return total
    if isinstance(e, Prod):
        total = Fraction(1)
        for f in e.factors:
            r = as_rational(f)
            if r is None:
                return None
            total *= r
        return total
    if isinstance(e, Quot):
        rn, rd = as_rational(e.num), as_rational(e.den)
        if rn is None or rd is None or rd == 0:
            return None
        return rn / rd
    if isinstance(e, Pow):
        rb = as_rational(e.base)
        if rb is None or e.exponent.denominator != 1:
            return None
        try:
            return rb ** e.exponent.numerator
        except ZeroDivisionError:
            return None
    return None


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _postorder(root: Expr) -> list[Expr]:
    """Deduplicated post-order listing of the DAG under ``root``."""
    order: list[Expr] = []
    seen: set[int] = set()
    stack: list[tuple[Expr, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            order.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, Sum):
            stack.extend((t, False) for t in node.terms)
        elif isinstance(node, Prod):
            stack.extend((f, False) for f in node.factors)
        elif isinstance(node, Quot):
            stack.append((node.num, False))
            stack.append((node.den, False))
        elif isinstance(node, Pow):
            stack.append((node.base, False))
        elif isinstance(node, Func):
            stack.append((node.arg, False))
    return order


def evaluate(e: Expr, binding: dict[str, float]) -> float:
    """Evaluate to a float; raises DomainError at singular points and
    UnboundVariableError for missing variables, naming the culprit."""
    vals: dict[int, float] = {}
    for node in _postorder(e):
        if isinstance(node, Const):
            v = node.value
        elif isinstance(node, Var):
            try:
                v = float(binding[node.name])
            except KeyError:
                raise UnboundVariableError(
                    f"unbound variable '{node.name}'") from None
        elif isinstance(node, Sum):
            v = math.fsum(vals[id(t)] for t in node.terms)
        elif isinstance(node, Prod):
            v = 1.0
            for f in node.factors:
                v *= vals[id(f)]
        elif isinstance(node, Quot):
            den = vals[id(node.den)]
            if den == 0.0:
                raise DomainError(f"division by zero in '{to_source(node)}'")
            v = vals[id(node.num)] / den
        elif isinstance(node, Pow):
            base = vals[id(node.base)]
            exp = node.exponent
            if base < 0.0 and exp.denominator != 1:
                raise DomainError(
                    f"fractional power of negative base in '{to_source(node)}'")
            if base == 0.0 and exp < 0:
                raise DomainError(f"zero raised to a negative power in "
                                  f"'{to_source(node)}'")
            try:
                v = base ** float(exp) if exp.denominator != 1 \
                    else base ** exp.numerator
            except OverflowError:
                raise DomainError(f"overflow in '{to_source(node)}'") from None
        elif isinstance(node, Func):
            a = vals[id(node.arg)]
            if node.name == "log" and a <= 0.0:
                raise DomainError(f"log of non-positive value in "
                                  f"'{to_source(node)}'")
            if node.name == "sqrt" and a < 0.0:
                raise DomainError(f"sqrt of negative value in "
                                  f"'{to_source(node)}'")
            try:
                v = FUNCTIONS[node.name][0](a)
            except (ValueError, OverflowError):
                raise DomainError(f"domain error in '{to_source(node)}'") \
                    from None
        else:  # pragma: no cover
            raise TypeError(f"cannot evaluate {node!r}")
        if isinstance(v, float) and math.isinf(v):
            raise DomainError(f"overflow in '{to_source(node)}'")
        vals[id(node)] = v
    return vals[id(e)]


def evaluate_batch(e: Expr, binding: dict[str, np.ndarray]) -> np.ndarray:
    """Vectorized evaluation over numpy arrays.

    No domain checking: singular points yield nan/inf, which callers sample
    away from (charts reject degenerate points).  Returns an array broadcast
    to the common binding shape.
    """
    shape = None
    arrays = {}
    for k, a in binding.items():
        a = np.asarray(a, dtype=float)
        arrays[k] = a
        if a.shape != ():
            shape = a.shape
    vals: dict[int, np.ndarray | float] = {}
    with np.errstate(all="ignore"):
        for node in _postorder(e):
            if isinstance(node, Const):
                v = node.value
            elif isinstance(node, Var):
                try:
                    v = arrays[node.name]
                except KeyError:
                    raise UnboundVariableError(
                        f"unbound variable '{node.name}'") from None
            elif isinstance(node, Sum):
                v = vals[id(node.terms[0])]
                for t in node.terms[1:]:
                    v = v + vals[id(t)]
            elif isinstance(node, Prod):
                v = vals[id(node.factors[0])]
                for f in node.factors[1:]:
                    v = v * vals[id(f)]
            elif isinstance(node, Quot):
                v = vals[id(node.num)] / vals[id(node.den)]
            elif isinstance(node, Pow):
                exp = node.exponent
                base = vals[id(node.base)]
                if exp.denominator == 1:
                    v = base ** exp.numerator
                else:
                    v = np.power(base, float(exp))
            elif isinstance(node, Func):
                v = FUNCTIONS[node.name][1](vals[id(node.arg)])
            else:  # pragma: no cover
                raise TypeError(f"cannot evaluate {node!r}")
            vals[id(node)] = v
    out = np.asarray(vals[id(e)], dtype=float)
    if out.shape == () and shape is not None:
        out = np.broadcast_to(out, shape).copy()
    return out


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC_SUM, _PREC_PROD, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40


def _prec(e: Expr) -> int:
    if isinstance(e, Sum):
        return _PREC_SUM
    if isinstance(e, (Prod, Quot)):
        return _PREC_PROD
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Const) and e.value < 0:
        return _PREC_SUM  # "-2" must be parenthesized inside products/powers
    return _PREC_ATOM


def _render(e: Expr, min_prec: int) -> str:
    s = _render_raw(e)
    if _prec(e) < min_prec:
        return f"({s})"
    return s


def _render_raw(e: Expr) -> str:
    if isinstance(e, Const):
        if e.value.is_integer() and abs(e.value) <= 2 ** 53:
            return str(int(e.value))
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        parts = [_render(e.terms[0], _PREC_SUM)]
        for t in e.terms[1:]:
            if isinstance(t, Const) and t.value < 0:
                neg = const(-t.value,
                            -t.exact if t.exact is not None else None)
                parts.append(f" - {_render_raw(neg)}")
                continue
            s = _render(t, _PREC_SUM + 1)
            if s.startswith("-"):
                parts.append(f" - {s[1:]}")
            else:
                parts.append(f" + {s}")
        return "".join(parts)
    if isinstance(e, Prod):
        factors = e.factors
        prefix = ""
        if isinstance(factors[0], Const) and factors[0].value == -1.0 \
                and len(factors) > 1:
            prefix = "-"
            factors = factors[1:]
        body = "*".join(_render(f, _PREC_PROD + (1 if i else 0))
                        for i, f in enumerate(factors))
        return prefix + body
    if isinstance(e, Quot):
        return (f"{_render(e.num, _PREC_PROD)}/"
                f"{_render(e.den, _PREC_PROD + 1)}")
    if isinstance(e, Pow):
        base = _render(e.base, _PREC_POW + 1)
        r = e.exponent
        exp = str(r.numerator) if r.denominator == 1 else \
            f"({r.numerator}/{r.denominator})"
        return f"{base}^{exp}"
    if isinstance(e, Func):
        return f"{e.name}({_render_raw(e.arg)})"
    raise TypeError(f"cannot render {e!r}")  # pragma: no cover


def to_source(e: Expr) -> str:
    """Render to a string the parser accepts; evaluation round-trips."""
    return _render_raw(e)
