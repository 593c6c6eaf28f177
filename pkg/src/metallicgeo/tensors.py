"""Helpers for numpy object arrays holding symbolic expressions.

Symbolic tensors are plain ``dtype=object`` arrays of Expr nodes, so ``+``,
``*`` and ``@`` compose symbolically through the Expr operator overloads.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, add, const, diff, evaluate, evaluate_batch, mul

__all__ = ["sym_zeros", "sym_eye", "as_sym", "sym_diff", "sym_det",
           "sym_inverse", "eval_tensor", "eval_tensor_at", "sym_dot",
           "sym_simplify_sum"]


def sym_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out[...] = const(0.0)
    return out


def sym_eye(n: int) -> np.ndarray:
    out = sym_zeros((n, n))
    for i in range(n):
        out[i, i] = const(1.0)
    return out


def as_sym(values) -> np.ndarray:
    """Coerce a nested list / numeric array into an Expr object array."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape) if arr.shape else [()]:
        v = arr[idx]
        out[idx] = v if isinstance(v, Expr) else const(float(v))
    return out


def sym_diff(tensor: np.ndarray, name: str) -> np.ndarray:
    out = np.empty(tensor.shape, dtype=object)
    for idx in np.ndindex(tensor.shape):
        out[idx] = diff(tensor[idx], name)
    return out


def sym_dot(terms) -> Expr:
    """Sum of products; each item is a tuple of factors."""
    return add(*[mul(*t) for t in terms])


def sym_simplify_sum(items) -> Expr:
    return add(*items)


def sym_det(m: np.ndarray) -> Expr:
    """Determinant by cofactor expansion (charts are low-dimensional)."""
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    if n == 2:
        return add(mul(m[0, 0], m[1, 1]), mul(const(-1.0), m[0, 1], m[1, 0]))
    total = []
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        sign = const(1.0 if j % 2 == 0 else -1.0)
        total.append(mul(sign, m[0, j], sym_det(minor)))
    return add(*total)


def sym_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse via adjugate / determinant."""
    n = m.shape[0]
    det = sym_det(m)
    out = np.empty((n, n), dtype=object)
    if n == 1:
        out[0, 0] = const(1.0) / det
        return out
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(m, j, axis=0), i, axis=1)
            sign = const(1.0 if (i + j) % 2 == 0 else -1.0)
            out[i, j] = mul(sign, sym_det(minor)) / det
    return out


def eval_tensor(tensor: np.ndarray, binding: dict[str, np.ndarray],
                size: int) -> np.ndarray:
    """Batch-evaluate an Expr object array -> float array (size, *shape).

    Distinct nodes are evaluated once (hash-consing makes repeats common).
    """
    flat = tensor.ravel()
    cache: dict[int, np.ndarray] = {}
    cols = np.empty((flat.size, size), dtype=float)
    for k, e in enumerate(flat):
        got = cache.get(id(e))
        if got is None:
            got = evaluate_batch(e, binding)
            if got.shape == ():
                got = np.full(size, float(got))
            cache[id(e)] = got
        cols[k] = got
    return cols.T.reshape((size,) + tensor.shape).copy()


def eval_tensor_at(tensor: np.ndarray, binding: dict[str, float]) -> np.ndarray:
    """Pointwise evaluation with full domain checking."""
    flat = tensor.ravel()
    cache: dict[int, float] = {}
    out = np.empty(flat.size, dtype=float)
    for k, e in enumerate(flat):
        got = cache.get(id(e))
        if got is None:
            got = evaluate(e, binding)
            cache[id(e)] = got
        out[k] = got
    return out.reshape(tensor.shape)
