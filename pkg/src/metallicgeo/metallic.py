"""Polynomial endomorphism structures J with J^2 = pJ + qI.

A structure is *metallic* for real p, q when J is g-symmetric and satisfies
the quadratic J^2 = pJ + qI; p = q = 1 is the golden case with eigenvalues
phi and 1 - phi.  The discriminant D = p^2 + 4q splits the family: D > 0
yields an associated almost product structure, D < 0 an almost complex
(Norden) structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .connection import cov_endo
from .errors import DiscriminantSignError
from .expr import Expr, const, diff, evaluate
from .manifold import ChartedManifold
from .tensors import as_sym, eval_tensor_at, sym_eye, sym_zeros

__all__ = ["MetallicStructure", "MetallicCheckReport", "TrivialityVerdict",
           "lie_bracket", "apply_endo", "constant_field",
           "triviality_check"]


def constant_field(vec) -> np.ndarray:
    """Extend a numeric vector to a constant-component coordinate field."""
    return np.array([v if isinstance(v, Expr) else const(float(v))
                     for v in vec], dtype=object)


def apply_endo(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """(TX)^k = T^k_j X^j on symbolic components."""
    n = T.shape[0]
    out = sym_zeros(n)
    for k in range(n):
        acc = const(0.0)
        for j in range(n):
            acc = acc + T[k, j] * X[j]
        out[k] = acc
    return out


def lie_bracket(M: ChartedManifold, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """[X, Y]^k = X^l d_l Y^k - Y^l d_l X^k for Expr vector fields."""
    n = M.dim
    out = sym_zeros(n)
    for k in range(n):
        acc = const(0.0)
        for l, name in enumerate(M.coords):
            acc = acc + X[l] * diff(Y[k], name) - Y[l] * diff(X[k], name)
        out[k] = acc
    return out


@dataclass
class MetallicCheckReport:
    polynomial_residual: float
    symmetry_residual: float
    discriminant: float
    is_nondegenerate: bool
    is_product_type: bool
    is_norden_type: bool
    samples: int

    @property
    def ok(self) -> bool:
        return (self.polynomial_residual < 1e-10
                and self.symmetry_residual < 1e-10)


@dataclass(eq=False)
class MetallicStructure:
    """A (1,1)-tensor field J on a chart together with its p, q parameters."""

    manifold: ChartedManifold
    p: float
    q: float
    J: np.ndarray
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.J = as_sym(self.J)
        n = self.manifold.dim
        if self.J.shape != (n, n):
            raise ValueError(f"J must be {n}x{n}, got {self.J.shape}")
        self.p = float(self.p)
        self.q = float(self.q)

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # -- classification --------------------------------------------------------
    @property
    def discriminant(self) -> float:
        return self.p * self.p + 4.0 * self.q

    @property
    def is_nondegenerate(self) -> bool:
        return self.discriminant != 0.0

    @property
    def is_product_type(self) -> bool:
        return self.discriminant > 0.0

    @property
    def is_norden_type(self) -> bool:
        return self.discriminant < 0.0

    @property
    def metallic_number(self) -> float:
        """The larger root (p + sqrt(D))/2 of x^2 = px + q (needs D > 0)."""
        if self.discriminant <= 0:
            raise DiscriminantSignError(
                "metallic number requires a positive discriminant")
        return 0.5 * (self.p + math.sqrt(self.discriminant))

    # -- pointwise data ---------------------------------------------------------
    def J_at(self, x) -> np.ndarray:
        return eval_tensor_at(self.J, self.manifold.binding(x))

    def polynomial_residual_at(self, x) -> float:
        Jx = self.J_at(x)
        n = self.manifold.dim
        res = Jx @ Jx - self.p * Jx - self.q * np.eye(n)
        return float(np.max(np.abs(res)))

    def symmetry_residual_at(self, x) -> float:
        g = self.manifold.metric_at(x)
        gJ = g @ self.J_at(x)
        return float(np.max(np.abs(gJ - gJ.T)))

    def check(self, points=None, samples: int = 200,
              seed: int = 42) -> MetallicCheckReport:
        if points is None:
            points = self.manifold.sample_points(samples, seed=seed)
        poly = max(self.polynomial_residual_at(x) for x in points)
        sym = max(self.symmetry_residual_at(x) for x in points)
        return MetallicCheckReport(
            polynomial_residual=poly, symmetry_residual=sym,
            discriminant=self.discriminant,
            is_nondegenerate=self.is_nondegenerate,
            is_product_type=self.is_product_type,
            is_norden_type=self.is_norden_type,
            samples=len(points))

    # -- derived structures -----------------------------------------------------
    def associated_structure(self, kind: str) -> np.ndarray:
        """Linear combinations of J and I that square to +/-I.

        kind="product": (2J - pI)/sqrt(D), an almost product structure (D>0).
        kind="norden":  (2J - pI)/sqrt(-D), an almost complex structure (D<0).
        kind="tilde":   -(2J - pI)/sqrt(|D|), squaring to (D/|D|) I.
        """
        D = self.discriminant
        if kind == "product":
            if D <= 0:
                raise DiscriminantSignError(
                    "product structure requires discriminant > 0")
            scale = 1.0 / math.sqrt(D)
        elif kind == "norden":
            if D >= 0:
                raise DiscriminantSignError(
                    "norden structure requires discriminant < 0")
            scale = 1.0 / math.sqrt(-D)
        elif kind == "tilde":
            if D == 0:
                raise DiscriminantSignError(
                    "tilde structure requires nonzero discriminant")
            scale = -1.0 / math.sqrt(abs(D))
        else:
            raise ValueError(f"unknown associated-structure kind {kind!r}")

        def build():
            n = self.manifold.dim
            eye = sym_eye(n)
            out = sym_zeros((n, n))
            for i in range(n):
                for j in range(n):
                    out[i, j] = const(scale) * (
                        const(2.0) * self.J[i, j] - const(self.p) * eye[i, j])
            return out
        return self.cached(("assoc", kind), build)

    def tilde_at(self, x) -> np.ndarray:
        return eval_tensor_at(self.associated_structure("tilde"),
                              self.manifold.binding(x))

    # -- covariant derivative of J ---------------------------------------------
    @property
    def nabla_J(self) -> np.ndarray:
        """DJ[i, k, j] = (nabla_i J)^k_j, built once."""
        return self.cached("nabla_J",
                           lambda: cov_endo(self.manifold, self.J))

    def nabla_J_at(self, x) -> np.ndarray:
        return eval_tensor_at(self.nabla_J, self.manifold.binding(x))

    def nabla_J_max_at(self, x) -> float:
        return float(np.max(np.abs(self.nabla_J_at(x))))

    def is_locally_metallic(self, points=None, samples: int = 50,
                            seed: int = 42, tol: float = 1e-9) -> bool:
        """nabla J = 0 across the chart (within tol at sampled points)."""
        if points is None:
            points = self.manifold.sample_points(samples, seed=seed)
        return max(self.nabla_J_max_at(x) for x in points) < tol

    # -- Nijenhuis tensor --------------------------------------------------------
    @property
    def nijenhuis_tensor(self) -> np.ndarray:
        """N[k, i, j] for coordinate fields: N_J(d_i, d_j)^k.

        N_J(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] + J^2 [X, Y]; coordinate
        brackets vanish, leaving four derivative contractions.
        """
        def build():
            M = self.manifold
            n = M.dim
            J = self.J
            dJ = np.empty((n, n, n), dtype=object)   # dJ[l, k, j] = d_l J^k_j
            for l, name in enumerate(M.coords):
                for k in range(n):
                    for j in range(n):
                        dJ[l, k, j] = diff(J[k, j], name)
            out = sym_zeros((n, n, n))
            for k in range(n):
                for i in range(n):
                    for j in range(i):
                        acc = const(0.0)
                        for l in range(n):
                            acc = acc + J[l, i] * dJ[l, k, j] \
                                - J[l, j] * dJ[l, k, i] \
                                + J[k, l] * dJ[j, l, i] \
                                - J[k, l] * dJ[i, l, j]
                        out[k, i, j] = acc
                        out[k, j, i] = -acc
            return out
        return self.cached("nijenhuis", build)

    def nijenhuis(self, x, X, Y) -> np.ndarray:
        """N_J(X, Y) at x; X, Y are Expr fields or constant vectors.

        Computed literally from brackets of the fields JX, JY, X, Y (the
        coordinate-tensor contraction of nijenhuis_tensor is an independent
        path used by the tests).
        """
        M = self.manifold
        Xf = X if X.dtype == object else constant_field(X)
        Yf = Y if Y.dtype == object else constant_field(Y)
        JX = apply_endo(self.J, Xf)
        JY = apply_endo(self.J, Yf)
        term = lie_bracket(M, JX, JY)
        t2 = apply_endo(self.J, lie_bracket(M, JX, Yf))
        t3 = apply_endo(self.J, lie_bracket(M, Xf, JY))
        t4 = lie_bracket(M, Xf, Yf)
        JJt4 = apply_endo(self.J, apply_endo(self.J, t4))
        n = M.dim
        total = np.array([term[k] - t2[k] - t3[k] + JJt4[k]
                          for k in range(n)], dtype=object)
        return eval_tensor_at(total, M.binding(x))

    def lemma_nijenhuis_residual(self, x, X, Y) -> float:
        """| (dJ)(JX,Y) + (dJ)(X,JY) - p (dJ)(X,Y) - N_J(X,Y) | at x.

        dJ is the covariant exterior derivative; N_J comes from brackets.
        Near zero for every valid structure.
        """
        from .hodge import TBValuedForm, dform
        M = self.manifold
        Xf = X if X.dtype == object else constant_field(X)
        Yf = Y if Y.dtype == object else constant_field(Y)
        b = M.binding(x)
        Xv = eval_tensor_at(Xf, b)
        Yv = eval_tensor_at(Yf, b)
        Jx = self.J_at(x)
        formJ = TBValuedForm.endomorphism(M, self.J)
        lhs = (dform(formJ, x, Jx @ Xv, Yv)
               + dform(formJ, x, Xv, Jx @ Yv)
               - self.p * dform(formJ, x, Xv, Yv))
        rhs = self.nijenhuis(x, Xf, Yf)
        return float(np.max(np.abs(lhs - rhs)))

    def nabla_antisymmetry_residual_at(self, x) -> float:
        """Max over coordinate pairs of ||(nabla_i J) e_j + (nabla_j J) e_i||.

        Zero together with dJ = 0 characterizes nabla J = 0.
        """
        DJ = self.nabla_J_at(x)      # [i, k, j]
        n = self.manifold.dim
        worst = 0.0
        for i in range(n):
            for j in range(n):
                worst = max(worst, float(np.max(np.abs(
                    DJ[i, :, j] + DJ[j, :, i]))))
        return worst


@dataclass
class TrivialityVerdict:
    verdict: str
    residual: float
    scalar: float | None = None


def triviality_check(p: float, q: float, p_bar: float, q_bar: float,
                     S: MetallicStructure, points=None,
                     samples: int = 50, seed: int = 42) -> TrivialityVerdict:
    """Scalar-structure constraint (p - p_bar) J = (q_bar - q) I.

    When two parameter pairs are carried by one structure via a metallic
    isometry, either the pairs agree or J is forced to be the scalar
    (q_bar - q)/(p - p_bar) times the identity.
    """
    if points is None:
        points = S.manifold.sample_points(samples, seed=seed)
    if p == p_bar:
        if q == q_bar:
            return TrivialityVerdict("parameters equal, no constraint", 0.0)
        return TrivialityVerdict("inconsistent parameters",
                                 abs(q_bar - q))
    c = (q_bar - q) / (p - p_bar)
    n = S.manifold.dim
    worst = 0.0
    for x in points:
        worst = max(worst, float(np.max(np.abs(S.J_at(x) - c * np.eye(n)))))
    if worst < 1e-9:
        return TrivialityVerdict("trivial structure confirmed", worst, c)
    return TrivialityVerdict("scalar constraint violated", worst, c)
