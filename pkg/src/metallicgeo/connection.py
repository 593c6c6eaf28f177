"""Levi-Civita connection, curvature, and covariant-derivative machinery.

Conventions (anchored by the unit-sphere tests: Ric = g and scal = 2 on the
round 2-sphere of radius 1):

* ``gamma[k, i, j]``   = Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
* curvature operator   R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]
* ``riemann[l, k, i, j]`` defined by R(d_i, d_j) d_k = R^l_kij d_l, i.e.
  R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik
            + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
* ``riemann4[i, j, k, m]`` = g(R(d_i, d_j) d_k, d_m)
* ``ricci[j, k]``      = trace(X -> R(X, d_j) d_k) = R^i_kij (sum over i)

With these choices the squared-norm-positive sectional curvature of a plane
(X, Y) is riemann4(X, Y, Y, X) for orthonormal X, Y.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, const, diff
from .manifold import ChartedManifold
from .tensors import eval_tensor, eval_tensor_at, sym_zeros

__all__ = ["GeometryCache", "geometry", "cov_vector", "cov_covector",
           "cov_endo", "cov_tensor12", "second_endo", "christoffel_at",
           "riemann_at", "riemann4_at", "ricci_at", "ricci_operator_at",
           "scal_at", "cov_deriv_vector", "cov_deriv_endo", "cov_deriv_dual"]


class GeometryCache:
    """Symbolic connection/curvature data for one chart, built lazily."""

    def __init__(self, manifold: ChartedManifold):
        self.manifold = manifold

    def _cached(self, key, build):
        return self.manifold.cached(("geo", key), build)

    # -- connection -----------------------------------------------------------
    @property
    def dmetric(self) -> np.ndarray:
        """dmetric[k, i, j] = d_k g_ij."""
        def build():
            M = self.manifold
            n = M.dim
            out = sym_zeros((n, n, n))
            for k, name in enumerate(M.coords):
                for i in range(n):
                    for j in range(n):
                        out[k, i, j] = diff(M.metric[i, j], name)
            return out
        return self._cached("dmetric", build)

    @property
    def gamma(self) -> np.ndarray:
        """gamma[k, i, j] = Gamma^k_ij."""
        def build():
            M = self.manifold
            n = M.dim
            ginv = M.inverse_metric
            dg = self.dmetric
            out = sym_zeros((n, n, n))
            for k in range(n):
                for i in range(n):
                    for j in range(i + 1):
                        acc = const(0.0)
                        for l in range(n):
                            acc = acc + const(0.5) * ginv[k, l] * (
                                dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                        out[k, i, j] = acc
                        out[k, j, i] = acc
            return out
        return self._cached("gamma", build)

    @property
    def dgamma(self) -> np.ndarray:
        """dgamma[m, k, i, j] = d_m Gamma^k_ij."""
        def build():
            M = self.manifold
            n = M.dim
            g = self.gamma
            out = sym_zeros((n, n, n, n))
            for m, name in enumerate(M.coords):
                for k in range(n):
                    for i in range(n):
                        for j in range(i + 1):
                            d = diff(g[k, i, j], name)
                            out[m, k, i, j] = d
                            out[m, k, j, i] = d
            return out
        return self._cached("dgamma", build)

    # -- curvature -------------------------------------------------------------
    @property
    def riemann(self) -> np.ndarray:
        """riemann[l, k, i, j] = R^l_kij (see module docstring)."""
        def build():
            n = self.manifold.dim
            g = self.gamma
            dg = self.dgamma
            out = sym_zeros((n, n, n, n))
            for l in range(n):
                for k in range(n):
                    for i in range(n):
                        for j in range(i):
                            acc = dg[i, l, j, k] - dg[j, l, i, k]
                            for m in range(n):
                                acc = acc + g[l, i, m] * g[m, j, k] \
                                    - g[l, j, m] * g[m, i, k]
                            out[l, k, i, j] = acc
                            out[l, k, j, i] = -acc
            return out
        return self._cached("riemann", build)

    @property
    def riemann4(self) -> np.ndarray:
        """riemann4[i, j, k, m] = g(R(d_i, d_j) d_k, d_m)."""
        def build():
            M = self.manifold
            n = M.dim
            R = self.riemann
            out = sym_zeros((n, n, n, n))
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        for m in range(n):
                            acc = const(0.0)
                            for l in range(n):
                                acc = acc + M.metric[l, m] * R[l, k, i, j]
                            out[i, j, k, m] = acc
            return out
        return self._cached("riemann4", build)

    @property
    def ricci(self) -> np.ndarray:
        """ricci[j, k] = R^i_kij (sum over i); equals g on the unit sphere."""
        def build():
            n = self.manifold.dim
            R = self.riemann
            out = sym_zeros((n, n))
            for j in range(n):
                for k in range(n):
                    acc = const(0.0)
                    for i in range(n):
                        acc = acc + R[i, k, i, j]
                    out[j, k] = acc
            return out
        return self._cached("ricci", build)

    @property
    def ricci_operator(self) -> np.ndarray:
        """q[i, j] = g^{ik} Ric_kj."""
        def build():
            M = self.manifold
            n = M.dim
            ric = self.ricci
            ginv = M.inverse_metric
            out = sym_zeros((n, n))
            for i in range(n):
                for j in range(n):
                    acc = const(0.0)
                    for k in range(n):
                        acc = acc + ginv[i, k] * ric[k, j]
                    out[i, j] = acc
            return out
        return self._cached("q", build)

    @property
    def scal(self) -> Expr:
        def build():
            q = self.ricci_operator
            acc = const(0.0)
            for i in range(self.manifold.dim):
                acc = acc + q[i, i]
            return acc
        return self._cached("scal", build)


def geometry(M: ChartedManifold) -> GeometryCache:
    return M.cached("geometry", lambda: GeometryCache(M))


# ---------------------------------------------------------------------------
# symbolic covariant-derivative builders
# ---------------------------------------------------------------------------

def cov_vector(M: ChartedManifold, V: np.ndarray) -> np.ndarray:
    """DV[i, k] = (nabla_i V)^k for a vector field V^k."""
    n = M.dim
    g = geometry(M).gamma
    out = sym_zeros((n, n))
    for i, name in enumerate(M.coords):
        for k in range(n):
            acc = diff(V[k], name)
            for l in range(n):
                acc = acc + g[k, i, l] * V[l]
            out[i, k] = acc
    return out


def cov_covector(M: ChartedManifold, a: np.ndarray) -> np.ndarray:
    """Da[i, j] = (nabla_i a)_j for a covector field a_j."""
    n = M.dim
    g = geometry(M).gamma
    out = sym_zeros((n, n))
    for i, name in enumerate(M.coords):
        for j in range(n):
            acc = diff(a[j], name)
            for l in range(n):
                acc = acc - g[l, i, j] * a[l]
            out[i, j] = acc
    return out


def cov_endo(M: ChartedManifold, T: np.ndarray) -> np.ndarray:
    """DT[i, k, j] = (nabla_i T)^k_j for a (1,1) field T^k_j."""
    n = M.dim
    g = geometry(M).gamma
    out = sym_zeros((n, n, n))
    for i, name in enumerate(M.coords):
        for k in range(n):
            for j in range(n):
                acc = diff(T[k, j], name)
                for l in range(n):
                    acc = acc + g[k, i, l] * T[l, j] - g[l, i, j] * T[k, l]
                out[i, k, j] = acc
    return out


def cov_tensor12(M: ChartedManifold, W: np.ndarray) -> np.ndarray:
    """DW[m, k, a, b] = (nabla_m W)^k_ab for a (1,2) field W^k_ab."""
    n = M.dim
    g = geometry(M).gamma
    out = sym_zeros((n, n, n, n))
    for m, name in enumerate(M.coords):
        for k in range(n):
            for a in range(n):
                for b in range(n):
                    acc = diff(W[k, a, b], name)
                    for l in range(n):
                        acc = acc + g[k, m, l] * W[l, a, b] \
                            - g[l, m, a] * W[k, l, b] \
                            - g[l, m, b] * W[k, a, l]
                    out[m, k, a, b] = acc
    return out


def second_endo(M: ChartedManifold, T: np.ndarray,
                DT: np.ndarray | None = None) -> np.ndarray:
    """Second covariant derivative tensor of a (1,1) field.

    D2T[a, b, k, j] = (nabla^2_{a,b} T)^k_j
                    = (nabla_a (nabla T))[b]^k_j  (as a (1,2) tensor in b, j).
    """
    n = M.dim
    g = geometry(M).gamma
    if DT is None:
        DT = cov_endo(M, T)
    out = sym_zeros((n, n, n, n))
    for a, name in enumerate(M.coords):
        for b in range(n):
            for k in range(n):
                for j in range(n):
                    acc = diff(DT[b, k, j], name)
                    for l in range(n):
                        acc = acc + g[k, a, l] * DT[b, l, j] \
                            - g[l, a, b] * DT[l, k, j] \
                            - g[l, a, j] * DT[b, k, l]
                    out[a, b, k, j] = acc
    return out


# ---------------------------------------------------------------------------
# pointwise operations
# ---------------------------------------------------------------------------

def christoffel_at(M: ChartedManifold, x) -> np.ndarray:
    """Gamma^k_ij at x, indexed [k, i, j]."""
    return eval_tensor_at(geometry(M).gamma, M.binding(x))


def riemann_at(M: ChartedManifold, x, X, Y, Z) -> np.ndarray:
    """The vector R(X, Y)Z at x."""
    R = eval_tensor_at(geometry(M).riemann, M.binding(x))
    return np.einsum("lkij,i,j,k->l", R, X, Y, Z)


def riemann4_at(M: ChartedManifold, x, X, Y, Z, W) -> float:
    """g(R(X, Y)Z, W) at x."""
    R4 = eval_tensor_at(geometry(M).riemann4, M.binding(x))
    return float(np.einsum("ijkm,i,j,k,m->", R4, X, Y, Z, W))


def ricci_at(M: ChartedManifold, x) -> np.ndarray:
    return eval_tensor_at(geometry(M).ricci, M.binding(x))


def ricci_operator_at(M: ChartedManifold, x) -> np.ndarray:
    return eval_tensor_at(geometry(M).ricci_operator, M.binding(x))


def scal_at(M: ChartedManifold, x) -> float:
    from .expr import evaluate
    return evaluate(geometry(M).scal, M.binding(x))


def cov_deriv_vector(M: ChartedManifold, x, X, V: np.ndarray) -> np.ndarray:
    """(nabla_X V)(x) for a symbolic vector field V and numeric X."""
    DV = eval_tensor_at(cov_vector(M, V), M.binding(x))
    return np.einsum("ik,i->k", DV, np.asarray(X, dtype=float))


def cov_deriv_endo(M: ChartedManifold, x, X, T: np.ndarray) -> np.ndarray:
    """(nabla_X T)(x) as a matrix, for a symbolic (1,1) field T."""
    DT = eval_tensor_at(cov_endo(M, T), M.binding(x))
    return np.einsum("ikj,i->kj", DT, np.asarray(X, dtype=float))


def cov_deriv_dual(M: ChartedManifold, x, X, T: np.ndarray,
                   alpha) -> np.ndarray:
    """((nabla_X T*) alpha)(x) with alpha extended as a constant covector.

    The dual of a (1,1) field satisfies (nabla T*) = (nabla T)*, so this is
    alpha_k (nabla_X T)^k_j; for g-symmetric T it also equals
    flat((nabla_X T)(sharp alpha)).
    """
    DTX = cov_deriv_endo(M, x, X, T)
    return np.einsum("k,kj->j", np.asarray(alpha, dtype=float), DTX)
