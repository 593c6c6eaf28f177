"""Single-chart pseudo-Riemannian manifolds with symbolic metric components.

A chart is a named coordinate box with a symmetric Expr-valued metric.  All
geometry downstream (connection coefficients, curvature, operator caches) is
built symbolically once per chart and evaluated numerically at sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetricError, GeometryError, NearNullVectorError
from .expr import Expr, const, evaluate, func, parse
from .tensors import (as_sym, eval_tensor, eval_tensor_at, sym_det,
                      sym_inverse, sym_zeros)

__all__ = ["ChartedManifold", "Frame", "chart", "DET_FLOOR"]

DET_FLOOR = 1e-10


@dataclass
class Frame:
    """Orthonormal frame at a point: rows of ``vectors`` are the frame
    vectors E_i; ``signs[i]`` = g(E_i, E_i) = +-1."""
    point: np.ndarray
    vectors: np.ndarray
    signs: np.ndarray


@dataclass(eq=False)
class ChartedManifold:
    name: str
    coords: tuple[str, ...]
    box: tuple[tuple[float, float], ...]
    metric: np.ndarray  # (n, n) object array, symmetric

    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = len(self.coords)
        self.metric = as_sym(self.metric)
        if self.metric.shape != (n, n):
            raise GeometryError(
                f"metric must be {n}x{n}, got {self.metric.shape}")
        if len(self.box) != n:
            raise GeometryError("box must give one interval per coordinate")
        for lo, hi in self.box:
            if not lo < hi:
                raise GeometryError(f"empty box interval [{lo}, {hi}]")
        for i in range(n):
            for j in range(i):
                if self.metric[i, j] is not self.metric[j, i]:
                    # tolerate syntactically different but equal entries
                    b = self.binding(self.center())
                    if abs(evaluate(self.metric[i, j], b)
                           - evaluate(self.metric[j, i], b)) > 1e-12:
                        raise GeometryError("metric is not symmetric")

    # -- basics -------------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.coords)

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2 for lo, hi in self.box])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return all(lo <= v <= hi for (lo, hi), v in zip(self.box, x))

    def binding(self, x) -> dict[str, float]:
        x = np.asarray(x, dtype=float)
        return {name: float(v) for name, v in zip(self.coords, x)}

    def binding_batch(self, xs: np.ndarray) -> dict[str, np.ndarray]:
        xs = np.asarray(xs, dtype=float)
        return {name: xs[:, i] for i, name in enumerate(self.coords)}

    def cached(self, key, build):
        got = self._cache.get(key)
        if got is None:
            got = build()
            self._cache[key] = got
        return got

    # -- symbolic metric data ------------------------------------------------
    @property
    def inverse_metric(self) -> np.ndarray:
        return self.cached("ginv", lambda: sym_inverse(self.metric))

    @property
    def metric_det(self) -> Expr:
        return self.cached("det", lambda: sym_det(self.metric))

    # -- pointwise numerics ---------------------------------------------------
    def metric_at(self, x) -> np.ndarray:
        g = eval_tensor_at(self.metric, self.binding(x))
        g = 0.5 * (g + g.T)
        if abs(np.linalg.det(g)) <= DET_FLOOR:
            raise DegenerateMetricError(
                f"metric degenerate at {np.asarray(x).tolist()} on "
                f"chart '{self.name}'")
        return g

    def inverse_metric_at(self, x) -> np.ndarray:
        return np.linalg.inv(self.metric_at(x))

    def signature_at(self, x) -> tuple[int, int]:
        """(positive, negative) eigenvalue counts of g at x."""
        ev = np.linalg.eigvalsh(self.metric_at(x))
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    def is_riemannian(self) -> bool:
        pos, neg = self.signature_at(self.center())
        return neg == 0

    def flat(self, x, X) -> np.ndarray:
        """Lower an index: X^i -> g_ij X^j."""
        return self.metric_at(x) @ np.asarray(X, dtype=float)

    def sharp(self, x, alpha) -> np.ndarray:
        """Raise an index: alpha_j -> g^{ij} alpha_j."""
        return np.linalg.solve(self.metric_at(x), np.asarray(alpha,
                                                             dtype=float))

    # -- sampling -------------------------------------------------------------
    def sample_points(self, count: int, seed: int,
                      max_tries: int = 200) -> np.ndarray:
        """Uniform box samples, rejecting degenerate-metric points."""
        rng = np.random.default_rng(seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        out: list[np.ndarray] = []
        for _ in range(max_tries):
            need = count - len(out)
            if need <= 0:
                break
            draw = rng.uniform(lo, hi, size=(need, self.dim))
            dets = eval_tensor(np.asarray([[self.metric_det]], dtype=object),
                               self.binding_batch(draw), need)[:, 0, 0]
            good = np.abs(dets) > DET_FLOOR
            out.extend(draw[good])
        if len(out) < count:
            raise DegenerateMetricError(
                f"could not draw {count} non-degenerate points on "
                f"'{self.name}'")
        return np.array(out[:count])

    # -- frames ----------------------------------------------------------------
    def orthonormal_frame(self, x, rotation_seed: int | None = None) -> Frame:
        """Modified Gram-Schmidt frame at x over the coordinate basis.

        For indefinite metrics each vector is normalized by the absolute
        squared norm and carries its sign; a near-null intermediate vector
        (|g(v,v)| < 1e-10) raises NearNullVectorError.  With a rotation
        seed, the positive-sign block is mixed by a seeded random orthogonal
        matrix (frame-dependence probes).
        """
        g = self.metric_at(x)
        n = self.dim
        vectors = np.zeros((n, n))
        signs = np.zeros(n, dtype=int)
        for i in range(n):
            v = np.zeros(n)
            v[i] = 1.0
            for j in range(i):
                v = v - signs[j] * (vectors[j] @ g @ v) * vectors[j]
            nrm2 = v @ g @ v
            if abs(nrm2) < 1e-10:
                raise NearNullVectorError(
                    f"near-null vector at step {i} of Gram-Schmidt at "
                    f"{np.asarray(x).tolist()}")
            signs[i] = 1 if nrm2 > 0 else -1
            vectors[i] = v / np.sqrt(abs(nrm2))
        if rotation_seed is not None:
            pos = np.where(signs > 0)[0]
            if len(pos) > 1:
                rng = np.random.default_rng(rotation_seed)
                a = rng.normal(size=(len(pos), len(pos)))
                q, r = np.linalg.qr(a)
                q = q @ np.diag(np.sign(np.diag(r)))
                vectors[pos] = q @ vectors[pos]
        return Frame(point=np.asarray(x, dtype=float), vectors=vectors,
                     signs=signs)

    def frame_field(self) -> tuple[np.ndarray, np.ndarray]:
        """Symbolic orthonormal frame fields (rows) and their signs.

        Same Gram-Schmidt recursion carried out on Expr components; the sign
        of each squared norm is decided at the box center (charts are chosen
        so signs are constant across the box).
        """
        return self.cached("frame_field", self._build_frame_field)

    def _build_frame_field(self):
        n = self.dim
        g = self.metric
        center_binding = self.binding(self.center())
        rows = sym_zeros((n, n))
        signs = np.zeros(n, dtype=int)

        def ip(u, w) -> Expr:
            acc = const(0.0)
            for a in range(n):
                for b in range(n):
                    acc = acc + u[a] * g[a, b] * w[b]
            return acc

        for i in range(n):
            v = sym_zeros(n)
            v[i] = const(1.0)
            for j in range(i):
                coeff = const(float(signs[j])) * ip(v, rows[j])
                v = v - coeff * rows[j]
            nrm2 = ip(v, v)
            val = evaluate(nrm2, center_binding)
            if abs(val) < 1e-10:
                raise NearNullVectorError(
                    f"near-null frame-field vector at step {i} on "
                    f"'{self.name}'")
            signs[i] = 1 if val > 0 else -1
            scale = func("sqrt", const(float(signs[i])) * nrm2)
            rows[i] = np.array([v[a] / scale for a in range(n)], dtype=object)
        return rows, signs


def chart(name: str, coords, box, metric_sources) -> ChartedManifold:
    """Build a chart from string components."""
    coords = tuple(coords)
    n = len(coords)
    rows = list(metric_sources)
    if len(rows) != n or any(len(list(r)) != n for r in rows):
        raise ValueError(
            f"metric must be {n}x{n} to match {n} coordinates")
    m = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, src in enumerate(row):
            m[i, j] = src if isinstance(src, Expr) else parse(str(src), coords)
    box_t = tuple((float(lo), float(hi)) for lo, hi in box)
    return ChartedManifold(name=name, coords=coords, box=box_t, metric=m)
