"""Smooth maps between metallic charts: tension fields and lift identities.

For Phi: (M, J, g) -> (Mbar, Jbar, gbar) given by target-coordinate
expressions in the source coordinates:

* tension  tau(Phi) = sum_i eps_i [ nablabar_{Phi_* E_i} Phi_* E_i
                                    - Phi_*(nabla_{E_i} E_i) ]
  computed both as the coordinate trace
      g^{ij} ( d_i d_j Phi^c - Gamma^k_{ij} d_k Phi^c
               + Gammabar^c_{ab} d_i Phi^a d_j Phi^b )
  and as the explicit frame sum (derivatives of sections along the map use
  the pullback connection, so only forward data of Phi is needed);
* the metallic-isometry identity
      Jbar(tau) + Phi_*(delta J) - delta Jbar
          = sum_i [ nablabar_{Phi_* E_i} Phi_*(J E_i) - Phi_*(nabla_{E_i} J E_i) ];
* the lift  Phihat(X + alpha) = Phi_* X + (Phi^*)^{-1} alpha  to the
  generalized bundles, its tension over the xi sections, the decomposition
      tau(Phihat) = 1/4 tau(Phi) + (p/(4 sqrt(D))) flat_gbar(tau(Phi))
                    - (1/(2 sqrt(D))) flat_gbar(A_J),
      A_J := sum_i [ nablabar_{Phi_*(J E_i)} Phi_* E_i - Phi_*(nabla_{J E_i} E_i) ],
  and the full Jbarhat(tau(Phihat)) component identity.

Conditional identities enforce their hypotheses numerically at the anchor
point (isometry / metallic-map residuals below 1e-8) before asserting
anything; see PreconditionError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math
import numpy as np

from .connection import cov_covector, cov_deriv_vector, cov_endo, geometry
from .errors import PreconditionError, SingularJacobianError
from .expr import diff
from .genbundle import GeneralizedSection, j_hat
from .hodge import _J_form, codiff_field
from .manifold import ChartedManifold
from .metallic import MetallicStructure, apply_endo
from .tensors import eval_tensor_at, sym_inverse, sym_zeros

__all__ = ["SmoothMap", "smooth_map", "pushforward", "check_isometry",
           "check_metallic_map", "tension", "tension_frame", "harmonicity",
           "isometry_identity_residual", "corollary_transfer_probe",
           "lift_phi_hat", "tension_hat", "tension_hat_decomposition",
           "jhat_tension_identity_residual", "jhat_commutation_residual",
           "IsometryReport", "MetallicMapReport", "HarmonicityVerdict",
           "TransferProbeReport", "TensionHatRecord"]


@dataclass(eq=False)
class SmoothMap:
    """Target coordinates as expressions in the source coordinates.

    The metallic structures on both sides ride along so that structure
    dependent identities can be verified; purely metric operations
    (tension, harmonicity) ignore them.
    """

    source: ChartedManifold
    target: ChartedManifold
    components: np.ndarray           # (target dim,) Expr in source coords
    structure_source: MetallicStructure | None = None
    structure_target: MetallicStructure | None = None
    name: str = "map"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=object)
        if self.components.shape != (self.target.dim,):
            raise ValueError(
                f"map '{self.name}' needs {self.target.dim} components")

    def cached(self, key, build):
        got = self._cache.get(key)
        if got is None:
            got = build()
            self._cache[key] = got
        return got

    @property
    def jacobian(self) -> np.ndarray:
        """A[c, i] = d Phi^c / d x^i (symbolic)."""
        def build():
            nt, ns = self.target.dim, self.source.dim
            out = sym_zeros((nt, ns))
            for c in range(nt):
                for i, nm in enumerate(self.source.coords):
                    out[c, i] = diff(self.components[c], nm)
            return out
        return self.cached("jacobian", build)

    @property
    def hessian(self) -> np.ndarray:
        """H[c, i, j] = d_i d_j Phi^c (symbolic)."""
        def build():
            nt, ns = self.target.dim, self.source.dim
            A = self.jacobian
            out = sym_zeros((nt, ns, ns))
            for c in range(nt):
                for i in range(ns):
                    for j, nm in enumerate(self.source.coords):
                        out[c, i, j] = diff(A[c, i], nm)
            return out
        return self.cached("hessian", build)

    def at(self, x) -> np.ndarray:
        return eval_tensor_at(self.components.reshape(-1, 1),
                              self.source.binding(x))[:, 0]

    def jacobian_at(self, x) -> np.ndarray:
        return eval_tensor_at(self.jacobian, self.source.binding(x))

    def _structures(self) -> tuple[MetallicStructure, MetallicStructure]:
        if self.structure_source is None or self.structure_target is None:
            raise ValueError(
                f"map '{self.name}' carries no metallic structures")
        return self.structure_source, self.structure_target


def smooth_map(structure_source: MetallicStructure,
               structure_target: MetallicStructure,
               components, name: str = "map") -> SmoothMap:
    return SmoothMap(source=structure_source.manifold,
                     target=structure_target.manifold,
                     components=np.asarray(components, dtype=object),
                     structure_source=structure_source,
                     structure_target=structure_target, name=name)


def pushforward(Phi: SmoothMap, x, X) -> np.ndarray:
    return Phi.jacobian_at(x) @ np.asarray(X, dtype=float)


# ---------------------------------------------------------------------------
# along-the-map covariant derivatives (pullback connection; forward data only)
# ---------------------------------------------------------------------------

def _partials_at(Phi: SmoothMap, fld: np.ndarray, x) -> np.ndarray:
    """d[i, c] = d_i fld^c for a symbolic section along Phi."""
    ns = Phi.source.dim
    out = sym_zeros((ns,) + fld.shape)
    for i, nm in enumerate(Phi.source.coords):
        for idx in np.ndindex(fld.shape):
            out[(i,) + idx] = diff(fld[idx], nm)
    return eval_tensor_at(out, Phi.source.binding(x))


def _along_vec_deriv(Phi: SmoothMap, x, U, fld: np.ndarray) -> np.ndarray:
    """(nablabar^Phi_U fld)^c = U^i d_i fld^c + Gammabar^c_{ab}(Phi x)(AU)^a fld^b."""
    U = np.asarray(U, dtype=float)
    d = _partials_at(Phi, fld, x)
    val = eval_tensor_at(fld, Phi.source.binding(x))
    y = Phi.at(x)
    Gbar = eval_tensor_at(geometry(Phi.target).gamma, Phi.target.binding(y))
    AU = Phi.jacobian_at(x) @ U
    return np.einsum("ic,i->c", d, U) + np.einsum("cab,a,b->c", Gbar, AU, val)


def _along_cov_deriv(Phi: SmoothMap, x, U, fld: np.ndarray) -> np.ndarray:
    """(nablabar^Phi_U beta)_c = U^i d_i beta_c - Gammabar^d_{ac}(AU)^a beta_d."""
    U = np.asarray(U, dtype=float)
    d = _partials_at(Phi, fld, x)
    val = eval_tensor_at(fld, Phi.source.binding(x))
    y = Phi.at(x)
    Gbar = eval_tensor_at(geometry(Phi.target).gamma, Phi.target.binding(y))
    AU = Phi.jacobian_at(x) @ U
    return np.einsum("ic,i->c", d, U) - np.einsum("dac,a,d->c", Gbar, AU, val)


# ---------------------------------------------------------------------------
# isometry / metallic-map checks
# ---------------------------------------------------------------------------

@dataclass
class IsometryReport:
    max_residual: float
    samples_used: int
    skipped_out_of_box: int

    def ok(self, tol: float = 1e-8) -> bool:
        return self.max_residual < tol


@dataclass
class MetallicMapReport:
    max_residual: float
    samples_used: int
    skipped_out_of_box: int

    def ok(self, tol: float = 1e-8) -> bool:
        return self.max_residual < tol


def _in_box(M: ChartedManifold, y) -> bool:
    return all(lo <= v <= hi for v, (lo, hi) in zip(y, M.box))


def _sample_in_image(Phi: SmoothMap, samples: int, seed: int):
    pts = Phi.source.sample_points(samples, seed)
    kept, skipped = [], 0
    for x in pts:
        if _in_box(Phi.target, Phi.at(x)):
            kept.append(x)
        else:
            skipped += 1
    return kept, skipped


def check_isometry(Phi: SmoothMap, samples: int = 50, seed: int = 0,
                   n_vectors: int = 4) -> IsometryReport:
    """max |gbar(Phi_*X, Phi_*Y) - g(X, Y)| over samples and random X, Y."""
    rng = np.random.default_rng(seed)
    kept, skipped = _sample_in_image(Phi, samples, seed)
    worst = 0.0
    for x in kept:
        A = Phi.jacobian_at(x)
        g = Phi.source.metric_at(x)
        gbar = Phi.target.metric_at(Phi.at(x))
        for _ in range(n_vectors):
            X = rng.normal(size=Phi.source.dim)
            Y = rng.normal(size=Phi.source.dim)
            worst = max(worst, abs(float((A @ X) @ gbar @ (A @ Y))
                                   - float(X @ g @ Y)))
    return IsometryReport(worst, len(kept), skipped)


def check_metallic_map(Phi: SmoothMap, samples: int = 50,
                       seed: int = 0) -> MetallicMapReport:
    """max ||A(x) J(x) - Jbar(Phi x) A(x)|| over samples."""
    S, Sbar = Phi._structures()
    kept, skipped = _sample_in_image(Phi, samples, seed)
    worst = 0.0
    for x in kept:
        A = Phi.jacobian_at(x)
        res = A @ S.J_at(x) - Sbar.J_at(Phi.at(x)) @ A
        worst = max(worst, float(np.max(np.abs(res))))
    return MetallicMapReport(worst, len(kept), skipped)


# ---------------------------------------------------------------------------
# tension field
# ---------------------------------------------------------------------------

def tension(Phi: SmoothMap, x) -> np.ndarray:
    """Coordinate-trace path of tau(Phi)."""
    M, Mbar = Phi.source, Phi.target
    bx = M.binding(x)
    g_inv = M.inverse_metric_at(x)
    A = Phi.jacobian_at(x)
    H = eval_tensor_at(Phi.hessian, bx)
    G = eval_tensor_at(geometry(M).gamma, bx)
    y = Phi.at(x)
    Gbar = eval_tensor_at(geometry(Mbar).gamma, Mbar.binding(y))
    t = np.einsum("ij,cij->c", g_inv, H)
    t -= np.einsum("ij,kij,ck->c", g_inv, G, A)
    t += np.einsum("ij,cab,ai,bj->c", g_inv, Gbar, A, A)
    return t


def tension_frame(Phi: SmoothMap, x) -> np.ndarray:
    """Frame-sum path: sum_i eps_i [nablabar^Phi_{E_i}(Phi_* E_i)
    - Phi_*(nabla_{E_i} E_i)] over the symbolic orthonormal frame field."""
    M = Phi.source
    rows, signs = M.frame_field()
    A = Phi.jacobian_at(x)
    out = np.zeros(Phi.target.dim)
    for i in range(M.dim):
        Ef = rows[i]
        Ex = eval_tensor_at(Ef, M.binding(x))
        lifted = Phi.cached(("lift_frame", i),
                            lambda: _sym_matvec(Phi.jacobian, Ef))
        out += signs[i] * (_along_vec_deriv(Phi, x, Ex, lifted)
                           - A @ cov_deriv_vector(M, x, Ex, Ef))
    return out


def _sym_matvec(Mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.empty(Mat.shape[0], dtype=object)
    for r in range(Mat.shape[0]):
        acc = Mat[r, 0] * v[0]
        for c in range(1, Mat.shape[1]):
            acc = acc + Mat[r, c] * v[c]
        out[r] = acc
    return out


@dataclass
class HarmonicityVerdict:
    max_tension: float
    tolerance: float
    samples_used: int
    skipped_out_of_box: int

    @property
    def harmonic(self) -> bool:
        return self.max_tension < self.tolerance


def harmonicity(Phi: SmoothMap, samples: int = 50, seed: int = 0,
                tol: float = 1e-8) -> HarmonicityVerdict:
    kept, skipped = _sample_in_image(Phi, samples, seed)
    worst = 0.0
    for x in kept:
        worst = max(worst, float(np.max(np.abs(tension(Phi, x)))))
    return HarmonicityVerdict(worst, tol, len(kept), skipped)


# ---------------------------------------------------------------------------
# the metallic-isometry identity and the transfer corollary
# ---------------------------------------------------------------------------

def _require_metallic_isometry(Phi: SmoothMap, x, tol: float = 1e-8,
                               require_nontrivial: bool = False):
    S, Sbar = Phi._structures()
    if not (Phi.source.is_riemannian() and Phi.target.is_riemannian()):
        raise PreconditionError("identity requires Riemannian metrics")
    rng = np.random.default_rng(12345)
    A = Phi.jacobian_at(x)
    g = Phi.source.metric_at(x)
    y = Phi.at(x)
    gbar = Phi.target.metric_at(y)
    iso = float(np.max(np.abs(A.T @ gbar @ A - g)))
    if iso > tol:
        raise PreconditionError(
            f"map '{Phi.name}' is not an isometry at the anchor "
            f"(residual {iso:.3e})")
    met = float(np.max(np.abs(A @ S.J_at(x) - Sbar.J_at(y) @ A)))
    if met > tol:
        raise PreconditionError(
            f"map '{Phi.name}' is not a metallic map at the anchor "
            f"(residual {met:.3e})")
    if require_nontrivial:
        for T, pt in ((S, x), (Sbar, y)):
            Jv = T.J_at(pt)
            c = np.trace(Jv) / T.manifold.dim
            if float(np.max(np.abs(Jv - c * np.eye(T.manifold.dim)))) < 1e-10:
                raise PreconditionError(
                    "identity requires nontrivial metallic structures")
    del rng


def _delta_J_vec(S: MetallicStructure, x) -> np.ndarray:
    return eval_tensor_at(codiff_field(_J_form(S)).comp,
                          S.manifold.binding(x))


def _b_sum(Phi: SmoothMap, x) -> np.ndarray:
    """sum_i [nablabar_{Phi_* E_i} Phi_*(J E_i) - Phi_*(nabla_{E_i} J E_i)]."""
    S, _ = Phi._structures()
    M = Phi.source
    rows, _signs = M.frame_field()
    A = Phi.jacobian_at(x)
    out = np.zeros(Phi.target.dim)
    for i in range(M.dim):
        Ef = rows[i]
        JEf = Phi.cached(("JE", i), lambda: apply_endo(S.J, Ef))
        lifted = Phi.cached(("lift_JE", i),
                            lambda: _sym_matvec(Phi.jacobian, JEf))
        Ex = eval_tensor_at(Ef, M.binding(x))
        out += _along_vec_deriv(Phi, x, Ex, lifted) \
            - A @ cov_deriv_vector(M, x, Ex, JEf)
    return out


def _aj_sum(Phi: SmoothMap, x) -> np.ndarray:
    """A_J = sum_i [nablabar_{Phi_*(J E_i)} Phi_* E_i - Phi_*(nabla_{J E_i} E_i)]."""
    S, _ = Phi._structures()
    M = Phi.source
    rows, _signs = M.frame_field()
    A = Phi.jacobian_at(x)
    Jx = S.J_at(x)
    out = np.zeros(Phi.target.dim)
    for i in range(M.dim):
        Ef = rows[i]
        lifted = Phi.cached(("lift_frame", i),
                            lambda: _sym_matvec(Phi.jacobian, Ef))
        Ex = eval_tensor_at(Ef, M.binding(x))
        JEx = Jx @ Ex
        out += _along_vec_deriv(Phi, x, JEx, lifted) \
            - A @ cov_deriv_vector(M, x, JEx, Ef)
    return out


def isometry_identity_residual(Phi: SmoothMap, x) -> float:
    """|Jbar(tau) + Phi_*(delta J) - delta Jbar  -  B| at x (B the frame sum)."""
    _require_metallic_isometry(Phi, x)
    S, Sbar = Phi._structures()
    y = Phi.at(x)
    A = Phi.jacobian_at(x)
    lhs = Sbar.J_at(y) @ tension(Phi, x) + A @ _delta_J_vec(S, x) \
        - _delta_J_vec(Sbar, y)
    rhs = _b_sum(Phi, x)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class TransferProbeReport:
    max_hypothesis_residual: float
    max_conclusion_residual: float
    tolerance: float
    samples_used: int

    @property
    def hypothesis_holds(self) -> bool:
        return self.max_hypothesis_residual < self.tolerance

    @property
    def asserted(self) -> bool:
        """delta Jbar = Phi_*(delta J) is claimed only under the hypothesis."""
        return self.hypothesis_holds and \
            self.max_conclusion_residual < 10.0 * self.tolerance


def corollary_transfer_probe(Phi: SmoothMap, samples: int = 20, seed: int = 0,
                             tol: float = 1e-8) -> TransferProbeReport:
    """Hypothesis: Phi_*((nabla_{E_i} J) E_i) = (nablabar_{Phi_* E_i} Jbar)(Phi_* E_i)
    per frame vector.  Where it holds, delta Jbar = Phi_*(delta J) follows."""
    S, Sbar = Phi._structures()
    M = Phi.source
    kept, _ = _sample_in_image(Phi, samples, seed)
    if kept:
        _require_metallic_isometry(Phi, kept[0], tol=1e-8)
    DJbar = Sbar.cached("nablaJ_for_transfer",
                        lambda: cov_endo(Sbar.manifold, Sbar.J))
    worst_h, worst_c = 0.0, 0.0
    for x in kept:
        A = Phi.jacobian_at(x)
        y = Phi.at(x)
        DJb = eval_tensor_at(DJbar, Sbar.manifold.binding(y))
        DJ = eval_tensor_at(S.nabla_J, M.binding(x))
        E = M.orthonormal_frame(x)
        for vec in E.vectors:
            push = A @ np.einsum("ikj,i,j->k", DJ, vec, vec)
            Av = A @ vec
            tgt = np.einsum("ikj,i,j->k", DJb, Av, Av)
            worst_h = max(worst_h, float(np.max(np.abs(push - tgt))))
        concl = _delta_J_vec(Sbar, y) - A @ _delta_J_vec(S, x)
        worst_c = max(worst_c, float(np.max(np.abs(concl))))
    return TransferProbeReport(worst_h, worst_c, tol, len(kept))


# ---------------------------------------------------------------------------
# the generalized lift
# ---------------------------------------------------------------------------

def lift_phi_hat(Phi: SmoothMap, x,
                 s: GeneralizedSection) -> GeneralizedSection:
    """Phihat(X + alpha) = Phi_* X + (Phi^*)^{-1} alpha."""
    A = Phi.jacobian_at(x)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularJacobianError(
            f"map '{Phi.name}' has a singular Jacobian at {np.asarray(x)}")
    return GeneralizedSection(A @ np.asarray(s.vec, float),
                              np.linalg.solve(A.T, np.asarray(s.cov, float)))


def jhat_commutation_residual(Phi: SmoothMap, x,
                              s: GeneralizedSection) -> float:
    """|Jbarhat(Phihat s) - Phihat(Jhat s)| for a metallic map."""
    S, Sbar = Phi._structures()
    y = Phi.at(x)
    lhs = j_hat(Sbar, y, lift_phi_hat(Phi, x, s))
    rhs = lift_phi_hat(Phi, x, j_hat(S, x, s))
    return float(np.max(np.abs(lhs.as_array() - rhs.as_array())))


def _xi_section_fields(Phi: SmoothMap):
    """Symbolic xi_i = 1/2 (Jt E_i + flat E_i), their lifts through Phihat,
    and the source frame fields, cached on the map."""
    def build():
        S, _ = Phi._structures()
        M = Phi.source
        rows, _signs = M.frame_field()
        Jt = S.associated_structure("tilde")
        g = M.metric
        A = Phi.jacobian
        AinvT = sym_inverse(np.transpose(A).copy())
        half = 0.5
        entries = []
        for i in range(M.dim):
            Ef = rows[i]
            xiv = _sym_scale(half, apply_endo(Jt, Ef))
            xic = _sym_scale(half, _sym_matvec(g, Ef))
            entries.append((xiv, xic,
                            _sym_matvec(A, xiv), _sym_matvec(AinvT, xic)))
        return entries
    return Phi.cached("xi_sections", build)


def _sym_scale(c: float, v: np.ndarray) -> np.ndarray:
    from .expr import const
    out = np.empty(v.shape, dtype=object)
    for idx in np.ndindex(v.shape):
        out[idx] = const(c) * v[idx]
    return out


def tension_hat(Phi: SmoothMap, x) -> GeneralizedSection:
    """tau(Phihat) = sum_i [nablabarhat_{Phihat xi_i} Phihat xi_i
    - Phihat(nablahat_{xi_i} xi_i)], computed directly from the section
    fields (derivatives along the map via the pullback connection)."""
    M = Phi.source
    bx = M.binding(x)
    A = Phi.jacobian_at(x)
    vec = np.zeros(Phi.target.dim)
    cov = np.zeros(Phi.target.dim)
    for xiv, xic, lift_v, lift_c in _xi_section_fields(Phi):
        U = eval_tensor_at(xiv, bx)
        vec += _along_vec_deriv(Phi, x, U, lift_v)
        cov += _along_cov_deriv(Phi, x, U, lift_c)
        # Phihat of the source derivative nablahat_{xi_i} xi_i
        src_v = cov_deriv_vector(M, x, U, xiv)
        Dc = eval_tensor_at(cov_covector(M, xic), bx)
        src_c = np.einsum("ij,i->j", Dc, U)
        vec -= A @ src_v
        cov -= np.linalg.solve(A.T, src_c)
    return GeneralizedSection(vec, cov)


@dataclass
class TensionHatRecord:
    tau_hat: GeneralizedSection
    decomposition: GeneralizedSection
    vector_residual: float
    covector_residual: float
    aj_norm: float
    tau_norm: float

    @property
    def residual(self) -> float:
        return max(self.vector_residual, self.covector_residual)

    def phihat_harmonic(self, tol: float = 1e-8) -> bool:
        return self.tau_norm < tol and self.aj_norm < tol


def tension_hat_decomposition(Phi: SmoothMap, x) -> TensionHatRecord:
    """Match tau(Phihat) against
    1/4 tau + (p/(4 sqrt(D))) flat_gbar(tau) - (1/(2 sqrt(D))) flat_gbar(A_J),
    reporting vector / covector residuals separately."""
    S, _ = Phi._structures()
    _require_metallic_isometry(Phi, x)
    if S.discriminant <= 0:
        raise PreconditionError("decomposition requires p^2 + 4q > 0")
    tau = tension(Phi, x)
    aj = _aj_sum(Phi, x)
    gbar = Phi.target.metric_at(Phi.at(x))
    rD = math.sqrt(S.discriminant)
    dec = GeneralizedSection(
        0.25 * tau,
        (S.p / (4.0 * rD)) * (gbar @ tau) - (1.0 / (2.0 * rD)) * (gbar @ aj))
    th = tension_hat(Phi, x)
    return TensionHatRecord(
        tau_hat=th, decomposition=dec,
        vector_residual=float(np.max(np.abs(th.vec - dec.vec))),
        covector_residual=float(np.max(np.abs(th.cov - dec.cov))),
        aj_norm=float(np.max(np.abs(aj))),
        tau_norm=float(np.max(np.abs(tau))))


def jhat_tension_identity_residual(Phi: SmoothMap, x) -> float:
    """Residual of the full component identity for Jbarhat(tau(Phihat)):

    Jbarhat(tau(Phihat)) = -1/4 [Phi_*(dJ) - dJbar] + 1/4 B
        + ((p^2 + sqrt(D))/(4 sqrt(D))) flat(tau)
        + (p/(4 sqrt(D))) flat(Phi_*(dJ) - dJbar) - (p/(4 sqrt(D))) flat(B)
        - (p/(2 sqrt(D))) flat(A_J) + (1/(2 sqrt(D))) flat(Jbar A_J),

    writing dJ for delta J, flat for flat_gbar, B for the isometry-identity
    frame sum.  The left side applies the target Jbarhat to the directly
    computed tau(Phihat)."""
    S, Sbar = Phi._structures()
    _require_metallic_isometry(Phi, x, require_nontrivial=True)
    if S.discriminant <= 0:
        raise PreconditionError("identity requires p^2 + 4q > 0")
    y = Phi.at(x)
    A = Phi.jacobian_at(x)
    gbar = Phi.target.metric_at(y)
    Jbar = Sbar.J_at(y)
    p = S.p
    rD = math.sqrt(S.discriminant)

    lhs = j_hat(Sbar, y, tension_hat(Phi, x))

    tau = tension(Phi, x)
    aj = _aj_sum(Phi, x)
    b = _b_sum(Phi, x)
    ddiff = A @ _delta_J_vec(S, x) - _delta_J_vec(Sbar, y)
    vec = -0.25 * ddiff + 0.25 * b
    cov = ((p * p + rD) / (4.0 * rD)) * (gbar @ tau) \
        + (p / (4.0 * rD)) * (gbar @ ddiff) \
        - (p / (4.0 * rD)) * (gbar @ b) \
        - (p / (2.0 * rD)) * (gbar @ aj) \
        + (1.0 / (2.0 * rD)) * (gbar @ (Jbar @ aj))
    rhs = np.concatenate([vec, cov])
    return float(np.max(np.abs(lhs.as_array() - rhs)))
