"""Named verification suites over the structures and maps of a manifest.

Each suite turns fixtures into IdentityRecord rows: one row per (identity,
fixture) pair, carrying the max residual observed over seeded samples, the
tolerance it was held to, and a pass / fail / skipped status.  A record is
``fail`` exactly when its residual exceeds its tolerance; identities whose
hypotheses a fixture does not meet are ``skipped`` with a reason instead of
being silently dropped.

Suites:

* ``algebraic``      pointwise structure algebra: the quadratic J^2 = pJ + qI,
                     g-symmetry, the associated product / complex structures,
                     the involution J~, and the second-parameter defect.
* ``frame_lemmas``   the two frame-trace identities, the coclosedness-from-
                     closedness step, the Nijenhuis expansion, and the
                     parallel <=> (closed + skew) equivalence.
* ``weitzenbock``    the displayed Weitzenboeck formula for J, frame/trace
                     dual paths, the Bochner-type curvature balance, and the
                     pointwise <Delta J, J> pairing identity.
* ``generalized``    every generalized-tangent-bundle identity: ghat, Jhat,
                     the xi frame, closed formulas for d, delta, d delta,
                     delta d and Delta of Jhat, the Delta J* formula, and the
                     harmonicity equivalences.
* ``maps``           map-level identities: isometry / metallic-commutation
                     checks, tension dual paths, the isometry identity, the
                     codifferential transfer, and the lifted-map propositions.

Determinism: given the same manifest, suite list, samples, seed and tol, the
records are identical (all randomness flows from the seed; iteration order is
manifest order).
"""

from __future__ import annotations

import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (DiscriminantSignError, PreconditionError,
                     RequiresRiemannianError, SingularJacobianError)
from .genbundle import (GeneralizedSection, d_jhat_closed, d_jhat_direct,
                        ddelta_jhat_closed, ddelta_jhat_direct,
                        delta_jhat_closed, delta_jhat_direct,
                        deltad_jhat_closed, deltad_jhat_direct, g_hat,
                        g_hat_forms, g_hat_signature, harmonicity_conditions,
                        j_hat, j_hat_matrix_at, jstar_weitzenbock_rhs,
                        laplace_jhat_closed, laplace_jhat_direct,
                        laplace_jstar, xi_frame)
from .hodge import (_J_form, bochner_report, codiff, codiff_frame, dJ_max_at,
                    dj_deltaj_probe, endo_pairing_at, laplacian_field,
                    nabla2, nabla2_frame, norm_nabla_sq_at,
                    trace_lemma_1_sides, trace_lemma_2_sides, weitzenbock_S,
                    weitzenbock_S_frame)
from .manifest import KNOWN_SUITES, Manifest
from .maps import (_sample_in_image, check_isometry, check_metallic_map,
                   corollary_transfer_probe, isometry_identity_residual,
                   jhat_commutation_residual, jhat_tension_identity_residual,
                   tension, tension_frame, tension_hat_decomposition)
from .metallic import MetallicStructure
from .tensors import eval_tensor_at

__all__ = ["IdentityRecord", "VerificationReport", "run_suites",
           "KNOWN_IDENTITIES", "SUITE_IDENTITIES"]


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class IdentityRecord:
    """One identity checked on one fixture."""

    identity: str
    statement: str
    fixture: str
    samples: int
    max_residual: float | None
    tolerance: float | None
    status: str                     # "pass" | "fail" | "skipped"
    reason: str | None = None       # set when status == "skipped"
    note: str | None = None         # free-form diagnostic witnesses

    def as_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "statement": self.statement,
            "fixture": self.fixture,
            "samples": self.samples,
            "maxResidual": self.max_residual,
            "tolerance": self.tolerance,
            "status": self.status,
        }
        if self.reason is not None:
            out["reason"] = self.reason
        if self.note is not None:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    records: list[IdentityRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.records)

    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for r in self.records:
            out[r.status] = out.get(r.status, 0) + 1
        return out


# ---------------------------------------------------------------------------
# statements and tolerances
# ---------------------------------------------------------------------------

STATEMENTS: dict[str, str] = {
    "algebraic.polynomial":
        "J^2 = p J + q I at every sample point",
    "algebraic.symmetry":
        "g(JX, Y) = g(X, JY): the lowered tensor gJ is symmetric",
    "algebraic.product_structure":
        "J_p = (2J - pI)/sqrt(p^2+4q) satisfies J_p^2 = I (p^2+4q > 0)",
    "algebraic.norden_structure":
        "J_c = (2J - pI)/sqrt(-(p^2+4q)) satisfies J_c^2 = -I (p^2+4q < 0)",
    "algebraic.tilde_involution":
        "J~ = -(2J - pI)/sqrt(|p^2+4q|) satisfies J~^2 = sign(p^2+4q) I",
    "algebraic.tilde_isometry":
        "g(J~X, J~Y) = g(X, Y) when p^2+4q > 0",
    "algebraic.second_parameter_defect":
        "J^2 - p'J - q'I = (p - p')J + (q - q')I for any second parameter "
        "pair (p', q'), so two distinct pairs force J to be a scalar matrix",
    "frame.trace_identity_1":
        "sum_i eps_i g((dJ)(X, E_i), E_i) = tr(nabla_X J) + g(X, delta J)",
    "frame.trace_identity_2":
        "sum_i eps_i g((dJ)(X, E_i), J E_i) = p/2 tr(nabla_X J) "
        "+ p g(X, delta J) - g(JX, delta J)",
    "frame.coclosed_from_closed":
        "g(JX - p/2 X, delta J) = p/2 L1(X) - L2(X); since J - p/2 I is "
        "invertible for p^2+4q != 0, dJ = 0 forces delta J = 0",
    "frame.nijenhuis_quadratic":
        "the Nijenhuis tensor of J computed from Lie brackets matches its "
        "covariant-derivative expansion "
        "(nabla_{JX}J)Y - (nabla_{JY}J)X + (nabla_Y J)(JX) - (nabla_X J)(JY)",
    "frame.parallel_equivalence":
        "nabla J = 0 if and only if dJ = 0 and (nabla_X J)Y is "
        "antisymmetric in (X, Y)",
    "weitzenbock.displayed_formula":
        "Delta J = -nabla^2 J - S(J) applied to tangent directions, with "
        "S(J)X = sum_i eps_i (R(E_i, X)J) E_i",
    "weitzenbock.frame_paths":
        "coordinate-trace and explicit-frame computations of delta J, "
        "nabla^2 J and S(J) agree and are frame-rotation invariant",
    "weitzenbock.bochner_balance":
        "for harmonic J: |nabla J|^2 + sum_{ij} R(E_i,E_j,JE_i,JE_j) "
        "+ p tr(JQ) + q scal = 0",
    "weitzenbock.laplacian_pairing":
        "<Delta J, J> = |nabla J|^2 + <S(J), J> pointwise "
        "(|J|^2 is constant, so the nabla^2 term integrates by parts exactly)",
    "generalized.pairing_forms":
        "the two displayed component forms of ghat(X+a, Y+b) agree",
    "generalized.pairing_symmetric":
        "ghat(sigma, tau) = ghat(tau, sigma)",
    "generalized.endo_polynomial":
        "Jhat^2 = p Jhat + q I on TM + T*M",
    "generalized.endo_symmetric":
        "ghat(Jhat sigma, tau) = ghat(sigma, Jhat tau)",
    "generalized.xi_orthonormal":
        "ghat(xi_i, xi_j) = ((sqrt(D)+1)/(2 sqrt(D))) delta_ij for "
        "xi_i = 1/2 (J~E_i + flat E_i); the rescaled sections "
        "xi_i sqrt(2 sqrt(D)/(sqrt(D)+1)) are ghat-orthonormal",
    "generalized.d_paths":
        "(dJhat)(X+a, Y+b) = (dJ)(X,Y) + [(nabla_Y J*)a - (nabla_X J*)b] "
        "matches the block-connection computation",
    "generalized.codiff_paths":
        "delta Jhat = 1/4 [delta J + flat_g K], "
        "K = (J~ g^{-1})^{ab} (nabla_a J) d_b, matches the explicit "
        "xi-frame sum for any frame rotation",
    "generalized.dcodiff_paths":
        "4 (d delta Jhat)(X+a) = (d delta J)(X) + flat_g(nabla_X K) matches "
        "the block-connection derivative of delta Jhat",
    "generalized.codiffd_paths":
        "4 (delta d Jhat)(X+a) = (delta d J)(X) + (nabla^2 J*)(a) + flat_g "
        "of the reduced frame sum, matching the block-connection computation",
    "generalized.laplacian_paths":
        "4 (Delta Jhat)(X+a) = (Delta J)(X) - (Delta J*)(a) + flat_g of the "
        "curvature-and-mix frame sum, matching d delta + delta d directly",
    "generalized.jstar_weitzenbock":
        "Delta J* = -nabla^2 J* - flat_g S(J) sharp_g on covectors",
    "generalized.closed_iff_parallel":
        "dJhat = 0 if and only if nabla J = 0",
    "generalized.harmonicity_split":
        "Delta Jhat = 0 if and only if Delta J = 0, S(J) = 0, and the "
        "curvature-mix frame sum vanishes",
    "generalized.pairing_signature":
        "eigenvalue signs of the 2n x 2n ghat Gram matrix (reported as a "
        "diagnostic, no expected value asserted)",
    "maps.declared":
        "at least one smooth map between declared structures",
    "maps.isometry":
        "gbar(Phi_* X, Phi_* Y) = g(X, Y) over random tangent pairs",
    "maps.metallic_commutation":
        "Phi_* J = Jbar Phi_* at every sample point",
    "maps.tension_paths":
        "coordinate-trace and frame-sum computations of the tension field "
        "tau(Phi) agree",
    "maps.harmonicity":
        "isometric maps are harmonic: tau(Phi) = 0 when Phi is an isometry",
    "maps.isometry_identity":
        "Jbar(tau(Phi)) + Phi_*(delta J) - delta Jbar = "
        "sum_i [nablabar_{Phi_* E_i} Phi_*(J E_i) - Phi_*(nabla_{E_i} J E_i)] "
        "for metallic isometries",
    "maps.codiff_transfer":
        "where Phi_* intertwines the frame sums of nabla J and nablabar Jbar, "
        "delta Jbar = Phi_*(delta J)",
    "maps.lift_commutes":
        "Jbarhat(Phihat(sigma)) = Phihat(Jhat(sigma)) for metallic maps with "
        "invertible Jacobian, Phihat(X + a) = Phi_* X + (Phi^*)^{-1} a",
    "maps.lift_tension_split":
        "tau(Phihat) = 1/4 tau(Phi) + (p/(4 sqrt(D))) flat(tau(Phi)) "
        "- (1/(2 sqrt(D))) flat(A_J), vector and covector parts separately",
    "maps.lift_tension_endo":
        "Jbarhat(tau(Phihat)) equals its displayed expansion in tau(Phi), "
        "Phi_*(delta J) - delta Jbar, the frame sum B, A_J and Jbar A_J",
    "maps.lift_harmonicity":
        "tau(Phihat) = 0 if and only if tau(Phi) = 0 and A_J = 0",
}

SUITE_IDENTITIES: dict[str, tuple[str, ...]] = {
    "algebraic": (
        "algebraic.polynomial", "algebraic.symmetry",
        "algebraic.product_structure", "algebraic.norden_structure",
        "algebraic.tilde_involution", "algebraic.tilde_isometry",
        "algebraic.second_parameter_defect"),
    "frame_lemmas": (
        "frame.trace_identity_1", "frame.trace_identity_2",
        "frame.coclosed_from_closed", "frame.nijenhuis_quadratic",
        "frame.parallel_equivalence"),
    "weitzenbock": (
        "weitzenbock.displayed_formula", "weitzenbock.frame_paths",
        "weitzenbock.bochner_balance", "weitzenbock.laplacian_pairing"),
    "generalized": (
        "generalized.pairing_forms", "generalized.pairing_symmetric",
        "generalized.endo_polynomial", "generalized.endo_symmetric",
        "generalized.xi_orthonormal", "generalized.d_paths",
        "generalized.codiff_paths", "generalized.dcodiff_paths",
        "generalized.codiffd_paths", "generalized.laplacian_paths",
        "generalized.jstar_weitzenbock", "generalized.closed_iff_parallel",
        "generalized.harmonicity_split", "generalized.pairing_signature"),
    "maps": (
        "maps.declared", "maps.isometry", "maps.metallic_commutation",
        "maps.tension_paths", "maps.harmonicity", "maps.isometry_identity",
        "maps.codiff_transfer", "maps.lift_commutes",
        "maps.lift_tension_split", "maps.lift_tension_endo",
        "maps.lift_harmonicity"),
}

KNOWN_IDENTITIES: tuple[str, ...] = tuple(
    i for ids in SUITE_IDENTITIES.values() for i in ids)

# identities built from second covariant derivatives (Laplacian-level); these
# run at 10x the base tolerance, matching the documented defaults
_SECOND_ORDER = frozenset({
    "weitzenbock.displayed_formula", "weitzenbock.bochner_balance",
    "weitzenbock.laplacian_pairing", "generalized.dcodiff_paths",
    "generalized.codiffd_paths", "generalized.laplacian_paths",
    "generalized.jstar_weitzenbock", "generalized.harmonicity_split",
    "maps.lift_tension_split", "maps.lift_tension_endo",
    "maps.lift_harmonicity",
})

# the canonical skip reason for generalized-bundle identities on fixtures
# whose metric is indefinite or whose discriminant is nonpositive
GENERALIZED_SKIP_REASON = "requires Riemannian metric, p²+4q>0"


@dataclass
class RunContext:
    manifest: Manifest
    samples: int
    seed: int
    tol: float

    def tol_for(self, identity: str) -> float:
        return 10.0 * self.tol if identity in _SECOND_ORDER else self.tol

    def record(self, identity: str, fixture: str, samples: int,
               residual: float, note: str | None = None) -> IdentityRecord:
        tol = self.tol_for(identity)
        status = "fail" if residual > tol else "pass"
        return IdentityRecord(identity=identity,
                              statement=STATEMENTS[identity],
                              fixture=fixture, samples=samples,
                              max_residual=float(residual), tolerance=tol,
                              status=status, note=note)

    def skip(self, identity: str, fixture: str,
             reason: str) -> IdentityRecord:
        return IdentityRecord(identity=identity,
                              statement=STATEMENTS[identity],
                              fixture=fixture, samples=0, max_residual=None,
                              tolerance=self.tol_for(identity),
                              status="skipped", reason=reason)


def _points(S: MetallicStructure, ctx: RunContext, cap: int):
    return S.manifold.sample_points(min(ctx.samples, cap), seed=ctx.seed)


def _directions(ctx: RunContext, dim: int, count: int,
                offset: int = 0) -> np.ndarray:
    rng = np.random.default_rng(ctx.seed + 1000 + offset)
    return rng.standard_normal((count, dim))


def _sections(ctx: RunContext, dim: int, count: int,
              offset: int = 0) -> list[GeneralizedSection]:
    rng = np.random.default_rng(ctx.seed + 2000 + offset)
    return [GeneralizedSection(rng.standard_normal(dim),
                               rng.standard_normal(dim))
            for _ in range(count)]


# ---------------------------------------------------------------------------
# algebraic suite
# ---------------------------------------------------------------------------

def _suite_algebraic(ctx: RunContext) -> list[IdentityRecord]:
    out = []
    for name, S in ctx.manifest.structures.items():
        pts = S.manifold.sample_points(ctx.samples, seed=ctx.seed)
        rep = S.check(points=pts)
        out.append(ctx.record("algebraic.polynomial", name, len(pts),
                              rep.polynomial_residual))
        out.append(ctx.record("algebraic.symmetry", name, len(pts),
                              rep.symmetry_residual))
        D = S.discriminant
        n = S.manifold.dim
        eye = np.eye(n)

        def max_sq_residual(kind: str, target: np.ndarray) -> float:
            A = S.associated_structure(kind)
            worst = 0.0
            for x in pts:
                Ax = eval_tensor_at(A, S.manifold.binding(x))
                worst = max(worst, float(np.max(np.abs(Ax @ Ax - target))))
            return worst

        if D > 0:
            out.append(ctx.record("algebraic.product_structure", name,
                                  len(pts), max_sq_residual("product", eye)))
            out.append(ctx.skip("algebraic.norden_structure", name,
                                f"requires p^2+4q < 0 (here p^2+4q = {D:g})"))
        elif D < 0:
            out.append(ctx.skip("algebraic.product_structure", name,
                                f"requires p^2+4q > 0 (here p^2+4q = {D:g})"))
            out.append(ctx.record("algebraic.norden_structure", name,
                                  len(pts), max_sq_residual("norden", -eye)))
        else:
            for ident in ("algebraic.product_structure",
                          "algebraic.norden_structure"):
                out.append(ctx.skip(ident, name, "requires p^2+4q != 0"))

        if D != 0:
            sign = 1.0 if D > 0 else -1.0
            out.append(ctx.record("algebraic.tilde_involution", name,
                                  len(pts),
                                  max_sq_residual("tilde", sign * eye)))
        else:
            out.append(ctx.skip("algebraic.tilde_involution", name,
                                "requires p^2+4q != 0"))

        if D > 0:
            worst = 0.0
            for x in pts:
                g = S.manifold.metric_at(x)
                Jt = S.tilde_at(x)
                worst = max(worst, float(np.max(np.abs(Jt.T @ g @ Jt - g))))
            out.append(ctx.record("algebraic.tilde_isometry", name,
                                  len(pts), worst))
        else:
            out.append(ctx.skip(
                "algebraic.tilde_isometry", name,
                "requires p^2+4q > 0 (J~^2 = -I reverses the pairing)"))

        probe_pairs = ((S.p + 1.0, S.q), (S.p, S.q + 1.0),
                       (S.p + 2.0, S.q - 3.0))
        defect_pts = pts[:min(len(pts), 50)]
        worst = 0.0
        for x in defect_pts:
            Jx = S.J_at(x)
            J2 = Jx @ Jx
            for pb, qb in probe_pairs:
                lhs = J2 - pb * Jx - qb * eye
                rhs = (S.p - pb) * Jx + (S.q - qb) * eye
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        out.append(ctx.record("algebraic.second_parameter_defect", name,
                              len(defect_pts), worst))
    return out


# ---------------------------------------------------------------------------
# frame_lemmas suite
# ---------------------------------------------------------------------------

def _suite_frame_lemmas(ctx: RunContext) -> list[IdentityRecord]:
    out = []
    for name, S in ctx.manifest.structures.items():
        M = S.manifold
        riemannian = M.is_riemannian()
        pts = _points(S, ctx, 25)
        dirs = _directions(ctx, M.dim, 2)

        if riemannian:
            for ident, sides in (("frame.trace_identity_1",
                                  trace_lemma_1_sides),
                                 ("frame.trace_identity_2",
                                  trace_lemma_2_sides)):
                worst = 0.0
                for x in pts:
                    for X in dirs:
                        for rot in (None, 7):
                            lhs, rhs = sides(S, x, X, rotation_seed=rot)
                            worst = max(worst, abs(lhs - rhs))
                out.append(ctx.record(ident, name, len(pts), worst))
        else:
            for ident in ("frame.trace_identity_1", "frame.trace_identity_2"):
                out.append(ctx.skip(ident, name,
                                    "requires Riemannian metric"))

        if not riemannian:
            out.append(ctx.skip("frame.coclosed_from_closed", name,
                                "requires Riemannian metric"))
        elif S.discriminant == 0.0:
            out.append(ctx.skip("frame.coclosed_from_closed", name,
                                "requires p^2+4q != 0"))
        else:
            probe = dj_deltaj_probe(S, samples=min(ctx.samples, 100),
                                    seed=ctx.seed)
            note = (f"max ||dJ|| = {probe.max_dJ:.3e}, "
                    f"max ||delta J|| = {probe.max_deltaJ:.3e}, "
                    f"implication "
                    f"{'holds' if probe.implication_holds() else 'violated'}")
            out.append(ctx.record("frame.coclosed_from_closed", name,
                                  probe.samples, probe.max_proof_step,
                                  note=note))

        worst = 0.0
        rng = np.random.default_rng(ctx.seed + 7)
        nij_pts = pts[:min(len(pts), 10)]
        for x in nij_pts:
            for _ in range(2):
                X = rng.standard_normal(M.dim)
                Y = rng.standard_normal(M.dim)
                worst = max(worst, S.lemma_nijenhuis_residual(x, X, Y))
        out.append(ctx.record("frame.nijenhuis_quadratic", name,
                              len(nij_pts), worst))

        max_nabla, max_dJ, max_anti = 0.0, 0.0, 0.0
        for x in pts:
            max_nabla = max(max_nabla, S.nabla_J_max_at(x))
            max_dJ = max(max_dJ, dJ_max_at(S, x))
            max_anti = max(max_anti, S.nabla_antisymmetry_residual_at(x))
        gate = 10.0 * ctx.tol
        if max_nabla < gate:
            residual = max(max_dJ, max_anti)
        elif max(max_dJ, max_anti) < gate:
            residual = max_nabla
        else:
            residual = 0.0
        note = (f"||nabla J|| = {max_nabla:.3e}, ||dJ|| = {max_dJ:.3e}, "
                f"antisymmetry defect = {max_anti:.3e}")
        out.append(ctx.record("frame.parallel_equivalence", name, len(pts),
                              residual, note=note))
    return out


# ---------------------------------------------------------------------------
# weitzenbock suite
# ---------------------------------------------------------------------------

def _suite_weitzenbock(ctx: RunContext) -> list[IdentityRecord]:
    out = []
    for name, S in ctx.manifest.structures.items():
        M = S.manifold
        if not M.is_riemannian():
            for ident in SUITE_IDENTITIES["weitzenbock"]:
                out.append(ctx.skip(ident, name,
                                    "requires Riemannian metric"))
            continue
        T = _J_form(S)
        lap = laplacian_field(T)
        pts = _points(S, ctx, 25)
        dirs = _directions(ctx, M.dim, 2, offset=1)

        worst = 0.0
        for x in pts:
            lap_x = lap.at(x)
            for X in dirs:
                res = lap_x @ X + nabla2(T, x, X) + weitzenbock_S(T, x, X)
                worst = max(worst, float(np.max(np.abs(res))))
        out.append(ctx.record("weitzenbock.displayed_formula", name,
                              len(pts), worst))

        frame_pts = pts[:min(len(pts), 8)]
        worst = 0.0
        for x in frame_pts:
            for rot in (None, 5):
                worst = max(worst, float(np.max(np.abs(
                    codiff(T, x) - codiff_frame(T, x, rotation_seed=rot)))))
                for X in dirs:
                    worst = max(worst, float(np.max(np.abs(
                        nabla2(T, x, X)
                        - nabla2_frame(T, x, X, rotation_seed=rot)))))
                    worst = max(worst, float(np.max(np.abs(
                        weitzenbock_S(T, x, X)
                        - weitzenbock_S_frame(T, x, X, rotation_seed=rot)))))
        out.append(ctx.record("weitzenbock.frame_paths", name,
                              len(frame_pts), worst))

        lap_max = max(float(np.max(np.abs(lap.at(x)))) for x in pts)
        if lap_max < 10.0 * ctx.tol:
            worst = 0.0
            last = None
            for x in frame_pts:
                last = bochner_report(S, x)
                worst = max(worst, last.balanced_residual)
            note = (f"displayed-variant residual = "
                    f"{last.displayed_residual:.6e}, bracket sign gap = "
                    f"{last.sign_gap:.6e}")
            out.append(ctx.record("weitzenbock.bochner_balance", name,
                                  len(frame_pts), worst, note=note))
        else:
            out.append(ctx.skip(
                "weitzenbock.bochner_balance", name,
                f"structure is not harmonic (max ||Delta J|| = "
                f"{lap_max:.3e}); the balance is asserted for harmonic J"))

        worst = 0.0
        n = M.dim
        for x in frame_pts:
            Jx = S.J_at(x)
            Smat = np.column_stack([weitzenbock_S(T, x, e)
                                    for e in np.eye(n)])
            pairing = endo_pairing_at(M, x, lap.at(x), Jx)
            rhs = norm_nabla_sq_at(S, x) + endo_pairing_at(M, x, Smat, Jx)
            worst = max(worst, abs(pairing - rhs))
        out.append(ctx.record("weitzenbock.laplacian_pairing", name,
                              len(frame_pts), worst))
    return out


# ---------------------------------------------------------------------------
# generalized suite
# ---------------------------------------------------------------------------

def _suite_generalized(ctx: RunContext) -> list[IdentityRecord]:
    out = []
    for name, S in ctx.manifest.structures.items():
        M = S.manifold
        if not (M.is_riemannian() and S.discriminant > 0):
            for ident in SUITE_IDENTITIES["generalized"]:
                out.append(ctx.skip(ident, name, GENERALIZED_SKIP_REASON))
            continue
        n = M.dim
        pts = _points(S, ctx, 25)
        secs = _sections(ctx, n, 3)

        worst_forms, worst_sym = 0.0, 0.0
        for x in pts:
            for i, s1 in enumerate(secs):
                for s2 in secs[i:]:
                    a, b = g_hat_forms(S, x, s1, s2)
                    worst_forms = max(worst_forms, abs(a - b))
                    worst_sym = max(worst_sym,
                                    abs(g_hat(S, x, s1, s2)
                                        - g_hat(S, x, s2, s1)))
        out.append(ctx.record("generalized.pairing_forms", name, len(pts),
                              worst_forms))
        out.append(ctx.record("generalized.pairing_symmetric", name,
                              len(pts), worst_sym))

        worst_poly, worst_jsym = 0.0, 0.0
        eye = np.eye(2 * n)
        for x in pts:
            Jh = j_hat_matrix_at(S, x)
            worst_poly = max(worst_poly, float(np.max(np.abs(
                Jh @ Jh - S.p * Jh - S.q * eye))))
            for s1 in secs[:2]:
                for s2 in secs[:2]:
                    worst_jsym = max(worst_jsym, abs(
                        g_hat(S, x, j_hat(S, x, s1), s2)
                        - g_hat(S, x, s1, j_hat(S, x, s2))))
        out.append(ctx.record("generalized.endo_polynomial", name, len(pts),
                              worst_poly))
        out.append(ctx.record("generalized.endo_symmetric", name, len(pts),
                              worst_jsym))

        xi_pts = pts[:min(len(pts), 8)]
        worst = 0.0
        c_const = None
        for x in xi_pts:
            for rot in (None, 3):
                fr = xi_frame(S, x, rotation_seed=rot)
                c_const = fr.gram_constant
                worst = max(worst, float(np.max(np.abs(
                    fr.gram - c_const * np.eye(n)))))
                worst = max(worst, float(np.max(np.abs(
                    fr.normalized_gram - np.eye(n)))))
        out.append(ctx.record(
            "generalized.xi_orthonormal", name, len(xi_pts), worst,
            note=f"literal Gram constant = {c_const:.16g}"))

        d_pts = pts[:min(len(pts), 10)]
        worst = 0.0
        for x in d_pts:
            for i, s1 in enumerate(secs):
                for s2 in secs[i + 1:]:
                    diff = (d_jhat_direct(S, x, s1, s2).as_array()
                            - d_jhat_closed(S, x, s1, s2).as_array())
                    worst = max(worst, float(np.max(np.abs(diff))))
        out.append(ctx.record("generalized.d_paths", name, len(d_pts),
                              worst))

        worst = 0.0
        for x in d_pts:
            closed = delta_jhat_closed(S, x).as_array()
            for rot in (None, 3):
                direct = delta_jhat_direct(S, x, rotation_seed=rot).as_array()
                worst = max(worst, float(np.max(np.abs(direct - closed))))
        out.append(ctx.record("generalized.codiff_paths", name, len(d_pts),
                              worst))

        second_pts = pts[:min(len(pts), 5)]
        worst_dd, worst_sd, worst_lap = 0.0, 0.0, 0.0
        for x in second_pts:
            for s in secs[:2]:
                worst_dd = max(worst_dd, float(np.max(np.abs(
                    ddelta_jhat_direct(S, x, s).as_array()
                    - ddelta_jhat_closed(S, x, s).as_array()))))
                worst_sd = max(worst_sd, float(np.max(np.abs(
                    deltad_jhat_direct(S, x, s).as_array()
                    - deltad_jhat_closed(S, x, s).as_array()))))
                worst_lap = max(worst_lap, float(np.max(np.abs(
                    laplace_jhat_direct(S, x, s).as_array()
                    - laplace_jhat_closed(S, x, s).as_array()))))
        out.append(ctx.record("generalized.dcodiff_paths", name,
                              len(second_pts), worst_dd))
        out.append(ctx.record("generalized.codiffd_paths", name,
                              len(second_pts), worst_sd))
        out.append(ctx.record("generalized.laplacian_paths", name,
                              len(second_pts), worst_lap))

        worst = 0.0
        rng = np.random.default_rng(ctx.seed + 11)
        for x in second_pts:
            for _ in range(2):
                alpha = rng.standard_normal(n)
                worst = max(worst, float(np.max(np.abs(
                    laplace_jstar(S, x, alpha)
                    - jstar_weitzenbock_rhs(S, x, alpha)))))
        out.append(ctx.record("generalized.jstar_weitzenbock", name,
                              len(second_pts), worst))

        max_nabla = max(S.nabla_J_max_at(x) for x in pts)
        max_djhat = 0.0
        for x in d_pts:
            for i, s1 in enumerate(secs):
                for s2 in secs[i + 1:]:
                    max_djhat = max(max_djhat,
                                    d_jhat_direct(S, x, s1, s2).max_abs())
        gate = 10.0 * ctx.tol
        if max_nabla < gate:
            residual = max_djhat
        elif max_djhat < gate:
            residual = max_nabla
        else:
            residual = 0.0
        out.append(ctx.record(
            "generalized.closed_iff_parallel", name, len(d_pts), residual,
            note=f"||nabla J|| = {max_nabla:.3e}, "
                 f"||dJhat|| = {max_djhat:.3e}"))

        cond_pts = pts[:min(len(pts), 4)]
        dirs = _directions(ctx, n, 2, offset=2)
        max_cond, max_lap_hat = 0.0, 0.0
        for x in cond_pts:
            for X in dirs:
                max_cond = max(max_cond, *harmonicity_conditions(S, x, X))
            for s in secs[:1]:
                max_lap_hat = max(max_lap_hat,
                                  laplace_jhat_closed(S, x, s).max_abs())
        if max_cond < gate:
            residual = max_lap_hat
        elif max_lap_hat < gate:
            residual = max_cond
        else:
            residual = 0.0
        out.append(ctx.record(
            "generalized.harmonicity_split", name, len(cond_pts), residual,
            note=f"max condition residual = {max_cond:.3e}, "
                 f"||Delta Jhat|| = {max_lap_hat:.3e}"))

        sigs = sorted({g_hat_signature(S, x) for x in pts[:10]})
        out.append(ctx.record(
            "generalized.pairing_signature", name, min(len(pts), 10), 0.0,
            note="observed (plus, minus) eigenvalue counts: "
                 + ", ".join(f"(+{a}, -{b})" for a, b in sigs)))
    return out


# ---------------------------------------------------------------------------
# maps suite
# ---------------------------------------------------------------------------

def _suite_maps(ctx: RunContext) -> list[IdentityRecord]:
    out = []
    if not ctx.manifest.maps:
        out.append(ctx.skip("maps.declared", "-",
                            "no map blocks in manifest"))
        return out
    for name, Phi in ctx.manifest.maps.items():
        ms = min(ctx.samples, 25)
        iso = check_isometry(Phi, samples=ms, seed=ctx.seed)
        out.append(ctx.record("maps.isometry", name, iso.samples_used,
                              iso.max_residual))
        met = check_metallic_map(Phi, samples=ms, seed=ctx.seed)
        out.append(ctx.record("maps.metallic_commutation", name,
                              met.samples_used, met.max_residual))

        kept, _ = _sample_in_image(Phi, ms, ctx.seed)
        worst = 0.0
        for x in kept:
            worst = max(worst, float(np.max(np.abs(
                tension(Phi, x) - tension_frame(Phi, x)))))
        out.append(ctx.record("maps.tension_paths", name, len(kept), worst))

        if iso.max_residual < 10.0 * ctx.tol:
            worst = max((float(np.max(np.abs(tension(Phi, x))))
                         for x in kept), default=0.0)
            out.append(ctx.record("maps.harmonicity", name, len(kept),
                                  worst))
        else:
            out.append(ctx.skip(
                "maps.harmonicity", name,
                f"map is not an isometry (max residual "
                f"{iso.max_residual:.3e})"))

        anchors = kept[:min(len(kept), 6)]

        def conditional(ident: str, fn, points, note=None):
            worst = 0.0
            try:
                for x in points:
                    worst = max(worst, fn(x))
            except (PreconditionError, DiscriminantSignError,
                    RequiresRiemannianError, SingularJacobianError) as exc:
                out.append(ctx.skip(ident, name, str(exc)))
                return
            out.append(ctx.record(ident, name, len(points), worst,
                                  note=note))

        conditional("maps.isometry_identity",
                    lambda x: isometry_identity_residual(Phi, x), anchors)

        try:
            probe = corollary_transfer_probe(Phi, samples=min(ms, 10),
                                             seed=ctx.seed, tol=ctx.tol)
            if probe.hypothesis_holds:
                out.append(ctx.record(
                    "maps.codiff_transfer", name, probe.samples_used,
                    probe.max_conclusion_residual,
                    note=f"hypothesis residual = "
                         f"{probe.max_hypothesis_residual:.3e}"))
            else:
                out.append(ctx.skip(
                    "maps.codiff_transfer", name,
                    f"transfer hypothesis does not hold (residual "
                    f"{probe.max_hypothesis_residual:.3e}); the conclusion "
                    f"is only asserted under it"))
        except (PreconditionError, DiscriminantSignError,
                RequiresRiemannianError) as exc:
            out.append(ctx.skip("maps.codiff_transfer", name, str(exc)))

        lift_secs = _sections(ctx, Phi.source.dim, 2, offset=5)

        def commute_residual(x):
            return max(jhat_commutation_residual(Phi, x, s)
                       for s in lift_secs)

        conditional("maps.lift_commutes", commute_residual, anchors)

        heavy = anchors[:min(len(anchors), 3)]
        records: list = []

        def split_residual(x):
            rec = tension_hat_decomposition(Phi, x)
            records.append(rec)
            return rec.residual

        conditional("maps.lift_tension_split", split_residual, heavy)

        conditional("maps.lift_tension_endo",
                    lambda x: jhat_tension_identity_residual(Phi, x), heavy)

        if records:
            max_tau = max(r.tau_norm for r in records)
            max_aj = max(r.aj_norm for r in records)
            max_hat = max(r.tau_hat.max_abs() for r in records)
            gate = 10.0 * ctx.tol
            if max(max_tau, max_aj) < gate:
                residual = max_hat
            elif max_hat < gate:
                residual = max(max_tau, max_aj)
            else:
                residual = 0.0
            out.append(ctx.record(
                "maps.lift_harmonicity", name, len(records), residual,
                note=f"||tau|| = {max_tau:.3e}, ||A_J|| = {max_aj:.3e}, "
                     f"||tau(Phihat)|| = {max_hat:.3e}"))
        else:
            out.append(ctx.skip(
                "maps.lift_harmonicity", name,
                "lifted tension not available on this map "
                "(see maps.lift_tension_split)"))
    return out


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

SUITES = {
    "algebraic": _suite_algebraic,
    "frame_lemmas": _suite_frame_lemmas,
    "weitzenbock": _suite_weitzenbock,
    "generalized": _suite_generalized,
    "maps": _suite_maps,
}


def run_suites(manifest: Manifest, suites=None, samples: int | None = None,
               seed: int | None = None,
               tol: float | None = None) -> VerificationReport:
    """Run the requested suites over every structure and map of the manifest.

    Arguments override the manifest's own verify block; identities whose
    hypotheses a fixture does not satisfy produce skipped records, never
    exceptions.  Deterministic for fixed (manifest, suites, samples, seed,
    tol) up to the wall-time metadata field.
    """
    cfg = manifest.verify
    wanted = tuple(suites) if suites else cfg.suites
    unknown = [s for s in wanted if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; "
                         f"known: {list(KNOWN_SUITES)}")
    ctx = RunContext(manifest=manifest,
                     samples=samples if samples is not None else cfg.samples,
                     seed=seed if seed is not None else cfg.seed,
                     tol=tol if tol is not None else cfg.tol)
    t0 = time.perf_counter()
    records: list[IdentityRecord] = []
    for suite_name in KNOWN_SUITES:
        if suite_name in wanted:
            records.extend(SUITES[suite_name](ctx))
    wall = time.perf_counter() - t0
    report = VerificationReport(records=records)
    report.meta = {
        "manifest": manifest.path,
        "suites": list(s for s in KNOWN_SUITES if s in wanted),
        "samples": ctx.samples,
        "seed": ctx.seed,
        "tol": ctx.tol,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "metallicgeo": __version__,
        },
        "wallTimeSeconds": round(wall, 3),
    }
    return report
