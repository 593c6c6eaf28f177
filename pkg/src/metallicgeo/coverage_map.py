"""Coverage table: every mathematical statement the engine is responsible
for, mapped to the identity ids that check it.

The keys are the canonical statements (one line each); the values are the
dotted identity ids emitted by the suites in :mod:`metallicgeo.suites`.
A statement with several ids is checked from several angles (for example a
closed formula and its equivalence corollary).  The meta-test in the test
suite asserts the table is total: every statement has at least one id, every
id exists, and every id actually appears in a bundled-fixture run.
"""

from __future__ import annotations

STATEMENT_COVERAGE: dict[str, tuple[str, ...]] = {
    # the structure itself
    "a metallic pseudo-Riemannian structure: a g-symmetric J with "
    "J^2 = p J + q I":
        ("algebraic.polynomial", "algebraic.symmetry"),
    "J is parallel (locally metallic) exactly when dJ = 0 and nabla J "
    "is antisymmetric":
        ("frame.parallel_equivalence",),

    # operators and harmonicity on tangent-bundle-valued forms
    "definitions of d, delta and the Laplacian Delta = d delta + delta d "
    "on tangent-bundle-valued forms (frame sums equal coordinate traces)":
        ("weitzenbock.frame_paths", "maps.tension_paths"),
    "a metallic structure is harmonic when Delta J = 0":
        ("weitzenbock.bochner_balance", "generalized.harmonicity_split"),

    # pointwise frame-trace identities and their consequences
    "first frame-trace identity: sum_i g((dJ)(X,E_i), E_i) "
    "= tr(nabla_X J) + g(X, delta J)":
        ("frame.trace_identity_1",),
    "second frame-trace identity: sum_i g((dJ)(X,E_i), J E_i) "
    "= p/2 tr(nabla_X J) + p g(X, delta J) - g(JX, delta J)":
        ("frame.trace_identity_2",),
    "closedness forces coclosedness: dJ = 0 implies delta J = 0 "
    "when p^2+4q != 0":
        ("frame.coclosed_from_closed",),
    "Nijenhuis expansion: (dJ)(JX,Y) + (dJ)(X,JY) - p (dJ)(X,Y) = N_J(X,Y)":
        ("frame.nijenhuis_quadratic",),
    "the almost product / almost complex structures associated with J: "
    "J_p^2 = I for p^2+4q > 0 and J_c^2 = -I for p^2+4q < 0":
        ("algebraic.product_structure", "algebraic.norden_structure"),

    # curvature formulas
    "Weitzenboeck formula for the Laplacian of a bundle-valued form":
        ("weitzenbock.displayed_formula", "weitzenbock.laplacian_pairing"),
    "Bochner-type curvature balance |nabla J|^2 against "
    "sum R(E_i,E_j,JE_i,JE_j), p tr(JQ) and q scal for harmonic J":
        ("weitzenbock.bochner_balance",),

    # maps between metallic manifolds
    "tension field tau(Phi) of a map between charts":
        ("maps.tension_paths", "maps.harmonicity"),
    "isometry identity: Jbar(tau) + Phi_*(delta J) - delta Jbar equals the "
    "connection-difference frame sum B, and the codifferential transfers "
    "along maps satisfying the frame-wise hypothesis":
        ("maps.isometry", "maps.metallic_commutation",
         "maps.isometry_identity", "maps.codiff_transfer"),
    "two distinct parameter pairs on one structure force J to be scalar":
        ("algebraic.second_parameter_defect",),

    # the generalized tangent bundle TM + T*M
    "the pairing ghat on TM + T*M (both displayed component forms)":
        ("generalized.pairing_forms", "generalized.pairing_symmetric",
         "generalized.pairing_signature"),
    "the lifted endomorphism Jhat is metallic and ghat-symmetric":
        ("generalized.endo_polynomial", "generalized.endo_symmetric"),
    "the lifted connection nablahat acting blockwise on sections":
        ("generalized.dcodiff_paths", "generalized.d_paths"),
    "the involution J~ = -(2J - pI)/sqrt(|p^2+4q|)":
        ("algebraic.tilde_involution", "algebraic.tilde_isometry"),
    "the sections xi_i = 1/2 (J~E_i + flat E_i) form a ghat-orthogonal "
    "frame with constant Gram multiple":
        ("generalized.xi_orthonormal",),
    "closed formula for dJhat":
        ("generalized.d_paths",),
    "closed formula for delta Jhat":
        ("generalized.codiff_paths",),
    "closed formula for 4 d delta Jhat":
        ("generalized.dcodiff_paths",),
    "closed formula for 4 delta d Jhat":
        ("generalized.codiffd_paths",),
    "Weitzenboeck-type formula for Delta J* on covectors":
        ("generalized.jstar_weitzenbock",),
    "closed formula for 4 Delta Jhat":
        ("generalized.laplacian_paths",),
    "dJhat = 0 exactly when J is parallel":
        ("generalized.closed_iff_parallel",),
    "Jhat is harmonic exactly when J is harmonic and the curvature "
    "conditions vanish":
        ("generalized.harmonicity_split",),

    # lifted maps
    "the lift Phihat(X + a) = Phi_* X + (Phi^*)^{-1} a commutes with the "
    "lifted structures for metallic maps":
        ("maps.lift_commutes",),
    "decomposition of tau(Phihat) into tau(Phi), flat(tau) and flat(A_J), "
    "and the harmonicity equivalence for Phihat":
        ("maps.lift_tension_split", "maps.lift_harmonicity"),
    "expansion of Jbarhat(tau(Phihat)) into delta-difference, frame-sum "
    "and flat terms":
        ("maps.lift_tension_endo",),
}


# bookkeeping records that do not check a mathematical statement
NON_STATEMENT_IDENTITIES: frozenset[str] = frozenset({"maps.declared"})


def covered_identities() -> frozenset[str]:
    return frozenset(i for ids in STATEMENT_COVERAGE.values() for i in ids)
