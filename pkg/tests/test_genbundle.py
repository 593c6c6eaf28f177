"""Generalized tangent bundle TM + T*M: the pairing ghat, the endomorphism
Jhat, the xi frame, and the closed-form vs mechanical dual paths for
d Jhat, delta Jhat, their compositions and the Laplacian."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metallicgeo.errors import DiscriminantSignError, RequiresRiemannianError
from metallicgeo.genbundle import (GeneralizedSection, d_jhat_closed,
                                   d_jhat_direct, ddelta_jhat_closed,
                                   ddelta_jhat_direct, delta_jhat_closed,
                                   delta_jhat_direct, deltad_jhat_closed,
                                   deltad_jhat_direct, g_hat, g_hat_forms,
                                   g_hat_gram, g_hat_signature,
                                   harmonicity_conditions, j_hat,
                                   j_hat_matrix_at, laplace_jhat_closed,
                                   laplace_jhat_direct,
                                   laplace_jhat_sum_literal, laplace_jstar,
                                   jstar_weitzenbock_rhs, nabla_hat,
                                   xi_frame, xi_gram_constant,
                                   _curv_term_vec, _nablaJ_nablaXE_term)
from metallicgeo.hodge import _J_form, weitzenbock_S
from metallicgeo.manifold import chart
from metallicgeo.metallic import MetallicStructure

from conftest import golden_plane, jmat

XI_CONSTANT_D5 = (np.sqrt(5.0) + 1.0) / (2.0 * np.sqrt(5.0))


def sections_at(S, seed, count=3):
    rng = np.random.default_rng(seed)
    n = S.manifold.dim
    return [GeneralizedSection(rng.standard_normal(n), rng.standard_normal(n))
            for _ in range(count)]


# ---------------------------------------------------------------------------
# sections, pairing, endomorphism
# ---------------------------------------------------------------------------

def test_generalized_section_round_trip():
    s = GeneralizedSection(np.array([1.0, 2.0]), np.array([-3.0, 0.5]))
    arr = s.as_array()
    np.testing.assert_array_equal(arr, [1.0, 2.0, -3.0, 0.5])
    t = GeneralizedSection.from_array(arr)
    np.testing.assert_array_equal(t.vec, s.vec)
    np.testing.assert_array_equal(t.cov, s.cov)
    assert s.max_abs() == 3.0


def test_ghat_two_displayed_forms_agree(flat_golden, sphere_product, twisted,
                                        curved_golden):
    for S in (flat_golden, sphere_product, twisted, curved_golden):
        for x in S.manifold.sample_points(6, seed=1):
            s1, s2, s3 = sections_at(S, seed=5)
            a, b = g_hat_forms(S, x, s1, s2)
            assert abs(a - b) < 1e-12
            assert abs(g_hat(S, x, s1, s2) - a) < 1e-12
            # bilinear symmetry
            assert abs(g_hat(S, x, s1, s2) - g_hat(S, x, s2, s1)) < 1e-12
            # matches the coordinate Gram matrix
            G = g_hat_gram(S, x)
            assert abs(s1.as_array() @ G @ s3.as_array()
                       - g_hat(S, x, s1, s3)) < 1e-12


def test_ghat_signature_is_split_balanced(flat_golden, sphere_product,
                                          twisted, curved_golden):
    """Eigenvalue sign counts of the ghat Gram (diagnostic): positive
    definite on every bundled Riemannian fixture."""
    for S in (flat_golden, twisted, curved_golden):
        x = S.manifold.sample_points(1, seed=2)[0]
        assert g_hat_signature(S, x) == (4, 0)
    x = sphere_product.manifold.sample_points(1, seed=2)[0]
    assert g_hat_signature(sphere_product, x) == (8, 0)


def test_jhat_is_metallic_and_ghat_symmetric(flat_golden, sphere_product,
                                             twisted, curved_golden):
    for S in (flat_golden, sphere_product, twisted, curved_golden):
        n2 = 2 * S.manifold.dim
        for x in S.manifold.sample_points(5, seed=3):
            Jh = j_hat_matrix_at(S, x)
            poly = Jh @ Jh - S.p * Jh - S.q * np.eye(n2)
            assert float(np.max(np.abs(poly))) < 1e-12
            G = g_hat_gram(S, x)
            assert float(np.max(np.abs(G @ Jh - Jh.T @ G))) < 1e-12


def test_jhat_application_matches_matrix(twisted):
    x = np.array([0.4, 0.1])
    (s,) = sections_at(twisted, seed=7, count=1)
    out = j_hat(twisted, x, s)
    np.testing.assert_allclose(out.as_array(),
                               j_hat_matrix_at(twisted, x) @ s.as_array(),
                               atol=1e-14)


def test_nabla_hat_kills_constant_sections_on_flat(flat_golden):
    x = np.array([0.3, -0.2])
    s1 = GeneralizedSection(np.array([1.0, 2.0]), np.array([0.5, -1.0]))
    s2 = GeneralizedSection(np.array([0.7, 0.7]), np.array([1.0, 0.0]))
    out = nabla_hat(flat_golden, x, s1, s2)
    assert out.max_abs() < 1e-14


# ---------------------------------------------------------------------------
# the xi frame
# ---------------------------------------------------------------------------

def test_xi_gram_is_the_predicted_constant(flat_golden, sphere_product,
                                           twisted, curved_golden):
    """ghat(xi_i, xi_j) = ((sqrt(D)+1)/(2 sqrt(D))) delta_ij: a constant
    that is NOT 1, so the literal frame is orthogonal but not orthonormal;
    the rescaled frame is exactly ghat-orthonormal."""
    assert xi_gram_constant(flat_golden) == pytest.approx(
        0.7236067977499789, abs=1e-15)
    for S in (flat_golden, sphere_product, twisted, curved_golden):
        n = S.manifold.dim
        c = xi_gram_constant(S)
        assert c == pytest.approx(XI_CONSTANT_D5, abs=1e-15)
        for x in S.manifold.sample_points(4, seed=4):
            for rot in (None, 3, 19):
                fr = xi_frame(S, x, rotation_seed=rot)
                np.testing.assert_allclose(fr.gram, c * np.eye(n),
                                           atol=1e-10)
                np.testing.assert_allclose(fr.normalized_gram, np.eye(n),
                                           atol=1e-10)


def test_xi_frame_guards(norden):
    with pytest.raises(RequiresRiemannianError):
        xi_frame(norden, np.array([0.1, 0.1]))


def test_zero_discriminant_rejected():
    M = chart("flat-unit", ["x", "y"], [(-1.0, 1.0), (-1.0, 1.0)],
              [["1", "0"], ["0", "1"]])
    J = jmat(M, [["1", "0"], ["0", "1"]])
    S = MetallicStructure(manifold=M, J=J, p=2.0, q=-1.0, name="degenerate")
    assert S.discriminant == 0.0
    with pytest.raises(DiscriminantSignError):
        xi_frame(S, np.array([0.0, 0.0]))
    with pytest.raises(DiscriminantSignError):
        g_hat_gram(S, np.array([0.0, 0.0]))


# ---------------------------------------------------------------------------
# dual paths: closed-form vs mechanical block calculus
# ---------------------------------------------------------------------------

def all_riemannian(flat_golden, sphere_product, twisted, curved_golden):
    return (flat_golden, sphere_product, twisted, curved_golden)


def test_d_jhat_paths_agree(flat_golden, sphere_product, twisted,
                            curved_golden):
    for S in all_riemannian(flat_golden, sphere_product, twisted,
                            curved_golden):
        for x in S.manifold.sample_points(5, seed=6):
            s1, s2, _ = sections_at(S, seed=8)
            a = d_jhat_direct(S, x, s1, s2)
            b = d_jhat_closed(S, x, s1, s2)
            assert float(np.max(np.abs(a.as_array() - b.as_array()))) < 1e-9
            # antisymmetry
            c = d_jhat_direct(S, x, s2, s1)
            assert float(np.max(np.abs(a.as_array() + c.as_array()))) < 1e-12


def test_delta_jhat_paths_agree_and_are_frame_invariant(
        flat_golden, sphere_product, twisted, curved_golden):
    for S in all_riemannian(flat_golden, sphere_product, twisted,
                            curved_golden):
        for x in S.manifold.sample_points(4, seed=9):
            closed = delta_jhat_closed(S, x).as_array()
            for rot in (None, 5, 17):
                direct = delta_jhat_direct(S, x, rotation_seed=rot).as_array()
                assert float(np.max(np.abs(closed - direct))) < 1e-9


def test_second_order_paths_agree(flat_golden, sphere_product, twisted,
                                  curved_golden):
    for S in all_riemannian(flat_golden, sphere_product, twisted,
                            curved_golden):
        for x in S.manifold.sample_points(3, seed=10):
            (s,) = sections_at(S, seed=11, count=1)
            for direct, closed in ((ddelta_jhat_direct, ddelta_jhat_closed),
                                   (deltad_jhat_direct, deltad_jhat_closed)):
                a = direct(S, x, s).as_array()
                b = closed(S, x, s).as_array()
                assert float(np.max(np.abs(a - b))) < 1e-7


def test_laplace_jhat_direct_is_dd_plus_dd(sphere_product, twisted):
    for S in (sphere_product, twisted):
        x = S.manifold.sample_points(1, seed=12)[0]
        (s,) = sections_at(S, seed=13, count=1)
        lap = laplace_jhat_direct(S, x, s).as_array()
        split = (ddelta_jhat_direct(S, x, s).as_array()
                 + deltad_jhat_direct(S, x, s).as_array())
        np.testing.assert_allclose(lap, split, atol=1e-12)


# ---------------------------------------------------------------------------
# harmonic fixtures: everything vanishes
# ---------------------------------------------------------------------------

def test_harmonic_fixtures_have_vanishing_jhat_operators(flat_golden,
                                                         sphere_product):
    for S in (flat_golden, sphere_product):
        for x in S.manifold.sample_points(4, seed=14):
            s1, s2, _ = sections_at(S, seed=15)
            assert d_jhat_closed(S, x, s1, s2).max_abs() < 1e-10
            assert delta_jhat_closed(S, x).max_abs() < 1e-10
            assert laplace_jhat_closed(S, x, s1).max_abs() < 1e-8
            r1, r2, r3 = harmonicity_conditions(S, x, s1.vec)
            assert max(r1, r2, r3) < 1e-8


def test_twisted_jhat_operators_do_not_vanish(twisted):
    x = np.array([0.4, 0.1])
    s1, s2, _ = sections_at(twisted, seed=16)
    assert d_jhat_closed(twisted, x, s1, s2).max_abs() > 0.1
    assert delta_jhat_closed(twisted, x).max_abs() > 0.1


# ---------------------------------------------------------------------------
# the curvature-gap witnesses on the curved harmonic probe
# ---------------------------------------------------------------------------

def test_jstar_laplacian_gap_is_twice_curvature_term(curved_golden):
    """Delta J* alpha = -(nabla^2 J*) alpha + flat S(sharp alpha); the
    variant with -flat S misses by exactly 2 flat S(sharp alpha)."""
    S = curved_golden
    x = np.array([1.1, 0.8])
    for alpha in (np.array([0.3, 1.2]), np.array([-0.7, 0.2])):
        flat_S = S.manifold.metric_at(x) @ weitzenbock_S(
            _J_form(S), x, S.manifold.inverse_metric_at(x) @ alpha)
        assert float(np.max(np.abs(flat_S))) > 0.1
        lhs = laplace_jstar(S, x, alpha)
        rhs_minus = jstar_weitzenbock_rhs(S, x, alpha)
        np.testing.assert_allclose(lhs - rhs_minus, 2.0 * flat_S, atol=1e-12)
        # corrected sign closes the identity
        np.testing.assert_allclose(lhs, rhs_minus + 2.0 * flat_S, atol=1e-12)


def test_laplace_jhat_closed_vs_direct_gap_is_half_flat_S(curved_golden):
    """The component formula for Delta Jhat differs from the mechanical
    (d delta + delta d) Jhat by exactly (0, -1/2 flat S(sharp alpha)) on a
    curved chart; on the flat/harmonic fixtures S(J) = 0 and they agree."""
    S = curved_golden
    x = np.array([1.1, 0.8])
    s = GeneralizedSection(np.array([0.7, -0.4]), np.array([0.3, 1.2]))
    flat_S = S.manifold.metric_at(x) @ weitzenbock_S(
        _J_form(S), x, S.manifold.inverse_metric_at(x) @ s.cov)
    c = laplace_jhat_closed(S, x, s)
    d = laplace_jhat_direct(S, x, s)
    np.testing.assert_allclose(c.vec - d.vec, np.zeros(2), atol=1e-12)
    np.testing.assert_allclose(c.cov - d.cov, -0.5 * flat_S, atol=1e-12)


def test_literal_normal_frame_sum_matches_tensorial_reduction(curved_golden):
    """The frame sum evaluated with a literally constructed first-order
    normal frame agrees with its frame-free tensorial reduction."""
    S = curved_golden
    x = np.array([1.1, 0.8])
    X = np.array([0.7, -0.4])
    alpha = np.array([0.3, 1.2])
    sharp_a = S.manifold.inverse_metric_at(x) @ alpha
    lit = laplace_jhat_sum_literal(S, x, X, alpha)
    red = (_curv_term_vec(S, x, X)
           - weitzenbock_S(_J_form(S), x, sharp_a)
           + _nablaJ_nablaXE_term(S, x, X))
    assert float(np.max(np.abs(lit))) > 0.1
    np.testing.assert_allclose(lit, red, atol=1e-12)


def test_harmonicity_conditions_active_on_curved_probe(curved_golden):
    r1, r2, r3 = harmonicity_conditions(curved_golden, np.array([1.1, 0.8]),
                                        np.array([0.7, -0.4]))
    assert r1 > 1.0 and r2 > 1.0 and r3 > 1.0


# ---------------------------------------------------------------------------
# guards and properties
# ---------------------------------------------------------------------------

def test_second_order_operators_require_riemannian(norden):
    x = np.array([0.1, 0.1])
    s = GeneralizedSection(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    for fn in (delta_jhat_closed,):
        with pytest.raises(RequiresRiemannianError):
            fn(norden, x)
    for fn in (ddelta_jhat_closed, deltad_jhat_closed, laplace_jhat_closed):
        with pytest.raises(RequiresRiemannianError):
            fn(norden, x, s)


_PROP_STRUCTURE = golden_plane(name="prop-plane")


@settings(max_examples=20, deadline=None)
@given(vx=st.floats(-2, 2), vy=st.floats(-2, 2),
       cx=st.floats(-2, 2), cy=st.floats(-2, 2))
def test_jhat_polynomial_property_on_arbitrary_sections(vx, vy, cx, cy):
    """Jhat^2 s = p Jhat s + q s for every generalized section."""
    S = _PROP_STRUCTURE
    x = np.array([0.2, -0.3])
    s = GeneralizedSection(np.array([vx, vy]), np.array([cx, cy]))
    once = j_hat(S, x, s)
    twice = j_hat(S, x, once)
    resid = twice.as_array() - S.p * once.as_array() - S.q * s.as_array()
    assert float(np.max(np.abs(resid))) < 1e-12
