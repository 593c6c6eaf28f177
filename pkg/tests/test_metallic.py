"""Structure-level oracles: the metallic quadratic, associated structures,
the Nijenhuis tensor and its covariant-derivative expansion, parameter
triviality, and the locally-metallic predicate."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metallicgeo.errors import DiscriminantSignError
from metallicgeo.expr import const
from metallicgeo.manifold import chart
from metallicgeo.metallic import MetallicStructure, triviality_check
from metallicgeo.tensors import eval_tensor_at

from conftest import PHI, golden_plane, jmat


# ---------------------------------------------------------------------------
# the quadratic and symmetry invariants
# ---------------------------------------------------------------------------

def test_flat_golden_is_metallic(flat_golden):
    rep = flat_golden.check(samples=100)
    assert rep.polynomial_residual < 1e-14
    assert rep.symmetry_residual < 1e-14
    assert rep.ok
    assert rep.is_product_type and not rep.is_norden_type
    assert rep.discriminant == pytest.approx(5.0)


def test_twisted_golden_is_metallic(twisted):
    rep = twisted.check(samples=100)
    assert rep.polynomial_residual < 1e-13
    assert rep.symmetry_residual < 1e-13


def test_sphere_product_is_metallic(sphere_product):
    rep = sphere_product.check(samples=60)
    assert rep.ok


def test_norden_is_metallic_with_negative_discriminant(norden):
    rep = norden.check(samples=100)
    assert rep.ok
    assert rep.discriminant == pytest.approx(-4.0)
    assert rep.is_norden_type and not rep.is_product_type


def test_diag_1_2_fails_the_quadratic_with_residual_one():
    M = chart("plane", ["x", "y"], [(-2, 2), (-2, 2)],
              [["1", "0"], ["0", "1"]])
    S = MetallicStructure(manifold=M, p=1.0, q=1.0,
                          J=jmat(M, [["1", "0"], ["0", "2"]]), name="bad")
    rep = S.check(samples=50)
    # 2^2 - 2 - 1 = 1 in the (2,2) slot at every point
    assert rep.polynomial_residual == pytest.approx(1.0, abs=1e-14)
    assert not rep.ok


def test_metallic_number_is_the_larger_root(flat_golden):
    assert flat_golden.metallic_number == pytest.approx(PHI)


# ---------------------------------------------------------------------------
# associated structures
# ---------------------------------------------------------------------------

def test_product_structure_of_flat_golden_is_diag_1_minus_1(flat_golden):
    x = np.array([0.3, -0.7])
    Jp = eval_tensor_at(flat_golden.associated_structure("product"),
                        flat_golden.manifold.binding(x))
    np.testing.assert_allclose(Jp, np.diag([1.0, -1.0]), atol=1e-14)
    np.testing.assert_allclose(Jp @ Jp, np.eye(2), atol=1e-14)


def test_tilde_is_minus_the_product_structure(flat_golden):
    x = np.array([-1.1, 0.4])
    b = flat_golden.manifold.binding(x)
    Jp = eval_tensor_at(flat_golden.associated_structure("product"), b)
    Jt = flat_golden.tilde_at(x)
    np.testing.assert_allclose(Jt, -Jp, atol=1e-14)


def test_norden_complex_structure_squares_to_minus_identity(norden):
    x = np.array([0.2, 0.5])
    Jc = eval_tensor_at(norden.associated_structure("norden"),
                        norden.manifold.binding(x))
    np.testing.assert_allclose(Jc @ Jc, -np.eye(2), atol=1e-14)
    # with p=0, q=-1 the structure is already complex: J_c = J
    np.testing.assert_allclose(Jc, norden.J_at(x), atol=1e-14)


@pytest.mark.parametrize("which", ["flat", "norden"])
def test_tilde_squares_to_sign_of_discriminant(which, flat_golden, norden):
    S = flat_golden if which == "flat" else norden
    x = np.array([0.15, -0.25])
    Jt = S.tilde_at(x)
    sign = 1.0 if S.discriminant > 0 else -1.0
    np.testing.assert_allclose(Jt @ Jt, sign * np.eye(2), atol=1e-13)


def test_degenerate_discriminant_raises():
    M = chart("plane", ["x", "y"], [(-1, 1), (-1, 1)],
              [["1", "0"], ["0", "1"]])
    # p=2, q=-1 gives p^2+4q = 0
    S = MetallicStructure(manifold=M, p=2.0, q=-1.0,
                          J=jmat(M, [["1", "0"], ["0", "1"]]), name="deg")
    with pytest.raises(DiscriminantSignError):
        S.associated_structure("tilde")
    with pytest.raises(DiscriminantSignError):
        S.metallic_number
    with pytest.raises(DiscriminantSignError):
        norden_of = golden_plane()
        norden_of.associated_structure("norden")   # D = 5 > 0


# ---------------------------------------------------------------------------
# Nijenhuis tensor
# ---------------------------------------------------------------------------

def test_nijenhuis_vanishes_for_constant_J(flat_golden):
    x = np.array([0.4, 0.9])
    X = np.array([1.0, 2.0])
    Y = np.array([-0.5, 1.5])
    np.testing.assert_allclose(flat_golden.nijenhuis(x, X, Y),
                               np.zeros(2), atol=1e-14)


def test_nijenhuis_is_antisymmetric(twisted):
    x = np.array([0.35, -0.8])
    X = np.array([0.9, -1.2])
    Y = np.array([0.3, 0.7])
    np.testing.assert_allclose(twisted.nijenhuis(x, X, Y),
                               -twisted.nijenhuis(x, Y, X), atol=1e-13)


def test_nijenhuis_lemma_on_twisted(twisted):
    """(dJ)(JX,Y) + (dJ)(X,JY) - p (dJ)(X,Y) = N_J(X,Y): bracket-based and
    covariant-derivative computations agree."""
    rng = np.random.default_rng(8)
    for x in twisted.manifold.sample_points(10, seed=5):
        X, Y = rng.standard_normal(2), rng.standard_normal(2)
        assert twisted.lemma_nijenhuis_residual(x, X, Y) < 1e-12


def four_dim_projector_structure():
    """Flat R^4 golden structure from the orthogonal projector onto
    span{e1, e2 + x e3}: metallic, g-symmetric, but NOT integrable."""
    M = chart("r4", ["x", "y", "z", "w"], [(-1.5, 1.5)] * 4,
              [["1", "0", "0", "0"], ["0", "1", "0", "0"],
               ["0", "0", "1", "0"], ["0", "0", "0", "1"]])
    rows = [
        ["phi", "0", "0", "0"],
        ["0", "1 - phi + (2*phi - 1)/(1 + x^2)",
         "(2*phi - 1)*x/(1 + x^2)", "0"],
        ["0", "(2*phi - 1)*x/(1 + x^2)",
         "1 - phi + (2*phi - 1)*x^2/(1 + x^2)", "0"],
        ["0", "0", "0", "1 - phi"],
    ]
    return MetallicStructure(manifold=M, p=1.0, q=1.0, J=jmat(M, rows),
                             name="projector4")


def test_nonintegrable_four_dim_structure_oracle():
    S = four_dim_projector_structure()
    assert S.check(samples=60).ok
    x = np.array([0.7, -0.3, 0.5, 0.2])
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0, 0.0])
    N = S.nijenhuis(x, e1, e2)
    # frozen oracle: nonzero torsion in the (y, z) components only
    np.testing.assert_allclose(N, [0.0, -1.57650556, 2.25215080, 0.0],
                               atol=1e-7)
    assert S.lemma_nijenhuis_residual(x, e1, e2) < 1e-12
    rng = np.random.default_rng(3)
    for _ in range(5):
        X, Y = rng.standard_normal(4), rng.standard_normal(4)
        assert S.lemma_nijenhuis_residual(x, X, Y) < 1e-12
    assert not S.is_locally_metallic(samples=20)


# ---------------------------------------------------------------------------
# triviality of double parameter pairs
# ---------------------------------------------------------------------------

def test_triviality_equal_parameters_no_constraint(flat_golden):
    v = triviality_check(1.0, 1.0, 1.0, 1.0, flat_golden)
    assert v.verdict == "parameters equal, no constraint"
    assert v.residual == 0.0


def test_triviality_inconsistent_parameters(flat_golden):
    v = triviality_check(1.0, 1.0, 1.0, 2.0, flat_golden)
    assert v.verdict == "inconsistent parameters"
    assert v.residual == pytest.approx(1.0)


def test_triviality_scalar_structure_confirmed():
    M = chart("plane", ["x", "y"], [(-1, 1), (-1, 1)],
              [["1", "0"], ["0", "1"]])
    # J = 2I is (1, 2)-metallic and (3, -2)-metallic simultaneously
    S = MetallicStructure(manifold=M, p=1.0, q=2.0,
                          J=jmat(M, [["2", "0"], ["0", "2"]]), name="scalar")
    assert S.check(samples=20).ok
    v = triviality_check(1.0, 2.0, 3.0, -2.0, S)
    assert v.verdict == "trivial structure confirmed"
    assert v.scalar == pytest.approx(2.0)


def test_triviality_scalar_constraint_violated(flat_golden):
    v = triviality_check(1.0, 1.0, 0.0, 1.0, flat_golden)
    assert v.verdict == "scalar constraint violated"
    assert v.residual > 0.5


# ---------------------------------------------------------------------------
# parallelism
# ---------------------------------------------------------------------------

def test_locally_metallic_flags(flat_golden, sphere_product, twisted):
    assert flat_golden.is_locally_metallic(samples=20)
    assert sphere_product.is_locally_metallic(samples=10)
    assert not twisted.is_locally_metallic(samples=20)


def test_twisted_nabla_J_witness(twisted):
    """The twisted structure is genuinely non-parallel: frozen magnitude."""
    worst = max(twisted.nabla_J_max_at(x)
                for x in twisted.manifold.sample_points(50, seed=1))
    assert worst > 1e-3          # therefore not locally metallic
    assert worst == pytest.approx(2.2360679, abs=2e-3)   # ~ sqrt(5) * max|..|


def test_nabla_antisymmetry_zero_for_parallel(flat_golden, twisted):
    x = np.array([0.5, 0.5])
    assert flat_golden.nabla_antisymmetry_residual_at(x) < 1e-14
    assert twisted.nabla_antisymmetry_residual_at(np.array([0.4, 0.1])) > 0.1


# ---------------------------------------------------------------------------
# property tests: conjugated spectral models are metallic
# ---------------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-3.0, 3.0),
       p=st.floats(-2.0, 2.0),
       q=st.floats(0.5, 3.0))
def test_rotated_spectral_model_is_metallic(theta, p, q):
    """R(theta) diag(sigma+, sigma-) R(theta)^T is (p, q)-metallic and
    symmetric for the Euclidean metric, for any rotation angle."""
    D = p * p + 4.0 * q
    sp = 0.5 * (p + math.sqrt(D))
    sm = 0.5 * (p - math.sqrt(D))
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    Jx = R @ np.diag([sp, sm]) @ R.T
    M = chart("plane", ["x", "y"], [(-1, 1), (-1, 1)],
              [["1", "0"], ["0", "1"]])
    J = np.array([[const(float(v)) for v in row] for row in Jx],
                 dtype=object)
    S = MetallicStructure(manifold=M, p=p, q=q, J=J, name="prop")
    rep = S.check(samples=10)
    assert rep.polynomial_residual < 1e-10
    assert rep.symmetry_residual < 1e-10


@settings(max_examples=20, deadline=None)
@given(x0=st.floats(-1.1, 1.1), y0=st.floats(-1.1, 1.1))
def test_twisted_quadratic_holds_at_arbitrary_points(x0, y0):
    S = golden_plane()
    # rebuild the twisted field here to keep the property self-contained
    M = chart("tw", ["x", "y"], [(-1.2, 1.2), (-1.2, 1.2)],
              [["1", "0"], ["0", "1"]])
    rows = [["phi*cos(x)^2 + (1 - phi)*sin(x)^2",
             "(2*phi - 1)*sin(x)*cos(x)"],
            ["(2*phi - 1)*sin(x)*cos(x)",
             "phi*sin(x)^2 + (1 - phi)*cos(x)^2"]]
    T = MetallicStructure(manifold=M, p=1.0, q=1.0, J=jmat(M, rows),
                          name="tw")
    x = np.array([x0, y0])
    assert T.polynomial_residual_at(x) < 1e-12
    assert S.polynomial_residual_at(x) < 1e-14
