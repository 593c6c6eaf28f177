"""Shared fixtures: bundled manifests plus hand-built probe structures.

Session scope matters here: several structures carry cached symbolic builds
(curvature, Laplacians, block-connection tensors) that are expensive to
recompute per test.
"""

import math

import numpy as np
import pytest

from metallicgeo.expr import parse
from metallicgeo.fixtures import load_fixture
from metallicgeo.manifold import chart
from metallicgeo.maps import smooth_map
from metallicgeo.metallic import MetallicStructure

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def jmat(M, rows):
    return np.array([[parse(s, M.coords) for s in row] for row in rows],
                    dtype=object)


def golden_plane(name="plane", box=((-2.0, 2.0), (-2.0, 2.0))):
    M = chart(name, ["x", "y"], box, [["1", "0"], ["0", "1"]])
    return MetallicStructure(
        manifold=M, p=1.0, q=1.0,
        J=jmat(M, [["phi", "0"], ["0", "1 - phi"]]), name=name)


@pytest.fixture(scope="session")
def f1_manifest():
    return load_fixture("f1_flat_golden")


@pytest.fixture(scope="session")
def f2_manifest():
    return load_fixture("f2_sphere_product")


@pytest.fixture(scope="session")
def f3_manifest():
    return load_fixture("f3_twisted_golden")


@pytest.fixture(scope="session")
def f4_manifest():
    return load_fixture("f4_norden_neutral")


@pytest.fixture(scope="session")
def flat_golden(f1_manifest):
    """F1: flat plane, constant diagonal golden J.  Everything vanishes."""
    return f1_manifest.structures["flat-golden"]


@pytest.fixture(scope="session")
def sphere_product(f2_manifest):
    """F2: S2(1) x S2(2) with block-constant golden J.

    Curved, locally metallic (nabla J = 0), harmonic; scal = 5/2.
    """
    return f2_manifest.structures["sphere-golden"]


@pytest.fixture(scope="session")
def twisted(f3_manifest):
    """F3: flat plane, x-rotated golden J.  nabla J != 0, Delta J != 0."""
    return f3_manifest.structures["twisted-golden"]


@pytest.fixture(scope="session")
def norden(f4_manifest):
    """F4: neutral-signature plane with J^2 = -I (p=0, q=-1)."""
    return f4_manifest.structures["norden-neutral"]


@pytest.fixture(scope="session")
def curved_golden():
    """Round 2-sphere with the constant diagonal golden J.

    The hard probe: curved AND non-parallel (nabla J != 0), with a nonzero
    curvature term S(J) — the only fixture here that separates the two sign
    conventions of the Weitzenboeck formula.
    """
    M = chart("curved", ["u", "v"], [(0.4, 2.7), (0.1, 6.1)],
              [["1", "0"], ["0", "sin(u)^2"]])
    return MetallicStructure(
        manifold=M, p=1.0, q=1.0,
        J=jmat(M, [["phi", "0"], ["0", "1 - phi"]]), name="curved-golden")


def twisted_entries(coord_expr: str):
    """Entries of the x-rotated golden J evaluated on a coordinate
    expression, as expression strings."""
    u = coord_expr
    return [[f"phi*cos({u})^2 + (1 - phi)*sin({u})^2",
             f"(2*phi - 1)*sin({u})*cos({u})"],
            [f"(2*phi - 1)*sin({u})*cos({u})",
             f"phi*sin({u})^2 + (1 - phi)*cos({u})^2"]]


@pytest.fixture(scope="session")
def rotated_twisted_map():
    """A 0.6-radian rotation of the plane carrying the twisted golden J to
    its conjugated pushforward.  A genuine metallic isometry with
    delta J != 0 on both sides — the strongest two-sided test of the
    map-level identities."""
    src = chart("tw", ["x", "y"], [(-1.2, 1.2), (-1.2, 1.2)],
                [["1", "0"], ["0", "1"]])
    Stw = MetallicStructure(manifold=src, p=1.0, q=1.0,
                            J=jmat(src, twisted_entries("x")),
                            name="twisted")
    tgt = chart("tw_t", ["x", "y"], [(-2.1, 2.1), (-2.1, 2.1)],
                [["1", "0"], ["0", "1"]])
    rows = twisted_entries("(cos(0.6)*x + sin(0.6)*y)")
    J11, J12 = rows[0]
    J22 = rows[1][1]
    c, s = "cos(0.6)", "sin(0.6)"
    e11 = f"{c}^2*({J11}) - 2*{c}*{s}*({J12}) + {s}^2*({J22})"
    e12 = f"{c}*{s}*(({J11}) - ({J22})) + ({c}^2 - {s}^2)*({J12})"
    e22 = f"{s}^2*({J11}) + 2*{c}*{s}*({J12}) + {c}^2*({J22})"
    Sbar = MetallicStructure(manifold=tgt, p=1.0, q=1.0,
                             J=jmat(tgt, [[e11, e12], [e12, e22]]),
                             name="twisted-rotated")
    return smooth_map(Stw, Sbar,
                      [parse("cos(0.6)*x - sin(0.6)*y", src.coords),
                       parse("sin(0.6)*x + cos(0.6)*y", src.coords)],
                      name="rot-twisted")
