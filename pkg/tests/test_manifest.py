"""Manifest loading: the bundled fixture registry, the TOML schema,
the verify-block defaults, and every rejection path."""

import numpy as np
import pytest

from metallicgeo.errors import ManifestError
from metallicgeo.fixtures import fixture_path, list_fixtures, load_fixture
from metallicgeo.manifest import (KNOWN_SUITES, VerifyConfig, load_manifest)

BASE = """
schema = 1

[[manifold]]
name = "plane"
dim = 2
coords = ["x", "y"]
box = [[-2.0, 2.0], [-2.0, 2.0]]
metric = [["1", "0"], ["0", "1"]]

[[structure]]
name = "flat-golden"
host = "plane"
p = 1.0
q = 1.0
J = [["phi", "0"], ["0", "1 - phi"]]
"""


def write_manifest(tmp_path, text, name="m.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# bundled registry
# ---------------------------------------------------------------------------

def test_bundled_fixture_registry():
    names = list_fixtures()
    assert names == ["all_fixtures", "f1_flat_golden", "f2_sphere_product",
                     "f3_twisted_golden", "f4_norden_neutral",
                     "f5_rotation_isometry", "f6_torus_maps"]
    for name in names:
        assert fixture_path(name).exists()
    with pytest.raises(KeyError, match="no bundled fixture"):
        fixture_path("nope")


def test_every_bundled_fixture_loads():
    for name in list_fixtures():
        m = load_fixture(name)
        assert m.structures, name
        for S in m.structures.values():
            assert S.J_at(S.manifold.sample_points(1, seed=0)[0]).shape == \
                (S.manifold.dim, S.manifold.dim)


def test_f1_contents(f1_manifest):
    m = f1_manifest
    assert set(m.manifolds) == {"plane"}
    assert set(m.structures) == {"flat-golden"}
    assert "identity" in m.maps
    S = m.structures["flat-golden"]
    assert (S.p, S.q) == (1.0, 1.0)
    assert S.manifold.dim == 2
    assert m.verify.samples == 200
    assert m.verify.seed == 42
    assert m.verify.tol == 1e-8


def test_f4_is_neutral_signature(f4_manifest):
    S = next(iter(f4_manifest.structures.values()))
    assert not S.manifold.is_riemannian()


# ---------------------------------------------------------------------------
# happy path + verify overrides
# ---------------------------------------------------------------------------

def test_minimal_manifest_defaults(tmp_path):
    m = load_manifest(write_manifest(tmp_path, BASE))
    assert m.verify == VerifyConfig()
    assert m.verify.suites == KNOWN_SUITES
    assert m.verify.report is None
    assert m.verify.format == "text"
    assert m.maps == {}


def test_verify_block_overrides(tmp_path):
    text = BASE + """
[verify]
suites = ["algebraic"]
samples = 17
seed = 7
tol = 1e-6
report = "out.json"
format = "json"
"""
    m = load_manifest(write_manifest(tmp_path, text))
    assert m.verify.suites == ("algebraic",)
    assert m.verify.samples == 17
    assert m.verify.seed == 7
    assert m.verify.tol == 1e-6
    assert m.verify.report == "out.json"
    assert m.verify.format == "json"


def test_map_block_parses_components(tmp_path):
    text = BASE + """
[[map]]
name = "swap"
source = "flat-golden"
target = "flat-golden"
components = ["y", "x"]
"""
    m = load_manifest(write_manifest(tmp_path, text))
    Phi = m.maps["swap"]
    np.testing.assert_allclose(Phi.at(np.array([0.25, -0.75])),
                               [-0.75, 0.25])


# ---------------------------------------------------------------------------
# rejection paths
# ---------------------------------------------------------------------------

def check_rejected(tmp_path, text, match):
    with pytest.raises(ManifestError, match=match):
        load_manifest(write_manifest(tmp_path, text))


def test_missing_file():
    with pytest.raises(ManifestError, match="cannot read manifest"):
        load_manifest("/nonexistent/nowhere.toml")


def test_invalid_toml(tmp_path):
    check_rejected(tmp_path, "schema = [unclosed", match="m.toml")


def test_unsupported_schema(tmp_path):
    check_rejected(tmp_path, BASE.replace("schema = 1", "schema = 2"),
                   match="unsupported schema version 2")


def test_dim_coords_mismatch(tmp_path):
    check_rejected(tmp_path, BASE.replace('dim = 2', 'dim = 3'),
                   match="dim = 3 but 2 coords")


def test_bad_box_interval(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace("box = [[-2.0, 2.0], [-2.0, 2.0]]",
                     "box = [[2.0, -2.0], [-2.0, 2.0]]"),
        match="lo < hi")


def test_wrong_box_count(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace("box = [[-2.0, 2.0], [-2.0, 2.0]]",
                     "box = [[-2.0, 2.0]]"),
        match="box must hold 2")


def test_metric_shape_rejected(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace('metric = [["1", "0"], ["0", "1"]]',
                     'metric = [["1", "0", "0"], ["0", "1", "0"]]'),
        match="metric must be a 2x2 matrix")


def test_j_shape_rejected(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace('J = [["phi", "0"], ["0", "1 - phi"]]',
                     'J = [["phi", "0", "0"], ["0", "1 - phi", "0"], '
                     '["0", "0", "1"]]'),
        match="expected a 2x2 matrix")


def test_j_entry_parse_error_is_located(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace('"1 - phi"', '"1 - * phi"'),
        match=r"entry \[1\]\[1\]")


def test_metric_with_unknown_symbol_rejected(tmp_path):
    check_rejected(
        tmp_path,
        BASE.replace('metric = [["1", "0"], ["0", "1"]]',
                     'metric = [["1", "0"], ["0", "zeta"]]'),
        match="manifold block 0")


def test_unknown_host_rejected(tmp_path):
    check_rejected(tmp_path, BASE.replace('host = "plane"', 'host = "moon"'),
                   match="unknown manifold 'moon'")


def test_missing_required_key(tmp_path):
    check_rejected(tmp_path, BASE.replace('coords = ["x", "y"]\n', ''),
                   match="coords")


def test_map_unknown_structure(tmp_path):
    text = BASE + """
[[map]]
name = "bad"
source = "flat-golden"
target = "ghost"
components = ["x", "y"]
"""
    check_rejected(tmp_path, text, match="unknown structure 'ghost'")


def test_map_component_count(tmp_path):
    text = BASE + """
[[map]]
name = "short"
source = "flat-golden"
target = "flat-golden"
components = ["x"]
"""
    check_rejected(tmp_path, text, match="2 components required")


def test_map_component_parse_error(tmp_path):
    text = BASE + """
[[map]]
name = "bad-expr"
source = "flat-golden"
target = "flat-golden"
components = ["x", "y +"]
"""
    check_rejected(tmp_path, text, match="component 1")


def test_unknown_suite_rejected(tmp_path):
    text = BASE + """
[verify]
suites = ["algebraic", "cohomology"]
"""
    check_rejected(tmp_path, text, match="unknown suites")


def test_nonpositive_samples_rejected(tmp_path):
    text = BASE + "\n[verify]\nsamples = 0\n"
    check_rejected(tmp_path, text, match="samples must be positive")


def test_nonpositive_tol_rejected(tmp_path):
    text = BASE + "\n[verify]\ntol = -1e-8\n"
    check_rejected(tmp_path, text, match="tol must be positive")


def test_bad_format_rejected(tmp_path):
    text = BASE + '\n[verify]\nformat = "yaml"\n'
    check_rejected(tmp_path, text, match="format must be")


def test_duplicate_structure_name(tmp_path):
    dup = BASE + """
[[structure]]
name = "flat-golden"
host = "plane"
p = 1.0
q = 1.0
J = [["phi", "0"], ["0", "1 - phi"]]
"""
    check_rejected(tmp_path, dup, match="duplicate name 'flat-golden'")


def test_manifest_without_structures_rejected(tmp_path):
    text = """
schema = 1

[[manifold]]
name = "plane"
dim = 2
coords = ["x", "y"]
box = [[-1.0, 1.0], [-1.0, 1.0]]
metric = [["1", "0"], ["0", "1"]]
"""
    check_rejected(tmp_path, text, match="at least one structure")
