"""The suite runner: record semantics (fail iff residual exceeds tolerance,
skips carry reasons), determinism, overrides, and failure detection on
deliberately broken manifests."""

import numpy as np
import pytest

from metallicgeo.manifest import KNOWN_SUITES, load_manifest
from metallicgeo.suites import (GENERALIZED_SKIP_REASON, KNOWN_IDENTITIES,
                                STATEMENTS, SUITE_IDENTITIES, _SECOND_ORDER,
                                run_suites)

CORRUPTED = """
schema = 1

[[manifold]]
name = "plane"
dim = 2
coords = ["x", "y"]
box = [[-2.0, 2.0], [-2.0, 2.0]]
metric = [["1", "0"], ["0", "1"]]

[[structure]]
name = "broken"
host = "plane"
p = 1.0
q = 1.0
J = [["1", "0"], ["0", "2"]]
"""

STRETCH_MAP = """
schema = 1

[[manifold]]
name = "plane"
dim = 2
coords = ["x", "y"]
box = [[-2.0, 2.0], [-2.0, 2.0]]
metric = [["1", "0"], ["0", "1"]]

[[manifold]]
name = "wide"
dim = 2
coords = ["x", "y"]
box = [[-5.0, 5.0], [-5.0, 5.0]]
metric = [["1", "0"], ["0", "1"]]

[[structure]]
name = "src"
host = "plane"
p = 1.0
q = 1.0
J = [["phi", "0"], ["0", "1 - phi"]]

[[structure]]
name = "tgt"
host = "wide"
p = 1.0
q = 1.0
J = [["phi", "0"], ["0", "1 - phi"]]

[[map]]
name = "double-x"
source = "src"
target = "tgt"
components = ["2*x", "y"]
"""


@pytest.fixture(scope="module")
def f1_report(f1_manifest):
    return run_suites(f1_manifest)


@pytest.fixture(scope="module")
def f4_report(f4_manifest):
    return run_suites(f4_manifest)


# ---------------------------------------------------------------------------
# record semantics
# ---------------------------------------------------------------------------

def test_f1_counts(f1_report):
    assert f1_report.counts() == {"pass": 39, "fail": 0, "skipped": 1}
    assert not f1_report.failed


def test_f1_single_skip_is_the_norden_identity(f1_report):
    skipped = [r for r in f1_report.records if r.status == "skipped"]
    assert len(skipped) == 1
    assert skipped[0].identity == "algebraic.norden_structure"
    assert "p^2+4q < 0" in skipped[0].reason


def test_f4_counts_and_generalized_skip_reason(f4_report):
    counts = f4_report.counts()
    assert counts == {"pass": 7, "fail": 0, "skipped": 24}
    gen = [r for r in f4_report.records if r.identity.startswith("generalized.")]
    assert len(gen) == len(SUITE_IDENTITIES["generalized"])
    for r in gen:
        assert r.status == "skipped"
        assert r.reason == GENERALIZED_SKIP_REASON


def test_f4_still_passes_signature_free_algebra(f4_report):
    passed = {r.identity for r in f4_report.records if r.status == "pass"}
    assert "algebraic.polynomial" in passed
    assert "algebraic.symmetry" in passed
    assert "algebraic.norden_structure" in passed
    assert "frame.nijenhuis_quadratic" in passed


def test_every_record_identity_is_registered(f1_report, f4_report):
    for rep in (f1_report, f4_report):
        for r in rep.records:
            assert r.identity in KNOWN_IDENTITIES
            assert r.statement == STATEMENTS[r.identity]
            assert r.fixture


def test_fail_iff_residual_exceeds_tolerance(f1_report, f4_report):
    for rep in (f1_report, f4_report):
        for r in rep.records:
            if r.status == "pass":
                assert r.max_residual is not None
                assert r.max_residual <= r.tolerance
            elif r.status == "fail":
                assert r.max_residual > r.tolerance
            else:
                assert r.reason


def test_second_order_identities_get_relaxed_tolerance(f1_report):
    base = f1_report.meta["tol"]
    for r in f1_report.records:
        if r.tolerance is None:
            continue
        expected = 10.0 * base if r.identity in _SECOND_ORDER else base
        assert r.tolerance == pytest.approx(expected)


def test_suite_registry_is_consistent():
    assert set(SUITE_IDENTITIES) == set(KNOWN_SUITES)
    all_ids = [i for ids in SUITE_IDENTITIES.values() for i in ids]
    assert len(all_ids) == len(set(all_ids))
    assert set(all_ids) == set(KNOWN_IDENTITIES)
    assert set(STATEMENTS) == set(KNOWN_IDENTITIES)
    assert all(STATEMENTS[i].strip() for i in KNOWN_IDENTITIES)
    assert _SECOND_ORDER <= set(KNOWN_IDENTITIES)


# ---------------------------------------------------------------------------
# determinism and overrides
# ---------------------------------------------------------------------------

def test_runs_are_deterministic(f1_manifest):
    a = run_suites(f1_manifest, suites=["algebraic", "frame_lemmas"])
    b = run_suites(f1_manifest, suites=["algebraic", "frame_lemmas"])
    assert [r.as_dict() for r in a.records] == [r.as_dict() for r in b.records]
    ma = {k: v for k, v in a.meta.items() if k != "wallTimeSeconds"}
    mb = {k: v for k, v in b.meta.items() if k != "wallTimeSeconds"}
    assert ma == mb


def test_suite_selection_and_order(f1_manifest):
    rep = run_suites(f1_manifest, suites=["weitzenbock", "algebraic"])
    # canonical order, not request order
    assert rep.meta["suites"] == ["algebraic", "weitzenbock"]
    prefixes = {r.identity.split(".")[0] for r in rep.records}
    assert prefixes == {"algebraic", "weitzenbock"}


def test_unknown_suite_rejected(f1_manifest):
    with pytest.raises(ValueError, match="unknown suites"):
        run_suites(f1_manifest, suites=["algebraic", "spectral"])


def test_overrides_flow_into_meta_and_records(f1_manifest):
    rep = run_suites(f1_manifest, suites=["algebraic"], samples=13, seed=5,
                     tol=1e-6)
    assert rep.meta["samples"] == 13
    assert rep.meta["seed"] == 5
    assert rep.meta["tol"] == 1e-6
    for r in rep.records:
        if r.status == "pass":
            assert r.samples <= 13 or r.samples == 13
            assert r.tolerance in (1e-6, 1e-5)


def test_meta_shape(f1_report):
    meta = f1_report.meta
    assert meta["manifest"].endswith("f1_flat_golden.toml")
    assert meta["suites"] == list(KNOWN_SUITES)
    assert set(meta["versions"]) == {"python", "numpy", "metallicgeo"}
    assert isinstance(meta["wallTimeSeconds"], float)


# ---------------------------------------------------------------------------
# deliberately broken manifests
# ---------------------------------------------------------------------------

def test_corrupted_structure_fails_algebraic_suite(tmp_path):
    path = tmp_path / "corrupted.toml"
    path.write_text(CORRUPTED)
    rep = run_suites(load_manifest(path), suites=["algebraic"])
    assert rep.failed
    by_id = {r.identity: r for r in rep.records}
    poly = by_id["algebraic.polynomial"]
    assert poly.status == "fail"
    # J = diag(1, 2) with p = q = 1: J^2 - J - I = diag(-1, 1), residual 1
    assert poly.max_residual == pytest.approx(1.0, abs=1e-12)
    # the symmetric-diagonal part of the algebra still passes
    assert by_id["algebraic.symmetry"].status == "pass"


def test_non_isometric_map_reports_fail_not_skip(tmp_path):
    """A declared map that is not an isometry must FAIL the isometry check
    (residual of order 3 for the doubled x-coordinate), while the
    identities conditional on isometry are skipped with the cause."""
    path = tmp_path / "stretch.toml"
    path.write_text(STRETCH_MAP)
    rep = run_suites(load_manifest(path), suites=["maps"], samples=30)
    by_id = {r.identity: r for r in rep.records if r.fixture == "double-x"}
    iso = by_id["maps.isometry"]
    assert iso.status == "fail"
    assert iso.max_residual > 1.0
    assert rep.failed
    ident = by_id["maps.isometry_identity"]
    assert ident.status == "skipped"
    assert "not an isometry" in ident.reason
    # the metric-only tension dual path is unconditional and still passes
    assert by_id["maps.tension_paths"].status == "pass"


def test_maps_suite_skips_when_no_maps_declared(tmp_path):
    path = tmp_path / "nomap.toml"
    path.write_text(CORRUPTED.replace('J = [["1", "0"], ["0", "2"]]',
                                      'J = [["phi", "0"], ["0", "1 - phi"]]'))
    rep = run_suites(load_manifest(path), suites=["maps"])
    assert [r.identity for r in rep.records] == ["maps.declared"]
    assert rep.records[0].status == "skipped"
    assert rep.records[0].reason == "no map blocks in manifest"
