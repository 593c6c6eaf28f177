"""Report rendering: stable JSON, the text table, and file output."""

import json

import pytest

from metallicgeo.report import SCHEMA_VERSION, to_json, to_text, write_report
from metallicgeo.suites import (IdentityRecord, VerificationReport,
                                run_suites)


def small_report():
    records = [
        IdentityRecord(identity="algebraic.polynomial",
                       statement="J^2 = p J + q I at every sample point",
                       fixture="flat-golden", samples=10,
                       max_residual=8.9e-16, tolerance=1e-8, status="pass"),
        IdentityRecord(identity="generalized.xi_orthonormal",
                       statement="the xi frame is orthonormal",
                       fixture="neutral", samples=0, max_residual=None,
                       tolerance=None, status="skipped",
                       reason="requires Riemannian metric, p²+4q>0"),
        IdentityRecord(identity="algebraic.symmetry",
                       statement="g(JX, Y) = g(X, JY)",
                       fixture="broken", samples=10,
                       max_residual=0.5, tolerance=1e-8, status="fail",
                       note="witness 0.5"),
    ]
    return VerificationReport(records=records, meta={
        "manifest": "demo.toml", "suites": ["algebraic"], "samples": 10,
        "seed": 1, "tol": 1e-8,
        "versions": {"python": "3", "numpy": "2", "metallicgeo": "0"},
        "wallTimeSeconds": 0.1})


def test_json_document_shape():
    doc = json.loads(to_json(small_report()))
    assert doc["schemaVersion"] == SCHEMA_VERSION == 1
    assert set(doc) == {"schemaVersion", "meta", "records"}
    recs = doc["records"]
    assert len(recs) == 3
    assert recs[0]["maxResidual"] == 8.9e-16
    assert recs[0]["status"] == "pass"
    assert "reason" not in recs[0]
    assert recs[1]["reason"].startswith("requires Riemannian")
    assert recs[1]["maxResidual"] is None
    assert recs[2]["note"] == "witness 0.5"


def test_json_is_stable_and_newline_terminated():
    a, b = to_json(small_report()), to_json(small_report())
    assert a == b
    assert a.endswith("\n")
    # keys sorted for byte-stable diffs
    doc = a.splitlines()
    assert doc[1].strip().startswith('"meta"')


def test_text_table_marks_failures_and_skips():
    txt = to_text(small_report())
    assert "manifest: demo.toml" in txt
    assert "violated: g(JX, Y) = g(X, JY)" in txt
    assert "reason: requires Riemannian metric" in txt
    assert "1 pass, 1 fail, 1 skipped (3 records)" in txt
    # residual column formatting
    assert "8.900e-16" in txt
    for line in txt.splitlines():
        if line.startswith("pass") or line.startswith("fail"):
            assert len(line.split()) == 6


def test_write_report_to_file(tmp_path):
    out = tmp_path / "rep.json"
    rendered = write_report(small_report(), fmt="json", path=str(out))
    assert out.read_text() == rendered
    assert json.loads(rendered)["schemaVersion"] == 1


def test_write_report_rejects_unknown_format():
    with pytest.raises(ValueError, match="unknown report format"):
        write_report(small_report(), fmt="yaml")


def test_write_report_propagates_oserror(tmp_path):
    with pytest.raises(OSError):
        write_report(small_report(), fmt="text",
                     path=str(tmp_path / "missing-dir" / "rep.txt"))


def test_live_round_trip_is_byte_identical_modulo_walltime(f1_manifest):
    a = run_suites(f1_manifest, suites=["algebraic"])
    b = run_suites(f1_manifest, suites=["algebraic"])
    da, db = json.loads(to_json(a)), json.loads(to_json(b))
    da["meta"].pop("wallTimeSeconds")
    db["meta"].pop("wallTimeSeconds")
    assert da == db
