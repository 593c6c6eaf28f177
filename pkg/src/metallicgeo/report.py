"""Report emission: a fixed-width text table or a stable JSON document.

JSON schema (schemaVersion 1)::

    {
      "schemaVersion": 1,
      "meta": {
        "manifest": str,            # path of the manifest that was run
        "suites": [str, ...],
        "samples": int, "seed": int, "tol": float,
        "versions": {"python": str, "numpy": str, "metallicgeo": str},
        "wallTimeSeconds": float    # the only nondeterministic field
      },
      "records": [
        {
          "identity": str,          # stable dotted id, e.g. "frame.trace_identity_1"
          "statement": str,         # what the identity asserts
          "fixture": str,           # structure or map name it ran on
          "samples": int,           # sample points actually used
          "maxResidual": float | null,
          "tolerance": float | null,
          "status": "pass" | "fail" | "skipped",
          "reason": str,            # present iff skipped
          "note": str               # optional diagnostic witnesses
        }, ...
      ]
    }

Running the same manifest with the same seed, samples, tol and suites yields
byte-identical JSON except for ``meta.wallTimeSeconds``.
"""

from __future__ import annotations

import json

from .suites import VerificationReport

__all__ = ["to_json", "to_text", "write_report"]

SCHEMA_VERSION = 1


def to_json(report: VerificationReport) -> str:
    doc = {
        "schemaVersion": SCHEMA_VERSION,
        "meta": report.meta,
        "records": [r.as_dict() for r in report.records],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt_residual(value) -> str:
    return "-" if value is None else f"{value:.3e}"


def to_text(report: VerificationReport) -> str:
    lines = []
    meta = report.meta
    lines.append(f"manifest: {meta.get('manifest', '?')}")
    lines.append(f"suites:   {', '.join(meta.get('suites', []))}")
    lines.append(f"samples={meta.get('samples')}  seed={meta.get('seed')}  "
                 f"tol={meta.get('tol')}  "
                 f"wall={meta.get('wallTimeSeconds')}s")
    lines.append("")
    header = (f"{'status':8s} {'identity':38s} {'fixture':18s} "
              f"{'samples':>7s} {'max residual':>13s} {'tolerance':>10s}")
    lines.append(header)
    lines.append("-" * len(header))
    for r in report.records:
        tol = "-" if r.tolerance is None else f"{r.tolerance:.1e}"
        lines.append(f"{r.status:8s} {r.identity:38s} {r.fixture:18s} "
                     f"{r.samples:>7d} {_fmt_residual(r.max_residual):>13s} "
                     f"{tol:>10s}")
        if r.status == "skipped" and r.reason:
            lines.append(f"{'':8s}   reason: {r.reason}")
        elif r.status == "fail":
            lines.append(f"{'':8s}   violated: {r.statement}")
    counts = report.counts()
    lines.append("-" * len(header))
    lines.append(f"{counts['pass']} pass, {counts['fail']} fail, "
                 f"{counts['skipped']} skipped "
                 f"({len(report.records)} records)")
    return "\n".join(lines) + "\n"


def write_report(report: VerificationReport, fmt: str = "text",
                 path: str | None = None) -> str:
    """Render the report and write it to ``path`` (or return it for stdout).

    Raises OSError if the path is not writable.
    """
    if fmt == "json":
        rendered = to_json(report)
    elif fmt == "text":
        rendered = to_text(report)
    else:
        raise ValueError(f"unknown report format '{fmt}'")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    return rendered
