"""The ``verify`` command line tool.

Usage::

    verify MANIFEST [--suite NAME]... [--samples N] [--seed S] [--tol T]
                    [--report PATH] [--format text|json]
    verify --list-suites
    verify --list-fixtures

Exit codes: 0 when no record fails, 1 when at least one identity fails,
2 on manifest or I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ManifestError
from .fixtures import fixture_path, list_fixtures
from .manifest import KNOWN_SUITES, load_manifest
from .report import write_report
from .suites import SUITE_IDENTITIES, run_suites

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Verify metallic-structure identities over the "
                    "structures and maps declared in a manifest.")
    parser.add_argument("manifest", nargs="?",
                        help="path to a TOML manifest, or the name of a "
                             "bundled fixture (see --list-fixtures)")
    parser.add_argument("--suite", action="append", metavar="NAME",
                        dest="suites", choices=list(KNOWN_SUITES),
                        help="run only this suite (repeatable); default is "
                             "the manifest's verify block")
    parser.add_argument("--samples", type=int, metavar="N",
                        help="sample points per identity (default from "
                             "manifest, 200)")
    parser.add_argument("--seed", type=int, metavar="S",
                        help="RNG seed for sample points and directions "
                             "(default from manifest, 42)")
    parser.add_argument("--tol", type=float, metavar="T",
                        help="base tolerance; second-derivative identities "
                             "use 10x (default from manifest, 1e-8)")
    parser.add_argument("--report", metavar="PATH",
                        help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("text", "json"),
                        help="report format (default from manifest, text)")
    parser.add_argument("--list-suites", action="store_true",
                        help="list suite names and their identities, then "
                             "exit")
    parser.add_argument("--list-fixtures", action="store_true",
                        help="list bundled fixture manifests, then exit")
    return parser


def _resolve_manifest(arg: str) -> str:
    """A bare fixture name resolves to the bundled manifest of that name."""
    try:
        return str(fixture_path(arg))
    except KeyError:
        return arg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_suites:
        for suite in KNOWN_SUITES:
            print(suite)
            for ident in SUITE_IDENTITIES[suite]:
                print(f"  {ident}")
        return 0
    if args.list_fixtures:
        for name in list_fixtures():
            print(f"{name}  ({fixture_path(name)})")
        return 0
    if args.manifest is None:
        parser.error("a manifest path is required "
                     "(or --list-suites / --list-fixtures)")

    try:
        manifest = load_manifest(_resolve_manifest(args.manifest))
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report = run_suites(manifest, suites=args.suites, samples=args.samples,
                        seed=args.seed, tol=args.tol)

    fmt = args.format or manifest.verify.format
    path = args.report if args.report is not None else manifest.verify.report
    try:
        rendered = write_report(report, fmt=fmt, path=path)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    if path is None:
        sys.stdout.write(rendered)
    else:
        counts = report.counts()
        print(f"wrote {path}: {counts['pass']} pass, {counts['fail']} fail, "
              f"{counts['skipped']} skipped")
    return 1 if report.failed else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
