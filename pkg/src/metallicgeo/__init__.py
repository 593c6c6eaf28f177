"""metallicgeo: chart-level numerical verification of harmonicity identities
for metallic pseudo-Riemannian structures, their generalized tangent-bundle
lifts, and maps between metallic manifolds."""

__version__ = "0.1.0"

from .expr import parse  # noqa: E402
from .manifold import ChartedManifold, chart  # noqa: E402
from .metallic import MetallicStructure  # noqa: E402
from .maps import SmoothMap, smooth_map  # noqa: E402
from .manifest import Manifest, VerifyConfig, load_manifest  # noqa: E402
from .suites import (IdentityRecord, VerificationReport,  # noqa: E402
                     run_suites)
from .report import to_json, to_text, write_report  # noqa: E402
from .fixtures import fixture_path, list_fixtures, load_fixture  # noqa: E402

__all__ = [
    "__version__", "parse", "ChartedManifold", "chart", "MetallicStructure",
    "SmoothMap", "smooth_map", "Manifest", "VerifyConfig", "load_manifest",
    "IdentityRecord", "VerificationReport", "run_suites", "to_json",
    "to_text", "write_report", "fixture_path", "list_fixtures",
    "load_fixture",
]
