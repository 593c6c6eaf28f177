"""Registry of the bundled fixture manifests."""

from __future__ import annotations

from pathlib import Path

from .manifest import Manifest, load_manifest

__all__ = ["FIXTURE_DIR", "list_fixtures", "fixture_path", "load_fixture"]

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def list_fixtures() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.toml"))


def fixture_path(name: str) -> Path:
    path = FIXTURE_DIR / f"{name}.toml"
    if not path.exists():
        raise KeyError(
            f"no bundled fixture '{name}'; available: {list_fixtures()}")
    return path


def load_fixture(name: str) -> Manifest:
    return load_manifest(fixture_path(name))
