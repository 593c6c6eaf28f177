"""TOML manifest describing charts, structures, maps, and a verify config.

Schema (all expression strings use the grammar of the expression parser,
with the host chart's coordinates as free variables)::

    schema = 1

    [[manifold]]
    name = "plane"                  # unique
    dim = 2                         # must equal len(coords)
    coords = ["x", "y"]
    box = [[-2.0, 2.0], [-2.0, 2.0]]      # dim pairs [lo, hi]
    metric = [["1", "0"], ["0", "1"]]     # dim x dim expressions

    [[structure]]
    name = "flat-golden"            # unique
    host = "plane"                  # a declared manifold
    p = 1.0
    q = 1.0
    J = [["phi", "0"], ["0", "1 - phi"]]  # dim x dim expressions

    [[map]]                         # optional
    name = "rotation"
    source = "flat-golden"          # structure names (each knows its chart)
    target = "rotated-golden"
    components = ["cos(0.6)*x - sin(0.6)*y", "sin(0.6)*x + cos(0.6)*y"]

    [verify]                        # optional; flags override these
    suites = ["algebraic", "frame_lemmas", "weitzenbock", "generalized", "maps"]
    samples = 200
    seed = 42
    tol = 1e-8
    report = "out.json"             # optional output path
    format = "json"                 # text | json

All failures raise ManifestError with the block that caused them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - environment specific
    import tomli as tomllib

from .errors import ManifestError
from .expr import parse
from .expr.parser import ExprSyntaxError, UnknownIdentifierError
from .manifold import ChartedManifold, chart
from .maps import SmoothMap, smooth_map
from .metallic import MetallicStructure

__all__ = ["Manifest", "VerifyConfig", "load_manifest", "KNOWN_SUITES"]

KNOWN_SUITES = ("algebraic", "frame_lemmas", "weitzenbock", "generalized",
                "maps")


@dataclass
class VerifyConfig:
    suites: tuple[str, ...] = KNOWN_SUITES
    samples: int = 200
    seed: int = 42
    tol: float = 1e-8
    report: str | None = None
    format: str = "text"


@dataclass
class Manifest:
    path: str
    manifolds: dict[str, ChartedManifold] = field(default_factory=dict)
    structures: dict[str, MetallicStructure] = field(default_factory=dict)
    maps: dict[str, SmoothMap] = field(default_factory=dict)
    verify: VerifyConfig = field(default_factory=VerifyConfig)


def _need(block: dict, key: str, where: str):
    if key not in block:
        raise ManifestError(f"{where}: missing key '{key}'")
    return block[key]


def _parse_matrix(rows, coords, n: int, where: str) -> np.ndarray:
    rows = list(rows)
    if len(rows) != n or any(not isinstance(r, list) or len(r) != n
                             for r in rows):
        raise ManifestError(
            f"{where}: expected a {n}x{n} matrix of expressions")
    out = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, src in enumerate(row):
            try:
                out[i, j] = parse(str(src), coords)
            except (ExprSyntaxError, UnknownIdentifierError) as exc:
                raise ManifestError(
                    f"{where}: entry [{i}][{j}]: {exc}") from exc
    return out


def _build_manifold(block: dict, where: str) -> ChartedManifold:
    name = str(_need(block, "name", where))
    coords = [str(c) for c in _need(block, "coords", where)]
    dim = int(_need(block, "dim", where))
    if dim != len(coords):
        raise ManifestError(
            f"{where}: dim = {dim} but {len(coords)} coords declared")
    box = _need(block, "box", where)
    if len(box) != dim or any(len(pair) != 2 for pair in box):
        raise ManifestError(f"{where}: box must hold {dim} [lo, hi] pairs")
    box = [(float(lo), float(hi)) for lo, hi in box]
    if any(hi <= lo for lo, hi in box):
        raise ManifestError(f"{where}: box intervals must satisfy lo < hi")
    metric = _need(block, "metric", where)
    rows = [[str(v) for v in r] for r in metric] \
        if all(isinstance(r, list) for r in metric) else None
    if rows is None or len(rows) != dim or any(len(r) != dim for r in rows):
        raise ManifestError(
            f"{where}: metric must be a {dim}x{dim} matrix of expressions")
    try:
        return chart(name, coords, box, rows)
    except (ExprSyntaxError, UnknownIdentifierError, ValueError) as exc:
        raise ManifestError(f"{where}: {exc}") from exc


def _build_structure(block: dict, manifolds: dict, where: str) \
        -> MetallicStructure:
    name = str(_need(block, "name", where))
    host = str(_need(block, "host", where))
    if host not in manifolds:
        raise ManifestError(f"{where}: unknown manifold '{host}'")
    M = manifolds[host]
    p = float(_need(block, "p", where))
    q = float(_need(block, "q", where))
    J = _parse_matrix(_need(block, "J", where), M.coords, M.dim,
                      f"{where}: J")
    return MetallicStructure(manifold=M, p=p, q=q, J=J, name=name)


def _build_map(block: dict, structures: dict, where: str) -> SmoothMap:
    name = str(_need(block, "name", where))
    src = str(_need(block, "source", where))
    tgt = str(_need(block, "target", where))
    for ref in (src, tgt):
        if ref not in structures:
            raise ManifestError(f"{where}: unknown structure '{ref}'")
    S, Sbar = structures[src], structures[tgt]
    comps = _need(block, "components", where)
    if len(comps) != Sbar.manifold.dim:
        raise ManifestError(
            f"{where}: {Sbar.manifold.dim} components required for target "
            f"'{tgt}', got {len(comps)}")
    parsed = np.empty(len(comps), dtype=object)
    for i, src_txt in enumerate(comps):
        try:
            parsed[i] = parse(str(src_txt), S.manifold.coords)
        except (ExprSyntaxError, UnknownIdentifierError) as exc:
            raise ManifestError(f"{where}: component {i}: {exc}") from exc
    return smooth_map(S, Sbar, parsed, name=name)


def _build_verify(block: dict, where: str) -> VerifyConfig:
    cfg = VerifyConfig()
    if "suites" in block:
        suites = tuple(str(s) for s in block["suites"])
        unknown = [s for s in suites if s not in KNOWN_SUITES]
        if unknown:
            raise ManifestError(
                f"{where}: unknown suites {unknown}; known: "
                f"{list(KNOWN_SUITES)}")
        cfg.suites = suites
    if "samples" in block:
        cfg.samples = int(block["samples"])
        if cfg.samples <= 0:
            raise ManifestError(f"{where}: samples must be positive")
    if "seed" in block:
        cfg.seed = int(block["seed"])
    if "tol" in block:
        cfg.tol = float(block["tol"])
        if cfg.tol <= 0:
            raise ManifestError(f"{where}: tol must be positive")
    if "report" in block:
        cfg.report = str(block["report"])
    if "format" in block:
        cfg.format = str(block["format"])
        if cfg.format not in ("text", "json"):
            raise ManifestError(f"{where}: format must be 'text' or 'json'")
    return cfg


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest '{path}': {exc}") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError(f"manifest '{path}': {exc}") from exc

    schema = doc.get("schema", 1)
    if schema != 1:
        raise ManifestError(
            f"manifest '{path}': unsupported schema version {schema}")

    m = Manifest(path=str(path))
    for idx, block in enumerate(doc.get("manifold", [])):
        where = f"manifest '{path.name}': manifold block {idx}"
        man = _build_manifold(block, where)
        if man.name in m.manifolds:
            raise ManifestError(f"{where}: duplicate name '{man.name}'")
        m.manifolds[man.name] = man
    for idx, block in enumerate(doc.get("structure", [])):
        where = f"manifest '{path.name}': structure block {idx}"
        st = _build_structure(block, m.manifolds, where)
        if st.name in m.structures:
            raise ManifestError(f"{where}: duplicate name '{st.name}'")
        m.structures[st.name] = st
    for idx, block in enumerate(doc.get("map", [])):
        where = f"manifest '{path.name}': map block {idx}"
        mp = _build_map(block, m.structures, where)
        if mp.name in m.maps:
            raise ManifestError(f"{where}: duplicate name '{mp.name}'")
        m.maps[mp.name] = mp
    if not m.structures:
        raise ManifestError(
            f"manifest '{path}': at least one structure block is required")
    m.verify = _build_verify(doc.get("verify", {}),
                             f"manifest '{path.name}': verify block")
    return m
