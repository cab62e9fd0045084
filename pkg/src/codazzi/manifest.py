"""Manifest files: a chart, its fields and sample points, and the checks to run.

The format is YAML; see ``docs/manifest.md`` for the schema field by field.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .checks import REGISTRY
from .errors import ManifestError, SingularMetricError
from .expr import ParseError, parse_expression
from .geometry import AUTO_FIELDS, ChartManifold, Field, _sym_matrix
from .residuals import DEFAULT_TOL

SCHEMA_VERSION = 1
FIELD_KINDS = ("sym2", "tensor2", "covector")
TOL_ENV = "CODAZZI_TOL"


@dataclass
class CheckSpec:
    check: str
    bindings: dict[str, str]
    options: dict[str, float]
    tol: float | None
    expect: str  # "pass" or "fail"
    label: str


@dataclass
class Manifest:
    schema: int
    name: str
    description: str
    manifold: ChartManifold
    checks: list[CheckSpec]
    output_format: str
    digest: str
    source: str = ""
    point_names: list[str] = field(default_factory=list)

    @property
    def points(self) -> dict[str, tuple[float, ...]]:
        return self.manifold.points


def default_tolerance() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw:
        try:
            return float(raw)
        except ValueError:
            raise ManifestError(f"{TOL_ENV}={raw!r} is not a number") from None
    return DEFAULT_TOL


def _line_index(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based line numbers of their values."""
    lines: dict[tuple, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (str(k.value),))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


class _Ctx:
    def __init__(self, source: str, lines: dict[tuple, int]):
        self.source = source
        self.lines = lines

    def error(self, path: tuple, message: str) -> ManifestError:
        key = ".".join(str(p) for p in path) or "<root>"
        line = self.lines.get(path)
        where = f"{self.source}:{line}" if line else self.source
        return ManifestError(f"{message} [{where}]", key)


def _number(ctx: _Ctx, value: Any, path: tuple) -> float:
    if isinstance(value, bool):
        raise ctx.error(path, f"expected a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ctx.error(path, f"expected a number, got {value!r}") from None
    if not np.isfinite(out):
        raise ctx.error(path, f"expected a finite number, got {value!r}")
    return out


def _expr(ctx: _Ctx, text: Any, coords: list[str], path: tuple):
    if isinstance(text, bool) or not isinstance(text, (str, int, float)):
        raise ctx.error(path, f"expected an expression, got {text!r}")
    try:
        return parse_expression(str(text), coords)
    except ParseError as exc:
        raise ctx.error(path, f"expression error in {str(text)!r}: {exc}") from None


def _matrix(ctx: _Ctx, spec: Any, coords: list[str], path: tuple, symmetric: bool):
    if not isinstance(spec, dict):
        raise ctx.error(path, "expected a mapping of 'a,b' coordinate pairs to expressions")
    n = len(coords)
    entries = {}
    for key, text in spec.items():
        parts = [p.strip() for p in str(key).split(",")]
        if len(parts) != 2 or not all(p in coords for p in parts):
            raise ctx.error(path + (str(key),), f"component key {key!r} must be 'a,b' with declared coordinates")
        a, b = coords.index(parts[0]), coords.index(parts[1])
        if symmetric:
            a, b = min(a, b), max(a, b)
        if (a, b) in entries:
            raise ctx.error(path + (str(key),), f"component {key!r} given twice")
        entries[(a, b)] = _expr(ctx, text, coords, path + (str(key),))
    if symmetric:
        return _sym_matrix(entries, n)
    from .expr import ZERO

    return tuple(tuple(entries.get((i, j), ZERO) for j in range(n)) for i in range(n))


def parse_manifest(data: Any, source: str = "<string>", text: str | None = None) -> Manifest:
    ctx = _Ctx(source, _line_index(text) if text is not None else {})
    if not isinstance(data, dict):
        raise ctx.error((), "manifest must be a mapping")
    known = {"schema", "name", "description", "chart", "metric", "fields", "points", "grids", "checks", "output"}
    for key in data:
        if key not in known:
            raise ctx.error((str(key),), f"unknown key {key!r}")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ctx.error(("schema",), f"unsupported schema version {schema!r}; expected {SCHEMA_VERSION}")
    name = str(data.get("name", Path(source).stem))

    chart = data.get("chart")
    if not isinstance(chart, dict) or not isinstance(chart.get("coords"), list):
        raise ctx.error(("chart",), "chart.coords must be a list of coordinate names")
    coords = [str(c) for c in chart["coords"]]
    if "dimension" in chart and chart["dimension"] != len(coords):
        raise ctx.error(("chart", "dimension"), f"dimension {chart['dimension']} != {len(coords)} coordinates")
    if len(coords) < 2 or len(set(coords)) != len(coords):
        raise ctx.error(("chart", "coords"), "need at least two distinct coordinate names")
    n = len(coords)

    if "metric" not in data:
        raise ctx.error(("metric",), "missing metric")
    metric = _matrix(ctx, data["metric"], coords, ("metric",), symmetric=True)

    fields: dict[str, Field] = {}
    for fname, fspec in (data.get("fields") or {}).items():
        path = ("fields", str(fname))
        fname = str(fname)
        if fname in AUTO_FIELDS:
            raise ctx.error(path, f"field name {fname!r} is reserved for the built-in tensor")
        if not isinstance(fspec, dict):
            raise ctx.error(path, "field must be a mapping with kind and components")
        kind = fspec.get("kind")
        if kind not in FIELD_KINDS:
            raise ctx.error(path + ("kind",), f"kind must be one of {FIELD_KINDS}, got {kind!r}")
        comps = fspec.get("components")
        if kind == "covector":
            if not isinstance(comps, list) or len(comps) != n:
                raise ctx.error(path + ("components",), f"a covector needs a list of {n} expressions")
            parsed = tuple(_expr(ctx, c, coords, path + ("components", i)) for i, c in enumerate(comps))
        else:
            parsed = _matrix(ctx, comps, coords, path + ("components",), symmetric=(kind == "sym2"))
        fields[fname] = Field(fname, kind, parsed)

    points: dict[str, tuple[float, ...]] = {}
    for pname, coords_ in (data.get("points") or {}).items():
        path = ("points", str(pname))
        if not isinstance(coords_, list) or len(coords_) != n:
            raise ctx.error(path, f"a point needs {n} coordinates")
        points[str(pname)] = tuple(_number(ctx, x, path + (i,)) for i, x in enumerate(coords_))
    for gi, grid in enumerate(data.get("grids") or []):
        path = ("grids", gi)
        if not isinstance(grid, dict) or not isinstance(grid.get("axes"), list) or len(grid["axes"]) != n:
            raise ctx.error(path, f"a grid needs axes: a list of {n} [start, stop, count] triples")
        gname = str(grid.get("name", f"grid{gi}"))
        axes = []
        for ai, ax in enumerate(grid["axes"]):
            if not isinstance(ax, list) or len(ax) != 3:
                raise ctx.error(path + ("axes", ai), "axis must be [start, stop, count]")
            start = _number(ctx, ax[0], path + ("axes", ai, 0))
            stop = _number(ctx, ax[1], path + ("axes", ai, 1))
            count = ax[2]
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                raise ctx.error(path + ("axes", ai, 2), "count must be a positive integer")
            axes.append(np.linspace(start, stop, count))
        for k, idx in enumerate(np.ndindex(*(len(a) for a in axes))):
            points[f"{gname}_{k}"] = tuple(float(axes[a][i]) for a, i in enumerate(idx))
    if not points:
        raise ctx.error(("points",), "no sample points declared")

    manifold = ChartManifold(tuple(coords), metric, fields, points, name)
    try:
        manifold.validate_points()
    except SingularMetricError as exc:
        raise ctx.error(("points",), str(exc)) from None

    checks: list[CheckSpec] = []
    labels = set()
    for ci, cspec in enumerate(data.get("checks") or []):
        path = ("checks", ci)
        if not isinstance(cspec, dict) or "check" not in cspec:
            raise ctx.error(path, "each check needs a 'check' name")
        cname = str(cspec["check"])
        defn = REGISTRY.get(cname)
        if defn is None:
            raise ctx.error(path + ("check",), f"unknown check {cname!r}; known: {sorted(REGISTRY)}")
        if n < defn.min_dim:
            raise ctx.error(path, f"check {cname!r} needs dimension >= {defn.min_dim}, chart has {n}")
        allowed = set(defn.params) | set(defn.options) | {"check", "tol", "expect", "label"}
        for key in cspec:
            if key not in allowed:
                raise ctx.error(path + (str(key),), f"check {cname!r} does not take {key!r}")
        bindings = {}
        for param, kinds in defn.params.items():
            target = cspec.get(param)
            if target is None:
                raise ctx.error(path, f"check {cname!r} needs a field bound to {param!r}")
            target = str(target)
            kind = "sym2" if target in AUTO_FIELDS else fields[target].kind if target in fields else None
            if kind is None:
                raise ctx.error(path + (param,), f"check {cname!r}: unknown field {target!r}")
            if kind not in kinds:
                raise ctx.error(
                    path + (param,),
                    f"check {cname!r}: {param} must be {' or '.join(kinds)}, field {target!r} is {kind}",
                )
            bindings[param] = target
        options = {opt: _number(ctx, cspec[opt], path + (opt,)) for opt in defn.options if opt in cspec}
        tol = _number(ctx, cspec["tol"], path + ("tol",)) if "tol" in cspec else None
        expect = str(cspec.get("expect", "pass"))
        if expect not in ("pass", "fail"):
            raise ctx.error(path + ("expect",), "expect must be 'pass' or 'fail'")
        label = str(cspec.get("label") or "/".join([cname] + [bindings[p] for p in defn.params]))
        if label in labels:
            raise ctx.error(path, f"duplicate check label {label!r}; set 'label' to disambiguate")
        labels.add(label)
        checks.append(CheckSpec(cname, bindings, options, tol, expect, label))

    output = data.get("output") or {}
    fmt = str(output.get("format", "text")) if isinstance(output, dict) else "text"
    if fmt not in ("text", "records"):
        raise ctx.error(("output", "format"), "format must be 'text' or 'records'")

    digest = hashlib.sha256((text if text is not None else repr(data)).encode("utf-8")).hexdigest()
    return Manifest(
        schema=SCHEMA_VERSION,
        name=name,
        description=str(data.get("description", "")),
        manifold=manifold,
        checks=checks,
        output_format=fmt,
        digest=digest,
        source=source,
        point_names=list(points),
    )


def loads(text: str, source: str = "<string>") -> Manifest:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ManifestError(f"not valid YAML [{source}]: {exc}") from None
    return parse_manifest(data, source, text)


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}", str(path)) from None
    return loads(text, str(path))
