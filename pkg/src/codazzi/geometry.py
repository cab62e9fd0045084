"""Curvature of a metric given by closed-form components on one chart.

Metric and field components are differentiated symbolically; the partial
derivatives are evaluated in one batch per manifold and then pushed through
jet arithmetic (:mod:`codazzi.jets`), so Christoffel symbols, curvature and
their covariant derivatives are exact up to floating-point rounding.

See :mod:`codazzi.conventions` for every index and sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as iproduct
from typing import Mapping, Sequence

import numpy as np

from . import jets
from .errors import DimensionError, FieldKindError, SingularMetricError, UnknownFieldError
from .expr import ZERO, Expr, differentiate, parse_expression
from .program import Program, compile_program
from .residuals import Residual, residual

METRIC_ORDER = 4  # second covariant derivatives of Ricci need d^4 g
FIELD_ORDER = {"sym2": 2, "tensor2": 2, "covector": 1}
RCOND_MIN = 1e-10
AUTO_FIELDS = ("metric", "ricci", "schouten")


@dataclass(frozen=True)
class Field:
    """A named tensor field.

    ``kind`` is ``"sym2"`` (symmetric (0,2)), ``"tensor2"`` (general (0,2)) or
    ``"covector"``. Components are an n x n nested tuple or an n-tuple of Expr.
    """

    name: str
    kind: str
    components: tuple

    def __post_init__(self):
        if self.kind not in FIELD_ORDER:
            raise FieldKindError(f"field {self.name!r}: unknown kind {self.kind!r}")


def _sym_matrix(entries: Mapping[tuple[int, int], Expr], n: int) -> tuple:
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(entries.get((min(i, j), max(i, j)), ZERO))
        rows.append(tuple(row))
    return tuple(rows)


@dataclass
class ChartManifold:
    """Dimension, coordinates, metric, named fields and sample points."""

    coords: tuple[str, ...]
    metric: tuple  # n x n Expr, symmetric by construction
    fields: dict[str, Field] = field(default_factory=dict)
    points: dict[str, tuple[float, ...]] = field(default_factory=dict)
    name: str = "chart"

    def __post_init__(self):
        self.coords = tuple(self.coords)
        n = len(self.coords)
        if n < 2:
            raise DimensionError(f"dimension must be at least 2, got {n}")
        if len(set(self.coords)) != n:
            raise ValueError(f"duplicate coordinate names in {self.coords}")
        # only the upper triangle is authoritative
        self.metric = tuple(
            tuple(self.metric[min(i, j)][max(i, j)] for j in range(n)) for i in range(n)
        )
        for name, f in self.fields.items():
            if name in AUTO_FIELDS:
                raise ValueError(f"field name {name!r} is reserved")
            _check_shape(f, n)
        self.points = {k: tuple(float(x) for x in v) for k, v in self.points.items()}
        for name, p in self.points.items():
            if len(p) != n:
                raise ValueError(f"point {name!r} has {len(p)} coordinates, expected {n}")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_strings(
        cls,
        coords: Sequence[str],
        metric: Mapping[tuple[str, str], str] | Sequence[Sequence[str]],
        fields: Mapping[str, tuple[str, object]] | None = None,
        points: Mapping[str, Sequence[float]] | None = None,
        name: str = "chart",
    ) -> "ChartManifold":
        """Build from expression text.

        ``metric`` is either an n x n list of strings (upper triangle used) or
        a mapping ``{(coord_i, coord_j): text}`` with omitted entries zero.
        ``fields`` maps a name to ``(kind, components)`` in the same formats
        (a covector takes a list of n strings).
        """
        coords = list(coords)
        n = len(coords)
        g = _parse_matrix(metric, coords, symmetric=True)
        fs = {}
        for fname, (kind, comps) in (fields or {}).items():
            if kind == "covector":
                parsed = tuple(parse_expression(str(c), coords) for c in comps)
            else:
                parsed = _parse_matrix(comps, coords, symmetric=(kind == "sym2"))
            fs[fname] = Field(fname, kind, parsed)
        return cls(tuple(coords), g, fs, dict(points or {}), name)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    # -- batch evaluation -----------------------------------------------------

    @cached_property
    def _plan(self) -> "_JetPlan":
        return _JetPlan(self)

    def frame(self, point: Sequence[float], backend: str | None = None) -> "PointFrame":
        return self.frames([point], backend=backend)[0]

    def frames(self, points: Sequence[Sequence[float]] | None = None, backend: str | None = None):
        """PointFrames at ``points`` (default: every declared sample point, in order)."""
        if points is None:
            points = list(self.points.values())
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        jet_sets = self._plan.evaluate(pts, backend=backend)
        return [PointFrame(self, p, js) for p, js in zip(pts, jet_sets)]

    def metric_at(self, point: Sequence[float]) -> np.ndarray:
        return self._plan.evaluate_metric(np.atleast_2d(np.asarray(point, float)))[0]

    def validate_points(self) -> None:
        """Reject sample points where the metric is singular or not positive definite."""
        if not self.points:
            return
        names = list(self.points)
        gs = self._plan.evaluate_metric(np.asarray([self.points[k] for k in names]))
        for name, g in zip(names, gs):
            check_metric(g, f"point {name!r} {self.points[name]}")


def _parse_matrix(spec, coords, symmetric: bool) -> tuple:
    n = len(coords)
    if isinstance(spec, Mapping):
        entries = {}
        for key, text in spec.items():
            a, b = _pair(key, coords)
            if symmetric:
                a, b = min(a, b), max(a, b)
            if (a, b) in entries:
                raise ValueError(f"component {key!r} given twice")
            entries[(a, b)] = parse_expression(str(text), coords)
        if symmetric:
            return _sym_matrix(entries, n)
        return tuple(tuple(entries.get((i, j), ZERO) for j in range(n)) for i in range(n))
    rows = [list(r) for r in spec]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix must be {n}x{n}")
    if symmetric:  # the lower triangle is ignored, so it may hold placeholders
        return _sym_matrix({(i, j): parse_expression(str(rows[i][j]), coords) for i in range(n) for j in range(i, n)}, n)
    return tuple(tuple(parse_expression(str(t), coords) for t in r) for r in rows)


def _pair(key, coords) -> tuple[int, int]:
    if isinstance(key, str):
        parts = [p.strip() for p in key.split(",")]
    else:
        parts = list(key)
    if len(parts) != 2:
        raise ValueError(f"component key {key!r} must name two coordinates")
    try:
        return coords.index(parts[0]), coords.index(parts[1])
    except ValueError:
        raise ValueError(f"component key {key!r} names an undeclared coordinate") from None


def _check_shape(f: Field, n: int) -> None:
    if f.kind == "covector":
        ok = len(f.components) == n
    else:
        ok = len(f.components) == n and all(len(r) == n for r in f.components)
    if not ok:
        raise ValueError(f"field {f.name!r} has the wrong number of components for n={n}")


def check_metric(g: np.ndarray, where: str = "") -> None:
    if not np.all(np.isfinite(g)):
        raise SingularMetricError(f"non-finite metric at {where}")
    eig = np.linalg.eigvalsh(0.5 * (g + g.T))
    top = float(np.max(np.abs(eig)))
    if eig[0] <= 0.0 or eig[0] <= RCOND_MIN * top:
        raise SingularMetricError(
            f"metric is singular or not positive definite at {where} "
            f"(eigenvalues {np.array2string(eig, precision=3)})"
        )


class _JetPlan:
    """Symbolic derivative tables plus one compiled program for a manifold."""

    def __init__(self, manifold: ChartManifold):
        self.manifold = manifold
        coords = manifold.coords
        self.n = n = len(coords)
        self.exprs: list[Expr] = []
        self._cache: dict[tuple[int, tuple[int, ...]], int] = {}
        self.layouts: dict[str, tuple[tuple, int, list[np.ndarray]]] = {}

        comps_metric = [[manifold.metric[i][j] for j in range(n)] for i in range(n)]
        self._add_tensor("metric", comps_metric, (n, n), METRIC_ORDER)
        for name, f in manifold.fields.items():
            if f.kind == "covector":
                self._add_tensor(name, list(f.components), (n,), FIELD_ORDER[f.kind])
            else:
                comps = [[f.components[i][j] for j in range(n)] for i in range(n)]
                self._add_tensor(name, comps, (n, n), FIELD_ORDER[f.kind])
        self.program: Program = compile_program(self.exprs, n)
        self._metric_program = compile_program([manifold.metric[i][j] for i in range(n) for j in range(n)], n)

    def _derivatives(self, e: Expr, order: int) -> dict[tuple[int, ...], int]:
        """Flat positions of every sorted-multi-index derivative of ``e``."""
        coords = self.manifold.coords
        table: dict[tuple[int, ...], Expr] = {(): e}
        frontier = [()]
        for _ in range(order):
            nxt = []
            for mi in frontier:
                start = mi[-1] if mi else 0
                for a in range(start, self.n):
                    key = mi + (a,)
                    table[key] = differentiate(table[mi], coords[a])
                    nxt.append(key)
            frontier = nxt
        pos = {}
        for mi, d in table.items():
            key = (id(e), mi)
            if key not in self._cache:
                self._cache[key] = len(self.exprs)
                self.exprs.append(d)
            pos[mi] = self._cache[key]
        return pos

    def _add_tensor(self, name: str, comps, shape: tuple, order: int) -> None:
        n = self.n
        flat_comps = np.empty(shape, dtype=object)
        for idx in np.ndindex(*shape):
            c = comps
            for i in idx:
                c = c[i]
            flat_comps[idx] = c
        seen: dict[int, dict] = {}
        tables = {}
        for idx in np.ndindex(*shape):
            e = flat_comps[idx]
            if id(e) not in seen:
                seen[id(e)] = self._derivatives(e, order)
            tables[idx] = seen[id(e)]
        index_maps = []
        for k in range(order + 1):
            arr = np.empty((n,) * k + shape, dtype=np.int64)
            for didx in iproduct(range(n), repeat=k):
                mi = tuple(sorted(didx))
                for idx in np.ndindex(*shape):
                    arr[didx + idx] = tables[idx][mi]
            index_maps.append(arr)
        self.layouts[name] = (shape, order, index_maps)

    def evaluate(self, points: np.ndarray, backend: str | None = None) -> list[dict[str, jets.Jet]]:
        values = self.program.run(points, backend=backend)
        out = []
        for row in values:
            out.append({name: jets.Jet([row[m] for m in maps]) for name, (_, _, maps) in self.layouts.items()})
        return out

    def evaluate_metric(self, points: np.ndarray) -> np.ndarray:
        vals = self._metric_program.run(points)
        return vals.reshape(len(points), self.n, self.n)


@dataclass
class TensorData:
    """Values of one field at a point.

    For (0,2) fields: ``value`` b_ij, ``mixed`` b_i^j (axes [i, j]), ``nabla``
    nabla_i b_jk and ``nabla2`` nabla_h nabla_i b_jk. For covectors:
    ``value`` beta_i and ``nabla`` nabla_i beta_j.
    """

    name: str
    kind: str
    value: np.ndarray
    nabla: np.ndarray
    nabla2: np.ndarray | None = None
    mixed: np.ndarray | None = None


class PointFrame:
    """Every numeric tensor needed by the checks, at one point.

    Attributes (axes in brackets):

    - ``g`` [i, j], ``ginv`` [i, j]
    - ``christoffel`` Gamma^k_ij [k, i, j]
    - ``riemann_up`` R_ijk^m [i, j, k, m]; ``riemann`` R_ijkl
    - ``ricci`` R_kl, ``scalar`` R
    - ``weyl_up`` C_jkl^m and ``weyl`` C_jklm (None when n < 3)
    - ``nabla_g`` nabla_i g_jk (zero up to rounding)
    - ``nabla_riemann`` nabla_e R_ijk^m [e, i, j, k, m]
    - ``riemann_divergence`` nabla_m R_jkl^m [j, k, l]
    - ``nabla_ricci`` nabla_e R_kl; ``weyl_divergence`` nabla_m C_jkl^m
    """

    def __init__(self, manifold: ChartManifold, point, jet_set: dict[str, jets.Jet]):
        self.manifold = manifold
        self.point = np.asarray(point, dtype=np.float64)
        n = self.n = manifold.dimension
        G = jet_set["metric"]
        check_metric(G.value, f"point {tuple(self.point)}")

        ginv = jets.inverse(G, order=3)
        dG = G.derivative()
        first_kind = 0.5 * (dG.einsum("ijm->mij") + dG.einsum("jim->mij") - dG)
        gamma = jets.product("km,mij->kij", ginv, first_kind)
        dgamma = gamma.derivative()
        riem_up = (
            dgamma.einsum("jmik->ijkm")
            - dgamma.einsum("imjk->ijkm")
            + jets.product("mje,eik->ijkm", gamma, gamma, 2)
            - jets.product("mie,ejk->ijkm", gamma, gamma, 2)
        )
        ricci = -riem_up.einsum("mklm->kl")
        scalar = jets.product("kl,kl->", ginv, ricci, 2)
        schouten = ricci - jets.product(",kl->kl", scalar, G, 2) * (1.0 / (2 * (n - 1)))

        self._gamma = gamma
        self._jets = {"metric": G.truncate(2), "ricci": ricci, "schouten": schouten}

        self.g = G.value
        self.ginv = ginv.value
        self.christoffel = gamma.value
        self.riemann_up = riem_up.value
        self.riemann = np.einsum("ijkm,ml->ijkl", self.riemann_up, self.g)
        self.ricci = ricci.value
        self.scalar = float(scalar.value)

        self.nabla_g = jets.covariant_derivative(G.truncate(1), gamma, "dd").value
        nabla_riem = jets.covariant_derivative(riem_up, gamma, "dddu")
        self.nabla_riemann = nabla_riem.value
        self.riemann_divergence = np.einsum("mjklm->jkl", self.nabla_riemann)
        self.nabla_ricci = jets.covariant_derivative(ricci.truncate(1), gamma, "dd").value

        if n >= 3:
            G1, ric1, s1 = G.truncate(1), ricci.truncate(1), scalar.truncate(1)
            riem_down = jets.product("ijkm,ml->ijkl", riem_up.truncate(1), G1)
            x = jets.product("ac,bd->abcd", G1, ric1)  # g_ac R_bd
            gg = jets.product("ac,bd->abcd", G1, G1)
            weyl = (
                riem_down
                - (x - x.einsum("abdc->abcd") - x.einsum("bacd->abcd") + x.einsum("badc->abcd"))
                * (1.0 / (n - 2))
                + jets.product(",abcd->abcd", s1, gg - gg.einsum("abdc->abcd")) * (1.0 / ((n - 1) * (n - 2)))
            )
            weyl_up = jets.product("jkln,nm->jklm", weyl, ginv.truncate(1))
            self.weyl = weyl.value
            self.weyl_up = weyl_up.value
            self.nabla_weyl = jets.covariant_derivative(weyl_up, gamma, "dddu").value
            self.weyl_divergence = np.einsum("mjklm->jkl", self.nabla_weyl)
        else:
            self.weyl = self.weyl_up = self.nabla_weyl = self.weyl_divergence = None

        self._fields: dict[str, TensorData] = {}
        for name, f in manifold.fields.items():
            self._jets[name] = jet_set[name]
        self._kinds = {name: f.kind for name, f in manifold.fields.items()}

    # -- fields ---------------------------------------------------------------

    def field(self, name: str) -> TensorData:
        """Field data by name; ``metric``, ``ricci`` and ``schouten`` are built in."""
        hit = self._fields.get(name)
        if hit is not None:
            return hit
        if name in AUTO_FIELDS:
            kind = "sym2"
        elif name in self._kinds:
            kind = self._kinds[name]
        else:
            raise UnknownFieldError(f"unknown field {name!r}; declared: {sorted(self._kinds)}")
        jet = self._jets[name]
        if kind == "covector":
            data = TensorData(name, kind, jet.value, jets.covariant_derivative(jet, self._gamma, "d").value)
        else:
            nabla = jets.covariant_derivative(jet, self._gamma, "dd")
            nabla2 = jets.covariant_derivative(nabla, self._gamma, "ddd").value
            mixed = np.einsum("jm,im->ij", self.ginv, jet.value)
            data = TensorData(name, kind, jet.value, nabla.value, nabla2, mixed)
        self._fields[name] = data
        return data

    def sym2(self, name: str) -> TensorData:
        """A field that must be a symmetric (0,2) tensor."""
        data = self.field(name)
        if data.kind != "sym2":
            raise FieldKindError(f"field {name!r} is {data.kind}, a symmetric (0,2) tensor is required")
        return data

    def tensor2(self, name: str) -> TensorData:
        data = self.field(name)
        if data.kind not in ("sym2", "tensor2"):
            raise FieldKindError(f"field {name!r} is {data.kind}, a (0,2) tensor is required")
        return data

    def covector(self, name: str) -> TensorData:
        data = self.field(name)
        if data.kind != "covector":
            raise FieldKindError(f"field {name!r} is {data.kind}, a covector is required")
        return data

    @property
    def field_names(self) -> list[str]:
        return list(AUTO_FIELDS) + list(self._kinds)


# ---------------------------------------------------------------------------
# Engine self-checks
# ---------------------------------------------------------------------------


def christoffel(manifold: ChartManifold, point) -> np.ndarray:
    return manifold.frame(point).christoffel


def riemann(manifold: ChartManifold, point) -> tuple[np.ndarray, np.ndarray]:
    f = manifold.frame(point)
    return f.riemann_up, f.riemann


def ricci_and_scalar(frame: PointFrame) -> tuple[np.ndarray, float]:
    return frame.ricci, frame.scalar


def weyl(frame: PointFrame) -> np.ndarray:
    if frame.weyl_up is None:
        raise DimensionError(f"the Weyl tensor needs n >= 3, chart has n = {frame.n}")
    return frame.weyl_up


def metric_compatibility_residual(frame: PointFrame) -> Residual:
    """``nabla_i g_jk = 0``; scaled by the partial-derivative term sizes."""
    dg = frame._jets["metric"].terms[1]
    connection_terms = dg - frame.nabla_g
    scale = max(float(np.max(np.abs(dg))), float(np.max(np.abs(connection_terms))))
    return Residual(float(np.max(np.abs(frame.nabla_g))), scale)


def inverse_residual(frame: PointFrame) -> Residual:
    return residual(frame.ginv @ frame.g, -np.eye(frame.n))


def christoffel_symmetry_residual(frame: PointFrame) -> Residual:
    gam = frame.christoffel
    return residual(gam, -gam.transpose(0, 2, 1))


def riemann_symmetry_residuals(frame: PointFrame) -> dict[str, Residual]:
    R = frame.riemann
    return {
        "antisym_first": residual(R, R.transpose(1, 0, 2, 3)),
        "antisym_last": residual(R, R.transpose(0, 1, 3, 2)),
        "pair": residual(R, -R.transpose(2, 3, 0, 1)),
        "bianchi1": residual(R, R.transpose(1, 2, 0, 3), R.transpose(2, 0, 1, 3)),
    }


def ricci_symmetry_residual(frame: PointFrame) -> Residual:
    return residual(frame.ricci, -frame.ricci.T)


def weyl_trace_residual(frame: PointFrame) -> Residual:
    """Largest single trace of ``C_jkl^m`` over all index pairs."""
    C, ginv = weyl(frame), frame.ginv
    traces = [
        np.einsum("jklj->kl", C),
        np.einsum("jmlm->jl", C),
        np.einsum("jkmm->jk", C),
        np.einsum("jk,jklm->lm", ginv, C),
        np.einsum("jl,jklm->km", ginv, C),
        np.einsum("kl,jklm->jm", ginv, C),
    ]
    raw = max(float(np.max(np.abs(t))) for t in traces)
    scale = float(np.max(np.abs(frame.riemann_up)))
    return Residual(raw, scale)


def riemann_divergence(frame: PointFrame) -> tuple[np.ndarray, Residual]:
    """``nabla_m R_jkl^m`` and the contracted second Bianchi residual."""
    dric = frame.nabla_ricci  # [e, k, l]
    rhs = dric.transpose(1, 0, 2) - dric  # [j,k,l] = nabla_k R_jl - nabla_j R_kl
    div = frame.riemann_divergence
    res = Residual(float(np.max(np.abs(div - rhs))), max(float(np.max(np.abs(frame.nabla_riemann))), float(np.max(np.abs(dric)))))
    return div, res


def commutator_residual(frame: PointFrame, b: str) -> Residual:
    """``[nabla_i, nabla_j] b_kl - R_ijk^m b_ml - R_ijl^m b_km`` for a (0,2) field."""
    data = frame.tensor2(b)
    dd = data.nabla2
    comm = dd - dd.transpose(1, 0, 2, 3)
    R, bv = frame.riemann_up, data.value
    t1 = np.einsum("ijkm,ml->ijkl", R, bv)
    t2 = np.einsum("ijlm,km->ijkl", R, bv)
    return residual(comm, -t1, -t2)
