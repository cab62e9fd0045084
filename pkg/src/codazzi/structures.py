"""Residuals of Codazzi-type differential conditions on (0,2) tensor fields.

Every function takes a :class:`~codazzi.geometry.PointFrame` and field names
and returns :class:`~codazzi.residuals.Residual` objects; :func:`verdict`
folds per-point residuals into a :class:`StructureVerdict`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError
from .geometry import PointFrame
from .residuals import DEFAULT_TOL, Residual, residual


@dataclass
class StructureVerdict:
    name: str
    residual: float
    tolerance: float
    passed: bool
    points: list[tuple[str, float]] = field(default_factory=list)
    sub: dict[str, "StructureVerdict"] = field(default_factory=dict)


def verdict(
    name: str,
    per_point: Sequence[tuple[str, Residual]],
    tol: float = DEFAULT_TOL,
    sub: dict[str, StructureVerdict] | None = None,
) -> StructureVerdict:
    """Fold per-point residuals; passes when the worst point and every sub-verdict pass."""
    values = [(label, r.value) for label, r in per_point]
    for label, v in values:
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"{name}: bad residual {v} at {label}")
    worst = max((v for _, v in values), default=0.0)
    sub = sub or {}
    passed = worst <= tol and all(s.passed for s in sub.values())
    return StructureVerdict(name, worst, tol, passed, values, sub)


def _gauged_terms(frame: PointFrame, nb: np.ndarray, bv: np.ndarray, beta: np.ndarray):
    # (nabla_k - beta_k) b_ij - (nabla_i - beta_i) b_kj, free indices [k, i, j]
    bb = np.einsum("k,ij->kij", beta, bv)
    return nb, -bb, -nb.transpose(1, 0, 2), bb.transpose(1, 0, 2)


def _closedness(nbeta: np.ndarray) -> Residual:
    return residual(nbeta, -nbeta.T)


def codazzi_residual(frame: PointFrame, b: str) -> Residual:
    """``nabla_j b_kl - nabla_k b_jl``; the gauged residual with a zero gauge field."""
    data = frame.sym2(b)
    return residual(*_gauged_terms(frame, data.nabla, data.value, np.zeros(frame.n)))


def gauged_codazzi_residual(frame: PointFrame, b: str, beta: str) -> tuple[Residual, Residual]:
    """Gauged Codazzi residual and the closedness residual of the gauge field."""
    data = frame.sym2(b)
    gauge = frame.covector(beta)
    main = residual(*_gauged_terms(frame, data.nabla, data.value, gauge.value))
    return main, _closedness(gauge.nabla)


def gauge_closedness_residual(frame: PointFrame, beta: str) -> Residual:
    return _closedness(frame.covector(beta).nabla)


def recurrent_form_residual(frame: PointFrame, b: str, beta: str) -> Residual:
    """``(nabla_i - beta_i) b_kl - (nabla_k - beta_k) b_il``.

    ``b`` may be any (0,2) tensor here, and the gauge field is not required
    to be closed; use :func:`gauge_closedness_residual` for that separately.
    """
    data = frame.tensor2(b)
    gauge = frame.covector(beta)
    return residual(*_gauged_terms(frame, data.nabla, data.value, gauge.value))


def ordinary_recurrence_residual(frame: PointFrame, b: str, beta: str) -> Residual:
    """``nabla_i b_kl - beta_i b_kl``."""
    data = frame.tensor2(b)
    gauge = frame.covector(beta)
    return residual(data.nabla, -np.einsum("i,kl->ikl", gauge.value, data.value))


class WeaklySymmetric(NamedTuple):
    residual: Residual
    beta: np.ndarray
    beta_closedness: Residual


def weakly_symmetric_residual(frame: PointFrame, b: str, A: str, B: str, D: str) -> WeaklySymmetric:
    """``nabla_i b_kl - A_i b_kl - B_k b_il - D_l b_ik`` plus the derived gauge ``A - B``."""
    data = frame.sym2(b)
    a, bb, d = frame.covector(A), frame.covector(B), frame.covector(D)
    bv = data.value
    main = residual(
        data.nabla,
        -np.einsum("i,kl->ikl", a.value, bv),
        -np.einsum("k,il->ikl", bb.value, bv),
        -np.einsum("l,ik->ikl", d.value, bv),
    )
    beta = a.value - bb.value
    return WeaklySymmetric(main, beta, _closedness(a.nabla - bb.nabla))


def derived_gauge_recurrence_residual(frame: PointFrame, b: str, beta: np.ndarray) -> Residual:
    """Recurrence residual for a gauge given as values rather than a declared field."""
    data = frame.tensor2(b)
    return residual(*_gauged_terms(frame, data.nabla, data.value, np.asarray(beta, dtype=float)))


def harmonic_curvature_residual(frame: PointFrame) -> tuple[Residual, Residual]:
    """``nabla_m R_jkl^m`` and, for cross-checking, the Codazzi residual of Ricci."""
    div = Residual(float(np.max(np.abs(frame.riemann_divergence))), float(np.max(np.abs(frame.nabla_riemann))))
    return div, codazzi_residual(frame, "ricci")


def weyl_form_closedness_residual(frame: PointFrame) -> tuple[Residual, Residual]:
    """Codazzi residual of ``R_kj - R/(2(n-1)) g_kj`` and, cross-checked, ``nabla_m C_jkl^m``.

    Refuses n < 4: in dimension 3 the divergence side vanishes identically.
    """
    if frame.n < 4:
        raise DimensionError(f"the Weyl 1-form check needs n >= 4, chart has n = {frame.n}")
    closed = codazzi_residual(frame, "schouten")
    div = Residual(float(np.max(np.abs(frame.weyl_divergence))), float(np.max(np.abs(frame.nabla_weyl))))
    return closed, div
