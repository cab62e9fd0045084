"""Named checks that a manifest can request, evaluated at one point each."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry, structures, theorem
from .errors import DimensionError
from .geometry import PointFrame

SYM2 = ("sym2",)
ANY2 = ("sym2", "tensor2")
COVECTOR = ("covector",)


@dataclass
class Outcome:
    """One check at one point. ``residual`` is the max of ``sub``, which decides the verdict."""

    sub: dict[str, float]
    extra: dict = field(default_factory=dict)
    consistent: bool = True  # False when two equivalent criteria disagree

    @property
    def residual(self) -> float:
        return max(self.sub.values()) if self.sub else 0.0


@dataclass(frozen=True)
class CheckDef:
    name: str
    fn: Callable[..., Outcome]
    params: dict[str, tuple[str, ...]]  # binding name -> allowed field kinds
    min_dim: int = 2
    options: tuple[str, ...] = ()
    doc: str = ""


REGISTRY: dict[str, CheckDef] = {}


def register(name, params=None, min_dim=2, options=(), doc=""):
    def deco(fn):
        REGISTRY[name] = CheckDef(name, fn, dict(params or {}), min_dim, tuple(options), doc)
        return fn

    return deco


def _agree(a: float, b: float, tol: float) -> bool:
    return (a <= tol) == (b <= tol)


@register("metric_compat", doc="nabla g = 0, g^-1 g = I and Gamma^k_ij = Gamma^k_ji")
def _metric_compat(frame: PointFrame, tol: float) -> Outcome:
    return Outcome(
        {
            "nabla_g": geometry.metric_compatibility_residual(frame).value,
            "inverse": geometry.inverse_residual(frame).value,
            "christoffel_symmetry": geometry.christoffel_symmetry_residual(frame).value,
        }
    )


@register("riemann_symmetries", doc="antisymmetries, pair symmetry, first Bianchi, symmetric Ricci")
def _riemann_symmetries(frame: PointFrame, tol: float) -> Outcome:
    sub = {k: r.value for k, r in geometry.riemann_symmetry_residuals(frame).items()}
    sub["ricci_symmetric"] = geometry.ricci_symmetry_residual(frame).value
    return Outcome(sub)


@register("weyl_traceless", min_dim=3, doc="every trace of the Weyl tensor vanishes")
def _weyl_traceless(frame: PointFrame, tol: float) -> Outcome:
    return Outcome({"trace": geometry.weyl_trace_residual(frame).value})


@register("bianchi2", doc="contracted second Bianchi identity")
def _bianchi2(frame: PointFrame, tol: float) -> Outcome:
    return Outcome({"contracted_bianchi": geometry.riemann_divergence(frame)[1].value})


@register("commutator", {"b": ANY2}, doc="[nabla_i, nabla_j] b_kl = R_ijk^m b_ml + R_ijl^m b_km")
def _commutator(frame: PointFrame, tol: float, b: str) -> Outcome:
    return Outcome({"commutator": geometry.commutator_residual(frame, b).value})


@register("codazzi", {"b": SYM2}, doc="nabla_j b_kl = nabla_k b_jl")
def _codazzi(frame: PointFrame, tol: float, b: str) -> Outcome:
    return Outcome({"codazzi": structures.codazzi_residual(frame, b).value})


@register("gauged_codazzi", {"b": SYM2, "beta": COVECTOR}, doc="gauged Codazzi equation with closed gauge")
def _gauged(frame: PointFrame, tol: float, b: str, beta: str) -> Outcome:
    main, closed = structures.gauged_codazzi_residual(frame, b, beta)
    return Outcome({"gauged_codazzi": main.value, "gauge_closed": closed.value})


@register("closedness", {"beta": COVECTOR}, doc="nabla_k beta_j = nabla_j beta_k")
def _closedness(frame: PointFrame, tol: float, beta: str) -> Outcome:
    return Outcome({"closed": structures.gauge_closedness_residual(frame, beta).value})


@register("recurrent_form", {"b": ANY2, "beta": COVECTOR}, doc="(nabla_i - beta_i) b_kl = (nabla_k - beta_k) b_il")
def _recurrent(frame: PointFrame, tol: float, b: str, beta: str) -> Outcome:
    return Outcome({"recurrent": structures.recurrent_form_residual(frame, b, beta).value})


@register("ordinary_recurrence", {"b": ANY2, "beta": COVECTOR}, doc="nabla_i b_kl = beta_i b_kl")
def _ordinary(frame: PointFrame, tol: float, b: str, beta: str) -> Outcome:
    return Outcome({"recurrence": structures.ordinary_recurrence_residual(frame, b, beta).value})


@register(
    "weakly_symmetric",
    {"b": SYM2, "A": COVECTOR, "B": COVECTOR, "D": COVECTOR},
    doc="nabla_i b_kl = A_i b_kl + B_k b_il + D_l b_ik, with derived gauge A - B",
)
def _weakly(frame: PointFrame, tol: float, b: str, A: str, B: str, D: str) -> Outcome:
    ws = structures.weakly_symmetric_residual(frame, b, A, B, D)
    rec = structures.derived_gauge_recurrence_residual(frame, b, ws.beta)
    return Outcome(
        {"weakly_symmetric": ws.residual.value, "derived_beta_closed": ws.beta_closedness.value},
        {"derived_recurrence": rec.value, "derived_beta": [float(x) for x in ws.beta]},
    )


@register("harmonic_curvature", doc="nabla_m R_jkl^m = 0, cross-checked with Codazzi of Ricci")
def _harmonic(frame: PointFrame, tol: float) -> Outcome:
    div, ric = structures.harmonic_curvature_residual(frame)
    return Outcome(
        {"divergence": div.value, "ricci_codazzi": ric.value}, consistent=_agree(div.value, ric.value, tol)
    )


@register("weyl_form", min_dim=4, doc="Weyl 1-form closed, cross-checked with nabla_m C_jkl^m = 0")
def _weyl_form(frame: PointFrame, tol: float) -> Outcome:
    closed, div = structures.weyl_form_closedness_residual(frame)
    return Outcome(
        {"schouten_codazzi": closed.value, "weyl_divergence": div.value},
        consistent=_agree(closed.value, div.value, tol),
    )


@register("identity_2_1", {"b": SYM2}, doc="b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m = 0")
def _identity(frame: PointFrame, tol: float, b: str) -> Outcome:
    return Outcome({"identity": theorem.identity_residual(frame, b).value})


@register("four_term", {"b": SYM2}, doc="four-term cyclic identity")
def _four_term(frame: PointFrame, tol: float, b: str) -> Outcome:
    return Outcome({"four_term": theorem.four_term_residual(frame, b).value})


@register("K_symmetries", {"b": SYM2}, doc="K_ijkl = R_ijrs b_k^r b_l^s is a generalized curvature tensor")
def _k_symmetries(frame: PointFrame, tol: float, b: str) -> Outcome:
    res = theorem.check_K_symmetries(theorem.build_K(frame, b))
    return Outcome({k: r.value for k, r in res.items()})


@register(
    "invariance",
    {"b": SYM2},
    options=("cluster_tol",),
    doc="R_ijkl X^i Y^j Z^k = 0 for eigenvectors with Z's eigenvalue distinct",
)
def _invariance(frame: PointFrame, tol: float, b: str, cluster_tol: float = theorem.DEFAULT_CLUSTER_TOL) -> Outcome:
    eig = theorem.eigendecompose(frame, b, cluster_tol)
    inv = theorem.invariance_check(frame, eig)
    return Outcome(
        {"contraction": inv.residual.value, "degenerate": inv.degenerate_residual.value},
        {
            "triples": inv.triple_count,
            "degenerate_triples": inv.degenerate_count,
            "vacuous": inv.vacuous,
            "witness": list(inv.witness) if inv.witness else None,
            "clusters": [len(c) for c in eig.clusters],
            "eigenvalues": [float(x) for x in eig.eigenvalues],
            "hypothesis_identity": theorem.identity_residual(frame, b).value,
        },
    )


@register(
    "proof_trace",
    {"b": SYM2},
    options=("cluster_tol",),
    doc="the three linear relations behind the invariance, worst over admissible triples",
)
def _proof_trace(frame: PointFrame, tol: float, b: str, cluster_tol: float = theorem.DEFAULT_CLUSTER_TOL) -> Outcome:
    eig = theorem.eigendecompose(frame, b, cluster_tol)
    lab = eig.labels
    worst = {"bianchi": 0.0, "identity": 0.0, "k_bianchi": 0.0}
    count = 0
    n = frame.n
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if lab[z] == lab[x] or lab[z] == lab[y]:
                    continue
                count += 1
                tr = theorem.proof_trace(frame, b, eig, (x, y, z))
                worst["bianchi"] = max(worst["bianchi"], tr.bianchi.value)
                worst["identity"] = max(worst["identity"], tr.identity.value)
                worst["k_bianchi"] = max(worst["k_bianchi"], tr.k_bianchi.value)
    return Outcome(worst, {"triples": count})


def run_check(defn: CheckDef, frame: PointFrame, tol: float, bindings: dict, options: dict) -> Outcome:
    if frame.n < defn.min_dim:
        raise DimensionError(f"check {defn.name!r} needs n >= {defn.min_dim}")
    out = defn.fn(frame, tol, **bindings, **options)
    for k, v in out.sub.items():
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"check {defn.name!r}: residual {k} = {v}")
    return out
