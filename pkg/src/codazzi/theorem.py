"""The algebraic identity on symmetric tensors and its consequences for curvature.

For a symmetric b_ij and the Riemann tensor R_jkl^m at a point:

* :func:`identity_residual` measures
  ``b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m``;
* :func:`build_K` forms ``K_ijkl = R_ijrs b_k^r b_l^s`` and
  :func:`check_K_symmetries` measures how far it is from having the
  symmetries of a curvature tensor;
* :func:`eigendecompose` and :func:`invariance_check` test that
  ``R_ijkl X^i Y^j Z^k`` vanishes for eigenvectors X, Y, Z of b_i^j whenever
  the eigenvalue of Z differs from those of X and Y.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .errors import ClusterAmbiguityError
from .geometry import PointFrame, TensorData
from .residuals import Residual, residual

DEFAULT_CLUSTER_TOL = 1e-6

# Pair symmetry follows from the antisymmetries and the first Bianchi identity.
# The l1-shortest way to write K_ijkl - K_klij through relabelled defects uses
# coefficients +-1/2 on 2 a1-defects, 6 a2-defects and 4 first-three Bianchi
# defects, so |b| <= a1 + 3*a2 + 2*c_first3 <= 6 * max(a1, a2, c_first3).
PAIR_SYMMETRY_BOUND = 6.0

BLike = Union[str, TensorData, np.ndarray]


def _b_values(frame: PointFrame, b: BLike) -> tuple[np.ndarray, np.ndarray]:
    """(b_ij, b_i^j) for a field name, field data or a raw symmetric matrix."""
    if isinstance(b, str):
        data = frame.sym2(b)
        return data.value, data.mixed
    if isinstance(b, TensorData):
        return b.value, np.einsum("jm,im->ij", frame.ginv, b.value)
    bv = np.asarray(b, dtype=np.float64)
    return bv, np.einsum("jm,im->ij", frame.ginv, bv)


def identity_terms(frame: PointFrame, b: BLike):
    bv, _ = _b_values(frame, b)
    R = frame.riemann_up
    return (
        np.einsum("im,jklm->ijkl", bv, R),
        np.einsum("jm,kilm->ijkl", bv, R),
        np.einsum("km,ijlm->ijkl", bv, R),
    )


def identity_residual(frame: PointFrame, b: BLike) -> Residual:
    """Residual of ``b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m = 0`` (pointwise)."""
    return residual(*identity_terms(frame, b))


def four_term_residual(frame: PointFrame, b: BLike) -> Residual:
    """Residual of ``R_kij^m b_ml + R_jli^m b_mk + R_ljk^m b_mi + R_ikl^m b_mj = 0``."""
    bv, _ = _b_values(frame, b)
    R = frame.riemann_up
    return residual(
        np.einsum("kijm,ml->ijkl", R, bv),
        np.einsum("jlim,mk->ijkl", R, bv),
        np.einsum("ljkm,mi->ijkl", R, bv),
        np.einsum("iklm,mj->ijkl", R, bv),
    )


@dataclass
class GeneralizedCurvature:
    K: np.ndarray


def build_K(frame: PointFrame, b: BLike) -> GeneralizedCurvature:
    _, mixed = _b_values(frame, b)
    return GeneralizedCurvature(np.einsum("ijrs,kr,ls->ijkl", frame.riemann, mixed, mixed))


def check_K_symmetries(K) -> dict[str, Residual]:
    """Residuals of the five curvature-tensor symmetries of ``K``.

    ``a1``: K_ijkl + K_jikl, ``a2``: K_ijkl + K_ijlk, ``b``: K_ijkl - K_klij,
    ``c_first3``: K_ijkl + K_jkil + K_kijl, ``c_last3``: K_ijkl + K_iklj + K_iljk.
    """
    K = K.K if isinstance(K, GeneralizedCurvature) else np.asarray(K)
    return {
        "a1": residual(K, np.einsum("jikl->ijkl", K)),
        "a2": residual(K, np.einsum("ijlk->ijkl", K)),
        "b": residual(K, -np.einsum("klij->ijkl", K)),
        "c_first3": residual(K, np.einsum("jkil->ijkl", K), np.einsum("kijl->ijkl", K)),
        "c_last3": residual(K, np.einsum("iklj->ijkl", K), np.einsum("iljk->ijkl", K)),
    }


# ---------------------------------------------------------------------------
# Eigen-structure
# ---------------------------------------------------------------------------


@dataclass
class EigenStructure:
    """Eigenvalues (ascending) and g-orthonormal eigenvectors of ``b_i^j``.

    ``vectors[:, a]`` is the eigenvector for ``eigenvalues[a]``; ``labels[a]``
    is its cluster and ``clusters`` lists vector indices per cluster.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    labels: np.ndarray
    clusters: list[tuple[int, ...]]
    cluster_tol: float
    eigen_residual: float
    gram_residual: float

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def cluster_eigenvalues(values: np.ndarray, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Cluster labels for ascending ``values``.

    Neighbours closer than half the threshold join; gaps above twice the
    threshold split; anything in between is refused.
    """
    values = np.asarray(values, dtype=float)
    thr = cluster_tol * (1.0 + float(np.max(np.abs(values))) if values.size else 1.0)
    labels = np.zeros(len(values), dtype=int)
    for a in range(1, len(values)):
        gap = values[a] - values[a - 1]
        if gap <= 0.5 * thr:
            labels[a] = labels[a - 1]
        elif gap > 2.0 * thr:
            labels[a] = labels[a - 1] + 1
        else:
            raise ClusterAmbiguityError(
                f"eigenvalues {values[a - 1]!r} and {values[a]!r} are {gap:.3g} apart, "
                f"within a factor 2 of the cluster threshold {thr:.3g}; adjust cluster_tol"
            )
    return labels


def eigendecompose(frame: PointFrame, b: BLike, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> EigenStructure:
    """Solve ``b v = lambda g v``; columns are g-orthonormal eigenvectors of b_i^j."""
    bv, mixed = _b_values(frame, b)
    if not np.allclose(bv, bv.T, rtol=0, atol=1e-12 * (1 + np.max(np.abs(bv)))):
        raise ValueError("eigendecompose needs a symmetric tensor")
    values, vecs = scipy.linalg.eigh(0.5 * (bv + bv.T), frame.g)
    labels = cluster_eigenvalues(values, cluster_tol)
    clusters = [tuple(int(a) for a in np.flatnonzero(labels == c)) for c in range(labels.max() + 1)]
    eig_res = float(np.max(np.abs(np.einsum("ij,ia->ja", mixed, vecs) - vecs * values)))
    gram = float(np.max(np.abs(vecs.T @ frame.g @ vecs - np.eye(frame.n))))
    return EigenStructure(values, vecs, labels, clusters, cluster_tol, eig_res, gram)


# ---------------------------------------------------------------------------
# Invariance of eigen-bivectors under the curvature operator
# ---------------------------------------------------------------------------


@dataclass
class InvarianceResult:
    residual: Residual
    witness: tuple[int, int, int, int] | None  # (x, y, z, l) of the worst contraction
    triple_count: int
    degenerate_residual: Residual
    degenerate_count: int

    @property
    def vacuous(self) -> bool:
        return self.triple_count == 0

    @property
    def value(self) -> float:
        return max(self.residual.value, self.degenerate_residual.value)


def _masked_worst(values: np.ndarray, sizes: np.ndarray, mask: np.ndarray):
    count = int(mask.sum())
    if count == 0:
        return Residual(0.0, 0.0), None, 0
    mags = np.where(mask[..., None], np.abs(values), -1.0)
    flat = int(np.argmax(mags))  # first maximum in C order: lexicographic tie-break
    witness = tuple(int(i) for i in np.unravel_index(flat, mags.shape))
    scale = float(np.max(np.where(mask[..., None], sizes, 0.0)))
    return Residual(float(mags.flat[flat]), scale), witness, count


def invariance_check(frame: PointFrame, eig: EigenStructure) -> InvarianceResult:
    """Worst ``|R_ijkl X^i Y^j Z^k|`` over eigenvector triples with Z outside X's and Y's clusters.

    The case where X and Y share a cluster is additionally checked in the
    form ``R_lkij X^i Y^j Z^k``. The scale of each contraction is the sum of
    the absolute values of its terms.
    """
    R, V = frame.riemann, eig.vectors
    lab = eig.labels
    main = np.einsum("ijkl,ia,jb,kc->abcl", R, V, V, V)
    main_size = np.einsum("ijkl,ia,jb,kc->abcl", np.abs(R), np.abs(V), np.abs(V), np.abs(V))
    admissible = (lab[:, None, None] != lab[None, None, :]) & (lab[None, :, None] != lab[None, None, :])
    res, witness, count = _masked_worst(main, main_size, admissible)

    degen = np.einsum("lkij,ia,jb,kc->abcl", R, V, V, V)
    degen_size = np.einsum("lkij,ia,jb,kc->abcl", np.abs(R), np.abs(V), np.abs(V), np.abs(V))
    same_xy = admissible & (lab[:, None, None] == lab[None, :, None])
    dres, _, dcount = _masked_worst(degen, degen_size, same_xy)
    return InvarianceResult(res, witness, count, dres, dcount)


def vandermonde_system(lam: float, mu: float, nu: float) -> tuple[np.ndarray, float]:
    """The 3x3 system matrix and its determinant by cofactor expansion on the first row."""
    m = np.array([[1.0, 1.0, 1.0], [lam, mu, nu], [mu * nu, lam * nu, lam * mu]])
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return m, float(det)


def vandermonde_factored(lam: float, mu: float, nu: float) -> float:
    return (lam - mu) * (lam - nu) * (nu - mu)


@dataclass
class ProofTrace:
    eigenvalues: tuple[float, float, float]
    contractions: np.ndarray  # rows: R_lijk, R_ljki, R_lkij contracted with X^i Y^j Z^k
    bianchi: Residual
    identity: Residual
    k_bianchi: Residual

    @property
    def matrix(self) -> np.ndarray:
        return vandermonde_system(*self.eigenvalues)[0]


def proof_trace(frame: PointFrame, b: BLike, eig: EigenStructure, triple: tuple[int, int, int]) -> ProofTrace:
    """The three linear relations between ``R_lijk``, ``R_ljki``, ``R_lkij`` on (X, Y, Z).

    Row 1 is the first Bianchi identity, row 2 the algebraic identity
    contracted with the eigenvectors, row 3 the last-three-index Bianchi
    identity of K. Each row is evaluated from its own definition, not from
    the eigenvalue-weighted shortcut.
    """
    x, y, z = (eig.vectors[:, a] for a in triple)
    R = frame.riemann
    u = np.stack(
        [
            np.einsum("lijk,i,j,k->l", R, x, y, z),
            np.einsum("ljki,i,j,k->l", R, x, y, z),
            np.einsum("lkij,i,j,k->l", R, x, y, z),
        ]
    )
    t1, t2, t3 = identity_terms(frame, b)
    ident = residual(*(np.einsum("ijkl,i,j,k->l", t, x, y, z) for t in (t1, t2, t3)))
    K = build_K(frame, b).K
    kb = residual(
        np.einsum("lijk,i,j,k->l", K, x, y, z),
        np.einsum("ljki,i,j,k->l", K, x, y, z),
        np.einsum("lkij,i,j,k->l", K, x, y, z),
    )
    lams = tuple(float(eig.eigenvalues[a]) for a in triple)
    return ProofTrace(lams, u, residual(*u), ident, kb)
