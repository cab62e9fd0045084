import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from codazzi import catalog, structures, theorem
from codazzi.errors import ClusterAmbiguityError
from codazzi.geometry import TensorData

from .charts import bump, flat, s2xs2, sphere3, warped

BUMP_POINTS = [(1.0, 0.5, 0.8, 0.3), (0.6, 1.0, 0.5, 0.9)]
S2S2_POINT = (0.9, 0.3, 1.7, -1.0)
WARPED_POINT = (0.7, 0.2, -1.0, 0.5)
POLY4 = [
    ["3*x^2 - y*w + 1", "z^3 - 2*x*y", "0", "0.5*y^2*w"],
    ["", "x + y + z + w", "7 - w^2", "0"],
    ["", "", "x*y*z*w", "2*z - x^3"],
    ["", "", "", "y - 1.5*w^2"],
]


@pytest.fixture(scope="module")
def s2s2():
    return s2xs2().frame(S2S2_POINT)


@pytest.fixture(scope="module")
def bump_frame():
    return bump().frame(BUMP_POINTS[0])


class TestIdentity:
    def test_flat_any_b(self):
        fr = flat(4, fields={"b": ("sym2", POLY4)}).frame((0.3, -1.0, 2.0, 0.5))
        assert theorem.identity_residual(fr, "b").raw == 0.0

    @pytest.mark.parametrize("c", [1.0, -2.5, 40.0])
    def test_multiple_of_metric(self, bump_frame, c):
        assert theorem.identity_residual(bump_frame, c * bump_frame.g).value <= 1e-14

    def test_ricci_on_s3(self):
        assert theorem.identity_residual(sphere3().frame((1.0, 0.6, 0.1)), "ricci").value <= 1e-8

    def test_is_pointwise(self, s2s2):
        """Zeroing the derivative data changes nothing: the identity is algebraic."""
        data = s2s2.sym2("ricci")
        stripped = TensorData("ricci", "sym2", data.value, np.zeros_like(data.nabla))
        a = theorem.identity_residual(s2s2, "ricci")
        b = theorem.identity_residual(s2s2, stripped)
        c = theorem.identity_residual(s2s2, data.value.copy())
        assert a == b == c

    def test_fails_off_hypothesis(self, bump_frame):
        assert theorem.identity_residual(bump_frame, "b_diag").value > 1e-3

    def test_scaling(self, bump_frame):
        r1 = theorem.identity_residual(bump_frame, "b_diag")
        r3 = theorem.identity_residual(bump_frame, 3.0 * bump_frame.sym2("b_diag").value)
        assert r3.raw == pytest.approx(3.0 * r1.raw, rel=1e-14)


class TestFourTerm:
    def test_flat_any_b(self):
        fr = flat(4, fields={"b": ("sym2", POLY4)}).frame((0.3, -1.0, 2.0, 0.5))
        assert theorem.four_term_residual(fr, "b").raw == 0.0

    def test_multiple_of_metric_by_brute_force(self, bump_frame):
        """Loop oracle: the four terms for b = c g cancel pairwise."""
        c = 1.7
        b = c * bump_frame.g
        R = bump_frame.riemann_up
        n = 4
        worst = 0.0
        for i, j, k, l in itertools.product(range(n), repeat=4):
            s = 0.0
            for m in range(n):
                s += R[k, i, j, m] * b[m, l] + R[j, l, i, m] * b[m, k] + R[l, j, k, m] * b[m, i] + R[i, k, l, m] * b[m, j]
            worst = max(worst, abs(s))
        assert worst <= 1e-13
        assert theorem.four_term_residual(bump_frame, b).raw == pytest.approx(worst, abs=1e-13)

    @pytest.mark.parametrize("chart, p, b", [(s2xs2(), S2S2_POINT, "ricci"), (warped(), WARPED_POINT, "b0"), (sphere3(), (1.0, 0.6, 0.1), "ricci")])
    def test_codazzi_pairs(self, chart, p, b):
        assert theorem.four_term_residual(chart.frame(p), b).value <= 1e-8


class TestK:
    def test_metric_gives_riemann(self, bump_frame):
        K = theorem.build_K(bump_frame, bump_frame.g).K
        np.testing.assert_allclose(K, bump_frame.riemann, rtol=1e-13, atol=1e-15)

    def test_zero(self, bump_frame):
        K = theorem.build_K(bump_frame, np.zeros((4, 4))).K
        assert not np.any(K)
        assert all(r.raw == 0.0 for r in theorem.check_K_symmetries(K).values())

    def test_riemann_on_s3(self):
        res = theorem.check_K_symmetries(sphere3().frame((1.0, 0.6, 0.1)).riemann)
        assert set(res) == {"a1", "a2", "b", "c_first3", "c_last3"}
        assert all(r.value <= 1e-10 for r in res.values())

    def test_product_with_ricci(self, s2s2):
        res = theorem.check_K_symmetries(theorem.build_K(s2s2, "ricci"))
        assert all(r.value <= 1e-10 for r in res.values())

    @pytest.mark.parametrize("p", BUMP_POINTS)
    def test_bump_breaks_bianchi_only(self, p):
        res = theorem.check_K_symmetries(theorem.build_K(bump().frame(p), "b_diag"))
        assert res["a1"].value <= 1e-10 and res["a2"].value <= 1e-10
        assert res["c_first3"].value > 1e-3


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 4, 4, 4), elements=st.floats(-1, 1)), st.floats(1e-6, 1.0))
def test_pair_symmetry_bound(noise, eps):
    """|K - K^T| <= 6 max(a1, a2, c_first3) for any 4-tensor; checked near and far from curvature tensors."""
    base = s2xs2().frame(S2S2_POINT).riemann if eps < 0.5 else 0.0
    res = theorem.check_K_symmetries(base + eps * noise)
    bound = max(res["a1"].raw, res["a2"].raw, res["c_first3"].raw)
    assert res["b"].raw <= theorem.PAIR_SYMMETRY_BOUND * bound + 1e-15


class TestEigen:
    def test_diagonal(self):
        m = flat(2, fields={"b": ("sym2", [["2", "0"], ["", "3"]])})
        eig = theorem.eigendecompose(m.frame((0.0, 0.0)), "b")
        np.testing.assert_allclose(eig.eigenvalues, [2.0, 3.0])
        np.testing.assert_allclose(np.abs(eig.vectors), np.eye(2), atol=1e-15)
        assert eig.n_clusters == 2

    def test_multiple_of_metric(self, bump_frame):
        eig = theorem.eigendecompose(bump_frame, 2.5 * bump_frame.g)
        assert eig.n_clusters == 1 and len(eig.clusters[0]) == 4
        np.testing.assert_allclose(eig.eigenvalues, 2.5)

    def test_product_ricci(self, s2s2):
        eig = theorem.eigendecompose(s2s2, "ricci")
        assert [len(c) for c in eig.clusters] == [2, 2]
        np.testing.assert_allclose(eig.eigenvalues, [0.25, 0.25, 1.0, 1.0], atol=1e-13)

    def test_g_self_adjointness(self):
        fr = warped().frame(WARPED_POINT)
        eig = theorem.eigendecompose(fr, "b0")
        assert eig.eigen_residual <= 1e-9
        assert eig.gram_residual <= 1e-10
        assert [len(c) for c in eig.clusters] == [3, 1]
        # not orthonormal in the Euclidean sense
        assert np.max(np.abs(eig.vectors.T @ eig.vectors - np.eye(4))) > 0.1

    def test_ambiguity(self):
        with pytest.raises(ClusterAmbiguityError):
            theorem.cluster_eigenvalues(np.array([1.0, 1.0 + 2e-6]), 1e-6)
        np.testing.assert_array_equal(theorem.cluster_eigenvalues(np.array([1.0, 1.0 + 1e-7, 2.0]), 1e-6), [0, 0, 1])
        np.testing.assert_array_equal(theorem.cluster_eigenvalues(np.array([1.0, 1.0 + 1e-5]), 1e-6), [0, 1])


def _rotate_within_clusters(eig, seed):
    rng = np.random.default_rng(seed)
    V = eig.vectors.copy()
    for c in eig.clusters:
        if len(c) > 1:
            q, _ = np.linalg.qr(rng.normal(size=(len(c), len(c))))
            V[:, list(c)] = V[:, list(c)] @ q
    return theorem.EigenStructure(
        eig.eigenvalues, V, eig.labels, eig.clusters, eig.cluster_tol, eig.eigen_residual, eig.gram_residual
    )


class TestInvariance:
    def test_vacuous_for_metric_multiple(self, bump_frame):
        inv = theorem.invariance_check(bump_frame, theorem.eigendecompose(bump_frame, 3 * bump_frame.g))
        assert inv.vacuous and inv.triple_count == 0 and inv.witness is None

    def test_flat(self):
        fr = flat(4, fields={"b": ("sym2", POLY4)}).frame((0.3, -1.0, 2.0, 0.5))
        inv = theorem.invariance_check(fr, theorem.eigendecompose(fr, "b"))
        assert inv.triple_count > 0 and inv.value == 0.0

    def test_product_ricci(self, s2s2):
        eig = theorem.eigendecompose(s2s2, "ricci")
        inv = theorem.invariance_check(s2s2, eig)
        # Z in the other 2-cluster forces X and Y into Z's complement: 2 * (2 * 2) per side
        assert inv.triple_count == 16 and inv.degenerate_count == 16
        assert inv.residual.value <= 1e-8 and inv.degenerate_residual.value <= 1e-8

    def test_warped_codazzi(self):
        fr = warped().frame(WARPED_POINT)
        inv = theorem.invariance_check(fr, theorem.eigendecompose(fr, "b0"))
        assert inv.triple_count > 0 and inv.value <= 1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_basis_independence(self, seed):
        fr = warped().frame(WARPED_POINT)
        eig = theorem.eigendecompose(fr, "b0")
        rot = _rotate_within_clusters(eig, seed)
        a, b = theorem.invariance_check(fr, eig), theorem.invariance_check(fr, rot)
        assert abs(a.value - b.value) <= 1e-9
        assert a.triple_count == b.triple_count

    def test_detects_violation(self, bump_frame):
        inv = theorem.invariance_check(bump_frame, theorem.eigendecompose(bump_frame, "b_diag"))
        assert inv.value > 1e-3
        a, b, c, l = inv.witness
        lab = theorem.eigendecompose(bump_frame, "b_diag").labels
        assert lab[c] != lab[a] and lab[c] != lab[b]

    def test_scaling_leaves_verdicts(self):
        fr = warped().frame(WARPED_POINT)
        for c in (0.5, -3.0):
            eig = theorem.eigendecompose(fr, c * fr.sym2("b0").value)
            assert [len(k) for k in eig.clusters] in ([3, 1], [1, 3])
            assert theorem.invariance_check(fr, eig).value <= 1e-8


class TestVandermonde:
    def test_matrix_as_printed(self):
        m, det = theorem.vandermonde_system(1.0, 2.0, 3.0)
        np.testing.assert_array_equal(m, [[1, 1, 1], [1, 2, 3], [6, 3, 2]])
        assert det == pytest.approx(2.0, abs=1e-12)

    def test_repeated_eigenvalue(self):
        assert theorem.vandermonde_system(1.5, 1.5, -2.0)[1] == 0.0

    def test_random_triples(self):
        rng = np.random.default_rng(11)
        for lam, mu, nu in rng.uniform(-10, 10, size=(1000, 3)):
            det = theorem.vandermonde_system(lam, mu, nu)[1]
            ref = theorem.vandermonde_factored(lam, mu, nu)
            assert abs(det - ref) <= 1e-10 * abs(ref)
            assert np.linalg.det(theorem.vandermonde_system(lam, mu, nu)[0]) == pytest.approx(ref, rel=1e-8)


class TestProofTrace:
    def _triples(self, eig):
        lab = eig.labels
        n = len(lab)
        return [(x, y, z) for x, y, z in itertools.product(range(n), repeat=3) if lab[z] != lab[x] and lab[z] != lab[y]]

    def test_codazzi_pair(self, s2s2):
        eig = theorem.eigendecompose(s2s2, "ricci")
        for t in self._triples(eig):
            tr = theorem.proof_trace(s2s2, "ricci", eig, t)
            assert max(tr.bianchi.value, tr.identity.value, tr.k_bianchi.value) <= 1e-8

    def test_rows_are_the_weighted_system(self, bump_frame):
        """Each row equals the Vandermonde matrix applied to the three contractions, for any b."""
        eig = theorem.eigendecompose(bump_frame, "b_diag")
        for t in self._triples(eig)[:12]:
            tr = theorem.proof_trace(bump_frame, "b_diag", eig, t)
            rows = np.max(np.abs(tr.matrix @ tr.contractions), axis=1)
            np.testing.assert_allclose(rows, [tr.bianchi.raw, tr.identity.raw, tr.k_bianchi.raw], atol=1e-12)

    def test_isolates_hypothesis_failure(self, bump_frame):
        eig = theorem.eigendecompose(bump_frame, "b_diag")
        traces = [theorem.proof_trace(bump_frame, "b_diag", eig, t) for t in self._triples(eig)]
        assert max(tr.bianchi.value for tr in traces) <= 1e-10
        assert max(tr.identity.value for tr in traces) > 1e-3


# ---------------------------------------------------------------------------
# chains over the bundled catalog
# ---------------------------------------------------------------------------


def _catalog_frames():
    for name in catalog.catalog_list():
        m = catalog.catalog_load(name).manifold
        yield name, m, m.frames()


def test_codazzi_chain_over_catalog():
    seen = 0
    for name, m, frames in _catalog_frames():
        fields = ["metric", "ricci"] + [k for k, f in m.fields.items() if f.kind == "sym2"]
        for b in fields:
            if max(structures.codazzi_residual(f, b).value for f in frames) > 1e-9:
                continue
            seen += 1
            for f in frames:
                assert theorem.identity_residual(f, b).value <= 1e-7, (name, b)
                ks = theorem.check_K_symmetries(theorem.build_K(f, b))
                assert max(r.value for r in ks.values()) <= 1e-7, (name, b)
                inv = theorem.invariance_check(f, theorem.eigendecompose(f, b))
                assert inv.value <= 1e-6, (name, b)
    assert seen >= 10


def test_gauged_chain_over_catalog():
    seen = 0
    for name, m, frames in _catalog_frames():
        sym = [k for k, f in m.fields.items() if f.kind == "sym2"]
        cov = [k for k, f in m.fields.items() if f.kind == "covector"]
        for b, beta in itertools.product(sym, cov):
            res = [structures.gauged_codazzi_residual(f, b, beta) for f in frames]
            if max(max(a.value, c.value) for a, c in res) > 1e-9:
                continue
            seen += 1
            for f in frames:
                assert theorem.identity_residual(f, b).value <= 1e-7, (name, b, beta)
    assert seen >= 2
