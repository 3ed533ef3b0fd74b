import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import angles_from_projectors, gram_schmidt
from lpsubspace import grassmann as gr
from lpsubspace.errors import DimensionMismatch, GeodesicNotUnique, RankDeficient


def line(vec):
    v = np.asarray(vec, dtype=float)
    return gr.Subspace((v / np.linalg.norm(v))[:, None])


class TestOrthonormalize:
    def test_identity_columns_unchanged(self):
        raw = np.eye(3)[:, :2]
        L = gr.orthonormalize(raw)
        assert np.linalg.norm(L.projector() - raw @ raw.T) < 1e-12

    def test_column_scaling_removed(self):
        L = gr.orthonormalize([[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
        expected = np.diag([1.0, 1.0, 0.0])
        assert np.linalg.norm(L.projector() - expected) < 1e-12

    def test_random_span_matches_gram_schmidt(self):
        rng = np.random.default_rng(0)
        raw = rng.standard_normal((5, 2))
        L = gr.orthonormalize(raw)
        q = gram_schmidt(raw)
        assert np.linalg.norm(L.projector() - q @ q.T) < 1e-10

    def test_rank_deficient_names_rank(self):
        raw = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient) as exc:
            gr.orthonormalize(raw)
        assert exc.value.numerical_rank == 1
        assert exc.value.expected == 2


class TestProjection:
    def test_point_in_subspace(self):
        L = line([1, 0])
        x = np.array([1.0, 0.0])
        assert np.allclose(gr.project(x, L), x)
        assert np.allclose(gr.project_perp(x, L), 0.0)

    def test_point_orthogonal(self):
        L = line([1, 0])
        x = np.array([0.0, 1.0])
        assert np.allclose(gr.project(x, L), 0.0)
        assert np.allclose(gr.project_perp(x, L), x)

    def test_diagonal_line_contains_point(self):
        L = line([1, 1, 0])
        x = np.array([1.0, 1.0, 0.0])
        # verify membership by direct inner products
        perp = gr.project_perp(x, L)
        assert np.linalg.norm(perp) < 1e-12
        assert np.allclose(gr.project(x, L), x)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gr.project(np.ones(4), line([1, 0, 0]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_decomposition_property(self, seed):
        rng = np.random.default_rng(seed)
        D = int(rng.integers(2, 7))
        d = int(rng.integers(1, D))
        L = gr.random_subspace(D, d, rng)
        x = rng.standard_normal(D)
        assert np.allclose(gr.project(x, L) + gr.project_perp(x, L), x, atol=1e-12)
        p = gr.project(x, L)
        assert np.linalg.norm(gr.project_perp(p, L)) < 1e-12


class TestDistance:
    def test_unit_examples(self):
        L = line([1, 0])
        assert gr.dist_point_subspace(np.array([0.0, 1.0]), L) == pytest.approx(1.0)
        assert gr.dist_point_subspace(np.array([2.5, 0.0]), L) < 1e-12
        x = np.array([1.0, 1.0]) / np.sqrt(2)
        assert gr.dist_point_subspace(x, L) == pytest.approx(1 / np.sqrt(2))


class TestPrincipalDecomposition:
    def test_equal_subspaces(self):
        rng = np.random.default_rng(1)
        F = gr.random_subspace(4, 2, rng)
        rot = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        G = gr.Subspace(F.basis @ rot)
        dec = gr.principal_decomposition(F, G)
        assert np.all(dec.angles == 0.0)
        assert dec.interaction_dim == 0

    def test_orthogonal_lines(self):
        dec = gr.principal_decomposition(line([1, 0]), line([0, 1]))
        assert dec.angles[0] == pytest.approx(np.pi / 2)
        assert dec.interaction_dim == 1

    def test_diagonal_line_quarter_angle(self):
        F = line([1, 0, 0])
        G = line([1, 1, 0])
        dec = gr.principal_decomposition(F, G)
        assert dec.angles[0] == pytest.approx(np.pi / 4)
        u = dec.complementary[:, 0]
        assert min(np.linalg.norm(u - [0, 1, 0]), np.linalg.norm(u + [0, 1, 0])) < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_invariants(self, seed):
        rng = np.random.default_rng(seed)
        D = int(rng.integers(3, 8))
        d = int(rng.integers(1, D))
        F = gr.random_subspace(D, d, rng)
        G = gr.random_subspace(D, d, rng)
        dec = gr.principal_decomposition(F, G)
        assert np.all(np.diff(dec.angles) <= 1e-15)
        assert np.all(dec.angles >= 0) and np.all(dec.angles <= np.pi / 2)
        k = dec.interaction_dim
        for i in range(d):
            vi = dec.vectors_f[:, i]
            vpi = dec.vectors_g[:, i]
            ui = dec.complementary[:, i]
            assert vi @ vpi == pytest.approx(np.cos(dec.angles[i]), abs=1e-10)
            recon = np.cos(dec.angles[i]) * vi + np.sin(dec.angles[i]) * ui
            assert np.linalg.norm(vpi - recon) < 1e-10
            if i >= k:
                assert np.linalg.norm(ui - vi) < 1e-10
        for i in range(k):
            for j in range(k):
                assert abs(dec.complementary[:, i] @ dec.vectors_f[:, j]) < 1e-10

    def test_angle_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            F = gr.random_subspace(5, 2, rng)
            G = gr.random_subspace(5, 2, rng)
            a1 = gr.principal_decomposition(F, G).angles
            a2 = gr.principal_decomposition(G, F).angles
            assert np.linalg.norm(a1 - a2) < 1e-10


class TestGrassmannDistance:
    def test_self_distance_zero(self):
        F = gr.random_subspace(4, 2, np.random.default_rng(3))
        assert gr.grassmann_distance(F, F) == 0.0

    def test_quarter_turn_lines(self):
        assert gr.grassmann_distance(line([1, 0]), line([1, 1])) == pytest.approx(
            np.pi / 4
        )

    def test_matches_projector_spectrum(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            F = gr.random_subspace(4, 2, rng)
            G = gr.random_subspace(4, 2, rng)
            oracle = np.linalg.norm(angles_from_projectors(F, G))
            assert gr.grassmann_distance(F, G) == pytest.approx(oracle, abs=1e-9)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            F = gr.random_subspace(5, 2, rng)
            G = gr.random_subspace(5, 2, rng)
            assert gr.grassmann_distance(F, G) == gr.grassmann_distance(G, F)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            D = int(rng.integers(3, 7))
            d = int(rng.integers(1, D))
            A, B, C = (gr.random_subspace(D, d, rng) for _ in range(3))
            assert gr.grassmann_distance(A, C) <= (
                gr.grassmann_distance(A, B) + gr.grassmann_distance(B, C) + 1e-9
            )

    def test_range(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            F = gr.random_subspace(6, 3, rng)
            G = gr.random_subspace(6, 3, rng)
            assert 0.0 <= gr.grassmann_distance(F, G) <= np.pi * np.sqrt(3) / 2 + 1e-12


class TestGeodesic:
    def test_endpoints(self):
        rng = np.random.default_rng(8)
        F = gr.random_subspace(5, 2, rng)
        G = gr.random_subspace(5, 2, rng)
        assert gr.geodesic(F, G, 0.0).same_span(F)
        assert gr.geodesic(F, G, 1.0).same_span(G)

    def test_half_angle_line(self):
        F = line([1, 0])
        G = line([1, 1])
        M = gr.geodesic(F, G, 0.5)
        angle = np.arccos(abs(M.basis[:, 0] @ F.basis[:, 0]))
        assert angle == pytest.approx(np.pi / 8, abs=1e-12)

    def test_distance_scales_linearly(self):
        rng = np.random.default_rng(9)
        F = gr.random_subspace(5, 2, rng)
        G = gr.random_subspace(5, 2, rng)
        full = gr.grassmann_distance(F, G)
        at = gr.grassmann_distance(F, gr.geodesic(F, G, 0.3))
        assert at == pytest.approx(0.3 * full, abs=1e-8)

    def test_midpoint_equidistant(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            F = gr.random_subspace(6, 2, rng)
            G = gr.random_subspace(6, 2, rng)
            M = gr.geodesic(F, G, 0.5)
            assert abs(
                gr.grassmann_distance(F, M) - gr.grassmann_distance(G, M)
            ) < 1e-8

    def test_right_angle_not_unique(self):
        with pytest.raises(GeodesicNotUnique):
            gr.geodesic(line([1, 0]), line([0, 1]), 0.5)


class TestRandomSubspace:
    def test_line_angle_uniform(self):
        rng = np.random.default_rng(11)
        angles = []
        for _ in range(10_000):
            b = gr.random_subspace(2, 1, rng).basis[:, 0]
            angles.append(np.arctan2(b[1], b[0]) % np.pi)
        counts, _ = np.histogram(angles, bins=20, range=(0.0, np.pi))
        assert stats.chisquare(counts).pvalue > 0.001

    def test_mean_projector(self):
        rng = np.random.default_rng(12)
        acc = np.zeros((3, 3))
        n = 10_000
        for _ in range(n):
            acc += gr.random_subspace(3, 2, rng).projector()
        assert np.linalg.norm(acc / n - (2 / 3) * np.eye(3)) < 0.02

    def test_codimension_one(self):
        L = gr.random_subspace(4, 3, np.random.default_rng(13))
        assert L.dim == 3 and L.ambient_dim == 4


class TestLipschitzBound:
    def test_random_triples(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            D = int(rng.integers(2, 7))
            d = int(rng.integers(1, D))
            x = rng.standard_normal(D)
            x *= rng.uniform() ** (1 / D) / np.linalg.norm(x)
            L1 = gr.random_subspace(D, d, rng)
            L2 = gr.random_subspace(D, d, rng)
            lhs = abs(
                gr.dist_point_subspace(x, L1) - gr.dist_point_subspace(x, L2)
            )
            assert lhs <= np.linalg.norm(x) * gr.grassmann_distance(L1, L2) + 1e-9


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(15)
        L = gr.random_subspace(5, 2, rng)
        path = tmp_path / "L.txt"
        gr.save_subspace(path, L)
        back = gr.load_subspace(path)
        assert back.same_span(L, tol=1e-12)
        header = path.read_text().splitlines()[0]
        assert header == "5 2"
