import numpy as np
import pytest
from scipy import stats

from lpsubspace import grassmann as gr
from lpsubspace import sampling as sp
from lpsubspace.errors import ConfigRejected, InvalidArgument, InvalidNoise


def make_rng(seed=0):
    return np.random.default_rng(np.random.SeedSequence(seed))


class TestUnitBall:
    def test_one_dim_symmetric(self):
        rng = make_rng(1)
        draws = np.array([sp.sample_unit_ball(1, rng)[0] for _ in range(100_000)])
        assert np.all(np.abs(draws) <= 1.0)
        assert abs(draws.mean()) < 0.01

    def test_three_dim_mean_norm(self):
        # E||x|| = int_0^1 r * 3 r^2 dr = 3/4
        rng = make_rng(2)
        norms = np.array(
            [np.linalg.norm(sp.sample_unit_ball(3, rng)) for _ in range(100_000)]
        )
        assert norms.mean() == pytest.approx(0.75, abs=0.01)
        assert norms.max() <= 1.0


class TestOnSubspace:
    def test_line_coordinate_uniform(self):
        rng = make_rng(3)
        L = gr.random_subspace(3, 1, rng)
        coords = np.array(
            [L.basis[:, 0] @ sp.sample_on_subspace(L, rng) for _ in range(10_000)]
        )
        assert stats.kstest(coords, stats.uniform(-1, 2).cdf).pvalue > 0.001

    def test_second_moment_matches_ball_constant(self):
        # E of the in-subspace outer product is I_d / (d + 2)
        rng = make_rng(4)
        d = 2
        L = gr.random_subspace(4, d, rng)
        acc = np.zeros((d, d))
        n = 100_000
        for _ in range(n):
            c = L.basis.T @ sp.sample_on_subspace(L, rng)
            acc += np.outer(c, c)
        assert np.linalg.norm(acc / n - np.eye(d) / (d + 2)) < 0.02

    def test_always_on_subspace(self):
        rng = make_rng(5)
        L = gr.random_subspace(5, 2, rng)
        for _ in range(200):
            x = sp.sample_on_subspace(L, rng)
            assert gr.dist_point_subspace(x, L) < 1e-12
            assert np.linalg.norm(x) <= 1.0


class TestNoisyCylinder:
    def test_distance_bounded_by_eps(self):
        rng = make_rng(6)
        L = gr.random_subspace(4, 2, rng)
        eps = 0.3
        for _ in range(500):
            x = sp.sample_noisy_cylinder(L, eps, rng)
            assert gr.dist_point_subspace(x, L) <= eps + 1e-12

    def test_degenerate_cylinder_matches_clean(self):
        rng = make_rng(7)
        L = gr.random_subspace(3, 1, rng)
        noisy = np.array(
            [
                np.linalg.norm(gr.project(sp.sample_noisy_cylinder(L, 1e-8, rng), L))
                for _ in range(10_000)
            ]
        )
        clean = np.array(
            [np.linalg.norm(sp.sample_on_subspace(L, rng)) for _ in range(10_000)]
        )
        assert stats.ks_2samp(noisy, clean).pvalue > 0.001

    def test_mean_perpendicular_distance(self):
        # uniform 2-disk of radius eps: E dist = (2/3) eps
        rng = make_rng(8)
        L = gr.random_subspace(3, 1, rng)
        eps = 0.1
        dists = np.array(
            [
                gr.dist_point_subspace(sp.sample_noisy_cylinder(L, eps, rng), L)
                for _ in range(100_000)
            ]
        )
        assert dists.mean() == pytest.approx(eps * 2 / 3, abs=0.005)

    def test_rejects_nonpositive_eps(self):
        rng = make_rng(9)
        L = gr.random_subspace(3, 1, rng)
        with pytest.raises(InvalidNoise):
            sp.sample_noisy_cylinder(L, 0.0, rng)


class TestMixture:
    def make_model(self, weights, noise=0.0, seed=10, sep=0.5):
        rng = make_rng(seed)
        return sp.random_mixture_model(3, 1, len(weights) - 1, weights, noise,
                                        rng, min_pairwise_distance=sep)

    def test_all_outliers(self):
        model = self.make_model((1.0, 0.0, 0.0))
        cloud = sp.sample_mixture(model, 300, make_rng(11))
        assert np.all(cloud.labels == 0)
        assert np.all(np.linalg.norm(cloud.points, axis=1) <= 1.0)

    def test_single_clean_component(self):
        model = self.make_model((0.0, 1.0))
        cloud = sp.sample_mixture(model, 300, make_rng(12))
        assert np.all(cloud.labels == 1)
        for x in cloud.points:
            assert gr.dist_point_subspace(x, model.subspaces[0]) < 1e-12

    def test_label_frequencies(self):
        weights = (0.2, 0.5, 0.3)
        model = self.make_model(weights)
        n = 100_000
        cloud = sp.sample_mixture(model, n, make_rng(13))
        freq = np.bincount(cloud.labels, minlength=3) / n
        for i, a in enumerate(weights):
            assert abs(freq[i] - a) <= 3 * np.sqrt(a * (1 - a) / n)

    def test_bit_for_bit_determinism(self):
        model = self.make_model((0.2, 0.5, 0.3), noise=0.05)
        c1 = sp.sample_mixture(model, 500, make_rng(14))
        c2 = sp.sample_mixture(model, 500, make_rng(14))
        assert np.array_equal(c1.points, c2.points)
        assert np.array_equal(c1.labels, c2.labels)

    def test_zero_noise_routes_to_clean_sampler(self):
        model = self.make_model((0.0, 1.0), noise=0.0)
        cloud = sp.sample_mixture(model, 100, make_rng(15))
        for x in cloud.points:
            assert gr.dist_point_subspace(x, model.subspaces[0]) < 1e-12

    def test_noisy_norm_bound(self):
        eps = 0.2
        model = self.make_model((0.0, 1.0), noise=eps)
        cloud = sp.sample_mixture(model, 500, make_rng(16))
        assert np.all(
            np.linalg.norm(cloud.points, axis=1) <= np.sqrt(1 + eps**2) + 1e-12
        )


class TestModelValidation:
    def test_weights_must_sum_to_one(self):
        rng = make_rng(17)
        subs = (gr.random_subspace(3, 1, rng),)
        with pytest.raises(InvalidArgument):
            sp.MixtureModel(weights=np.array([0.5, 0.6]), subspaces=subs)

    def test_subspaces_must_be_distinct(self):
        rng = make_rng(18)
        L = gr.random_subspace(3, 1, rng)
        rot = gr.Subspace(-L.basis)  # same span, different basis
        with pytest.raises(InvalidArgument):
            sp.MixtureModel(
                weights=np.array([0.0, 0.5, 0.5]), subspaces=(L, rot)
            )

    def test_dominance_condition_validator(self):
        rng = make_rng(19)
        model = sp.random_mixture_model(3, 1, 2, (0.2, 0.3, 0.5), 0.0, rng, 0.3)
        with pytest.raises(ConfigRejected, match="alpha1"):
            sp.validate_dominant_component(model)

    def test_noise_floor_validator(self):
        rng = make_rng(20)
        # p = 1, K = 1, alpha1 = 0.7, d = 1: floor = pi * 0.7 / 32
        floor = np.pi * 0.7 / 32
        good = sp.random_mixture_model(3, 1, 1, (0.3, 0.7), floor / 2, rng)
        sp.validate_noise_level(good, 1.0)
        bad = sp.random_mixture_model(3, 1, 1, (0.3, 0.7), floor * 1.01, rng)
        with pytest.raises(ConfigRejected, match="floor"):
            sp.validate_noise_level(bad, 1.0)

    def test_min_separation_respected(self):
        rng = make_rng(21)
        model = sp.random_mixture_model(
            3, 1, 3, (0.1, 0.4, 0.3, 0.2), 0.0, rng, min_pairwise_distance=0.6
        )
        subs = model.subspaces
        for i in range(3):
            for j in range(i + 1, 3):
                assert gr.grassmann_distance(subs[i], subs[j]) > 0.6


class TestCloudSerialization:
    def test_round_trip_with_labels(self, tmp_path):
        rng = make_rng(22)
        model = sp.random_mixture_model(3, 1, 2, (0.2, 0.5, 0.3), 0.1, rng, 0.3)
        cloud = sp.sample_mixture(model, 50, rng)
        path = tmp_path / "cloud.txt"
        sp.save_cloud(path, cloud, K=2, eps=0.1)
        back, K, eps = sp.load_cloud(path)
        assert K == 2 and eps == 0.1
        assert np.array_equal(back.points, cloud.points)
        assert np.array_equal(back.labels, cloud.labels)
        assert path.read_text().splitlines()[0] == "50 3 2 0.10000000000000001"

    def test_round_trip_without_labels(self, tmp_path):
        pts = np.random.default_rng(23).standard_normal((10, 4))
        path = tmp_path / "plain.txt"
        sp.save_cloud(path, sp.PointCloud(pts))
        back, K, eps = sp.load_cloud(path)
        assert K == 0 and eps == 0.0
        assert back.labels is None
        assert np.array_equal(back.points, pts)
