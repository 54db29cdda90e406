import numpy as np
import pytest

from scenario_cert.distributions import (
    Gaussian,
    GaussianMarginal,
    Mixture,
    Product,
    UniformMarginal,
    UniformNormBall,
    distribution_from_dict,
    load_distribution,
    sample,
    uniform_ball_sampler,
)


class TestUniformNormBall:
    def test_linf_support_membership(self):
        # 5-D cube of radius 0.1 around the all-ones point
        d = UniformNormBall(center=np.ones(5), radius=0.1, norm="linf")
        x = sample(d, 291, seed=42)
        assert x.shape == (291, 5)
        assert (np.abs(x - 1.0).max(axis=1) <= 0.1 + 1e-12).all()
        assert d.in_support(x).all()

    def test_l1_support_membership(self):
        d = UniformNormBall(center=np.array([1.0, 0.0]), radius=1.0, norm="l1")
        x = sample(d, 1000, seed=3)
        assert (np.abs(x - [1.0, 0.0]).sum(axis=1) <= 1.0 + 1e-12).all()

    def test_l2_support_membership(self):
        d = UniformNormBall(center=np.zeros(3), radius=2.0, norm="l2")
        x = sample(d, 1000, seed=3)
        assert (np.sqrt((x * x).sum(axis=1)) <= 2.0 + 1e-12).all()

    def test_invalid_radius(self):
        with pytest.raises(ValueError, match="radius"):
            UniformNormBall(center=np.zeros(2), radius=0.0)

    def test_coordinate_means(self):
        d = UniformNormBall(center=np.array([2.0, -1.0]), radius=0.5, norm="linf")
        x = sample(d, 40000, seed=8)
        se = 0.5 / np.sqrt(3 * 40000)  # std of U(-r, r) is r/sqrt(3)
        assert np.abs(x.mean(axis=0) - [2.0, -1.0]).max() < 3 * se


class TestUniformBallSampler:
    def test_one_dim_linf_is_interval(self):
        rule = uniform_ball_sampler("linf", 1)
        x = rule(50000, seed=0)
        assert x.shape == (50000, 1)
        assert (np.abs(x) <= 1).all()
        # uniform on [-1, 1]: mean 0, var 1/3
        assert abs(x.mean()) < 0.02
        assert abs(x.var() - 1 / 3) < 0.01

    def test_l2_mean_norm(self):
        # E||U|| = dim / (dim + 1) for the volume-uniform unit ball
        rule = uniform_ball_sampler("l2", 2)
        x = rule(100000, seed=1)
        assert abs(np.sqrt((x * x).sum(axis=1)).mean() - 2 / 3) < 0.01

    def test_l1_volume_scaling(self):
        # P(||U||_1 <= 1/2) = (1/2)^dim
        rule = uniform_ball_sampler("l1", 2)
        x = rule(100000, seed=2)
        frac = (np.abs(x).sum(axis=1) <= 0.5).mean()
        assert abs(frac - 0.25) < 0.01

    def test_unsupported_norm(self):
        with pytest.raises(ValueError, match="norm"):
            uniform_ball_sampler("l3", 2)


class TestGaussian:
    def test_degenerate_covariance_gives_point_mass(self):
        d = Gaussian(mean=np.zeros(3), covariance=np.zeros((3, 3)))
        x = sample(d, 5, seed=0)
        np.testing.assert_array_equal(x, np.zeros((5, 3)))

    def test_mean_and_covariance(self):
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        d = Gaussian(mean=np.array([1.0, -1.0]), covariance=cov)
        x = sample(d, 200000, seed=4)
        np.testing.assert_allclose(x.mean(axis=0), [1.0, -1.0], atol=0.02)
        np.testing.assert_allclose(np.cov(x, rowvar=False), cov, atol=0.03)

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            Gaussian(mean=np.zeros(2), covariance=np.array([[1.0, 0.4], [0.0, 1.0]]))

    def test_indefinite_covariance_rejected(self):
        with pytest.raises(ValueError, match="semidefinite"):
            Gaussian(mean=np.zeros(2), covariance=np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestProductAndMixture:
    def test_product_columns(self):
        d = Product((UniformMarginal(0.0, 1.0), GaussianMarginal(5.0, 0.0)))
        x = sample(d, 100, seed=0)
        assert ((x[:, 0] >= 0) & (x[:, 0] <= 1)).all()
        np.testing.assert_array_equal(x[:, 1], np.full(100, 5.0))
        assert d.in_support(x).all()

    def test_mixture_weights_must_sum_to_one(self):
        comp = UniformNormBall(center=np.zeros(1), radius=1.0)
        with pytest.raises(ValueError, match="sum to 1"):
            Mixture(weights=np.array([0.5, 0.4]), components=(comp, comp))

    def test_mixture_draws_from_both(self):
        far = UniformNormBall(center=np.array([10.0]), radius=0.1, norm="linf")
        near = UniformNormBall(center=np.array([-10.0]), radius=0.1, norm="linf")
        d = Mixture(weights=np.array([0.5, 0.5]), components=(far, near))
        x = sample(d, 2000, seed=1)
        hi = (x[:, 0] > 0).mean()
        assert 0.4 < hi < 0.6
        assert d.in_support(x).all()

    def test_mixture_dim_mismatch(self):
        a = UniformNormBall(center=np.zeros(1), radius=1.0)
        b = UniformNormBall(center=np.zeros(2), radius=1.0)
        with pytest.raises(ValueError, match="dimension"):
            Mixture(weights=np.array([0.5, 0.5]), components=(a, b))


class TestDeterminism:
    KINDS = [
        UniformNormBall(center=np.zeros(2), radius=1.0, norm="linf"),
        UniformNormBall(center=np.zeros(2), radius=1.0, norm="l2"),
        UniformNormBall(center=np.zeros(2), radius=1.0, norm="l1"),
        Gaussian(mean=np.zeros(2), covariance=np.eye(2)),
        Product((UniformMarginal(-1.0, 1.0), GaussianMarginal(0.0, 1.0))),
        Mixture(
            weights=np.array([0.3, 0.7]),
            components=(
                UniformNormBall(center=np.zeros(2), radius=1.0, norm="l2"),
                Gaussian(mean=np.ones(2), covariance=np.eye(2)),
            ),
        ),
    ]

    @pytest.mark.parametrize("dist", KINDS, ids=lambda d: type(d).__name__ + getattr(d, "norm", ""))
    def test_same_seed_same_samples(self, dist):
        assert (sample(dist, 100, seed=9) == sample(dist, 100, seed=9)).all()

    @pytest.mark.parametrize("dist", KINDS, ids=lambda d: type(d).__name__ + getattr(d, "norm", ""))
    def test_different_seeds_differ(self, dist):
        assert not (sample(dist, 100, seed=9) == sample(dist, 100, seed=10)).all()

    @pytest.mark.parametrize("dist", KINDS, ids=lambda d: type(d).__name__ + getattr(d, "norm", ""))
    def test_prefix_nested(self, dist):
        # growing a draw never changes its prefix
        short = sample(dist, 50, seed=7)
        long = sample(dist, 400, seed=7)
        assert (long[:50] == short).all()

    def test_streams_disjoint(self):
        d = UniformNormBall(center=np.zeros(2), radius=1.0, norm="l2")
        assert not (sample(d, 50, seed=7, stream=0) == sample(d, 50, seed=7, stream=1)).any()


class TestJson:
    def test_round_trip_all_kinds(self, tmp_path):
        for dist in TestDeterminism.KINDS:
            d2 = distribution_from_dict(dist.to_dict())
            assert (sample(dist, 20, seed=1) == sample(d2, 20, seed=1)).all()

    def test_load_from_file(self, tmp_path):
        import json

        path = tmp_path / "dist.json"
        path.write_text(
            json.dumps(
                {"kind": "uniform_norm_ball", "norm": "linf", "center": [1, 1], "radius": 0.1}
            )
        )
        d = load_distribution(path)
        assert isinstance(d, UniformNormBall) and d.radius == 0.1

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            distribution_from_dict({"kind": "cauchy"})
