import numpy as np
import pytest

from complementarity.errors import InvalidConfigError, StructuralError
from complementarity.synthgen import (
    DgpConfig,
    FeatureView,
    alpha_mask,
    derive_seed,
    generate_dataset,
    overlap_split,
)


class TestGenerateDataset:
    def test_noiseless_linear_map(self):
        X, y = generate_dataset(DgpConfig(n=50, seed=3, noise_sd=0.0))
        np.testing.assert_array_equal(y - X @ np.ones(10), 0.0)
        ones = np.ones((1, 10))
        assert (ones @ np.ones(10))[0] == 10.0

    def test_deterministic(self):
        a = generate_dataset(DgpConfig(n=100, seed=42))
        b = generate_dataset(DgpConfig(n=100, seed=42))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_seeds_differ(self):
        a, _ = generate_dataset(DgpConfig(n=10, seed=1))
        b, _ = generate_dataset(DgpConfig(n=10, seed=2))
        assert not np.array_equal(a, b)

    def test_moments(self):
        X, y = generate_dataset(DgpConfig(n=100_000, seed=7))
        assert np.all(np.abs(X.mean(axis=0)) <= 0.02)
        assert np.all(np.abs(X.var(axis=0) - 1.0) <= 0.05)
        # Var(y) = d + noise_sd^2 = 11
        assert y.var() == pytest.approx(11.0, abs=0.2)

    def test_custom_beta(self):
        X, y = generate_dataset(DgpConfig(n=20, seed=0, d=3, beta=(1.0, -2.0, 0.5), noise_sd=0.0))
        np.testing.assert_allclose(y, X @ np.array([1.0, -2.0, 0.5]), rtol=0, atol=0)

    def test_zero_rows(self):
        with pytest.raises(StructuralError):
            generate_dataset(DgpConfig(n=0))

    @pytest.mark.parametrize("kwargs", [{"d": 0}, {"noise_sd": -1.0}, {"d": 3, "beta": (1.0,)}, {"seed": -1}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(InvalidConfigError):
            DgpConfig(**kwargs)


class TestOverlapSplit:
    @pytest.mark.parametrize("z", [0, 2, 4, 6, 8])
    def test_partition(self, z):
        h, m = overlap_split(10, z, seed=z)
        sh, sm = set(h), set(m)
        assert len(sh & sm) == z
        assert len(sh - sm) == len(sm - sh) == (10 - z) // 2
        assert sh | sm == set(range(10))

    def test_z4_sizes(self):
        h, m = overlap_split(10, 4, seed=0)
        assert len(set(h) - set(m)) == 3

    def test_z0_disjoint(self):
        h, m = overlap_split(10, 0, seed=0)
        assert not set(h) & set(m)
        assert len(h) == len(m) == 5

    def test_odd_remainder(self):
        with pytest.raises(InvalidConfigError, match="even"):
            overlap_split(10, 9, seed=0)

    def test_full_overlap_refused(self):
        with pytest.raises(InvalidConfigError):
            overlap_split(10, 10, seed=0)

    def test_seed_randomizes_assignment(self):
        splits = {overlap_split(10, 4, seed=s) for s in range(20)}
        assert len(splits) > 1


class TestAlphaMask:
    def test_alpha_one_identity(self):
        col = np.random.default_rng(0).normal(size=1000)
        np.testing.assert_array_equal(alpha_mask(col, 1.0, seed=1), col)

    def test_alpha_zero(self):
        col = np.random.default_rng(0).normal(size=1000)
        np.testing.assert_array_equal(alpha_mask(col, 0.0, seed=1), 0.0)

    def test_half_fraction(self):
        col = np.random.default_rng(0).normal(size=10_000)
        out = alpha_mask(col, 0.5, seed=3)
        assert np.mean(out == 0.0) == pytest.approx(0.5, abs=0.02)

    def test_kept_entries_bit_exact(self):
        col = np.random.default_rng(0).normal(size=500)
        out = alpha_mask(col, 0.3, seed=4)
        kept = out != 0
        np.testing.assert_array_equal(out[kept], col[kept])

    def test_deterministic(self):
        col = np.arange(1.0, 101.0)
        np.testing.assert_array_equal(alpha_mask(col, 0.4, 9), alpha_mask(col, 0.4, 9))

    @pytest.mark.parametrize("alpha", [-0.1, 1.01])
    def test_range(self, alpha):
        with pytest.raises(InvalidConfigError):
            alpha_mask(np.ones(3), alpha, 0)


class TestSeeds:
    def test_distinct_streams(self):
        seeds = {derive_seed(0, p, r) for p in range(10) for r in range(50)}
        assert len(seeds) == 500

    def test_stable(self):
        assert derive_seed(123, 1, 2) == derive_seed(123, 1, 2)


class TestFeatureView:
    def test_sorted_and_unique(self):
        assert FeatureView((3, 1, 2)).indices == (1, 2, 3)
        with pytest.raises(InvalidConfigError):
            FeatureView((1, 1))

    def test_select_missing_column(self):
        with pytest.raises(StructuralError):
            FeatureView((5,)).select(np.zeros((2, 3)))
