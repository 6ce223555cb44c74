import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from finset_id.exceptions import DimensionMismatch, NotPositiveDefinite, NotSymmetric, RankDeficient
from finset_id.linalg_stats import (
    CholeskyFactor,
    RngState,
    cholesky,
    least_squares,
    sample_gaussian,
    spectral_norm,
)


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)).lower, np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])).lower, np.diag([2.0, 3.0]))

    def test_two_by_two(self):
        L = cholesky([[2.0, 1.0], [1.0, 2.0]]).lower
        expected = np.array([[math.sqrt(2), 0.0], [1 / math.sqrt(2), math.sqrt(1.5)]])
        np.testing.assert_allclose(L, expected, rtol=1e-14)
        assert L[0, 0] == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            cholesky([[2.0, 1.0], [0.0, 2.0]])

    @pytest.mark.parametrize("m", [[[1.0, 2.0], [2.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]], [[-1.0]]])
    def test_not_positive_definite(self, m):
        with pytest.raises(NotPositiveDefinite):
            cholesky(m)

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            cholesky(np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            cholesky([[np.nan]])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_reconstructs_random_spd(self, n, seed):
        m = random_spd(np.random.default_rng(seed), n)
        f = cholesky(m)
        err = np.linalg.norm(f.reconstruct() - m) / np.linalg.norm(m)
        assert err <= 1e-10
        assert np.all(np.diag(f.lower) > 0)

    def test_inverse_whitens(self):
        m = random_spd(np.random.default_rng(3), 4)
        w = cholesky(m).inverse()
        np.testing.assert_allclose(w @ m @ w.T, np.eye(4), atol=1e-10)

    def test_degenerate_factor_has_no_inverse(self):
        with pytest.raises(NotPositiveDefinite):
            CholeskyFactor.zeros(2).inverse()


class TestSampling:
    def test_zero_factor_returns_mean(self):
        out = sample_gaussian([1.0, 2.0], CholeskyFactor.zeros(2), RngState(0))
        np.testing.assert_array_equal(out, [1.0, 2.0])

    def test_determinism(self):
        f = cholesky(np.eye(2))
        a = sample_gaussian(np.zeros(2), f, RngState(42))
        b = sample_gaussian(np.zeros(2), f, RngState(42))
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, sample_gaussian(np.zeros(2), f, RngState(43)))

    def test_state_advances(self):
        f, rng = cholesky(np.eye(2)), RngState(42)
        assert not np.array_equal(sample_gaussian(np.zeros(2), f, rng),
                                  sample_gaussian(np.zeros(2), f, rng))

    def test_batch_equals_sequential(self):
        f = cholesky([[2.0, 0.5], [0.5, 1.0]])
        r1, r2 = RngState(7, (1, 2)), RngState(7, (1, 2))
        batch = sample_gaussian([1.0, -1.0], f, r1, size=5)
        seq = np.array([sample_gaussian([1.0, -1.0], f, r2) for _ in range(5)])
        np.testing.assert_allclose(batch, seq, rtol=0, atol=1e-15)

    def test_streams_differ(self):
        f = cholesky(np.eye(3))
        a = sample_gaussian(np.zeros(3), f, RngState(1, (0,)))
        b = sample_gaussian(np.zeros(3), f, RngState(1, (1,)))
        assert not np.array_equal(a, b)

    def test_variance(self):
        draws = sample_gaussian([0.0], cholesky([[4.0]]), RngState(2024), size=100_000)
        assert 3.8 <= draws.var() <= 4.2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            sample_gaussian(np.zeros(3), cholesky(np.eye(2)), RngState(0))

    def test_seed_range(self):
        with pytest.raises(ValueError):
            RngState(-1)
        RngState(2**64 - 1)


class TestLeastSquares:
    def test_identity_regressors(self):
        m = np.arange(6.0).reshape(3, 2)
        np.testing.assert_allclose(least_squares(np.eye(3), m), m, atol=1e-14)

    def test_exact_fit(self):
        np.testing.assert_allclose(least_squares([[1.0], [2.0]], [[2.0], [4.0]]), [[2.0]])

    def test_mean_of_targets(self):
        np.testing.assert_allclose(least_squares([[1.0], [1.0]], [[1.0], [3.0]]), [[2.0]])

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            least_squares([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]], np.ones((3, 1)))

    def test_too_few_rows(self):
        with pytest.raises(RankDeficient):
            least_squares(np.ones((1, 2)), np.ones((1, 1)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_residual_orthogonal(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((40, 4))
        Y = rng.standard_normal((40, 3))
        theta = least_squares(X, Y)
        ortho = X.T @ (Y - X @ theta)
        scale = np.linalg.norm(X) * np.linalg.norm(Y)
        assert np.linalg.norm(ortho) <= 1e-8 * scale


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-12)

    def test_zero(self):
        assert spectral_norm(np.zeros((2, 3))) == 0.0

    def test_nilpotent(self):
        assert spectral_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_dominates_probes(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((3, 5))
        norm, v = spectral_norm(m, return_vector=True)
        for _ in range(20):
            probe = rng.standard_normal(5)
            assert norm >= np.linalg.norm(m @ probe) / np.linalg.norm(probe) - 1e-12
        assert np.linalg.norm(m @ v) == pytest.approx(norm, abs=1e-6)
