import numpy as np
import pytest

from conftest import random_instance
from oracles import naive_risk
from finset_id.estimators import (
    empirical_risk,
    mle_estimate,
    ols_fit,
    ols_project_estimate,
    project_to_candidates,
    transition_cost,
)
from finset_id.exceptions import EmptyTrajectory, RankDeficient
from finset_id.linalg_stats import RngState, cholesky, stack_params
from finset_id.lti import HypothesisSet, NoiseConfig, SystemParams, Trajectory, simulate


def _exciting_noiseless(hset, horizon=30, seed=0):
    """Noise-free trajectory of the true system driven by unit-variance inputs."""
    noise = NoiseConfig.noiseless(hset.n_x, hset.n_u, cholesky(np.eye(hset.n_u)))
    x0 = np.ones(hset.n_x)
    return simulate(hset.true_system, noise, x0, horizon, RngState(seed))


class TestTransitionCost:
    def test_true_system_noiseless(self, scalar_set, unit_noise_1d):
        c = scalar_set[0]
        assert transition_cost(c, unit_noise_1d, [2.0], [1.0], [2.0]) == 0.0

    def test_euclidean(self):
        c = SystemParams(np.zeros((2, 2)), np.zeros((2, 1)))
        nc = NoiseConfig(np.eye(2), [[1.0]])
        assert transition_cost(c, nc, [0.0, 0.0], [0.0], [3.0, 4.0]) == pytest.approx(25.0)

    def test_weighted(self):
        c = SystemParams([[0.0]], [[0.0]])
        assert transition_cost(c, NoiseConfig([[4.0]], [[1.0]]), [0.0], [0.0], [2.0]) == pytest.approx(1.0)


class TestEmpiricalRisk:
    def test_true_candidate_equals_noise_energy(self, exp1):
        traj = simulate(exp1.hset.true_system, exp1.noise, None, 40, RngState(1))
        expected = np.mean(np.sum((traj.noises @ np.linalg.inv(exp1.noise.sigma_w)) * traj.noises, axis=1))
        assert empirical_risk(exp1.hset[0], exp1.noise, traj) == pytest.approx(expected, rel=1e-12)

    def test_noiseless_true_is_zero(self, exp1):
        traj = _exciting_noiseless(exp1.hset)
        assert empirical_risk(exp1.hset[0], NoiseConfig(np.eye(3), np.eye(2)), traj) == pytest.approx(0.0, abs=1e-28)

    def test_concentrates_near_n_x(self):
        hs = HypothesisSet((SystemParams(0.5 * np.eye(2), np.eye(2)), SystemParams(np.zeros((2, 2)), np.eye(2))))
        nc = NoiseConfig(np.eye(2), np.eye(2))
        traj = simulate(hs[0], nc, None, 20_000, RngState(3))
        # chi-square(2) per transition: mean 2, sd of the average 2/sqrt(T)
        assert empirical_risk(hs[0], nc, traj) == pytest.approx(2.0, abs=5 * 2 / np.sqrt(20_000))

    def test_empty(self, scalar_set, unit_noise_1d):
        traj = Trajectory(np.zeros((1, 1)), np.zeros((0, 1)))
        with pytest.raises(EmptyTrajectory):
            empirical_risk(scalar_set[0], unit_noise_1d, traj)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        hset, noise = random_instance(rng)
        traj = simulate(hset.true_system, noise, None, 15, RngState(seed))
        for c in hset.candidates:
            got = empirical_risk(c, noise, traj)
            ref = naive_risk(c.a.tolist(), c.b.tolist(), noise.sigma_w, traj.states.tolist(),
                             traj.inputs.tolist())
            assert got == pytest.approx(ref, rel=1e-12)


class TestMLE:
    def test_singleton(self, unit_noise_1d):
        hs = HypothesisSet((SystemParams([[0.5]], [[1.0]]),))
        traj = simulate(hs[0], unit_noise_1d, None, 5, RngState(0))
        assert mle_estimate(hs, unit_noise_1d, traj).index == 0

    def test_noiseless_separation(self, exp1):
        traj = _exciting_noiseless(exp1.hset)
        out = mle_estimate(exp1.hset, NoiseConfig(np.eye(3), np.eye(2)), traj)
        assert out.index == 0
        assert out.scores[0] == pytest.approx(0.0, abs=1e-28)
        assert np.all(out.scores[1:] > 0)
        assert not out.tie

    def test_tie_goes_to_lowest_index(self, unit_noise_1d):
        # zero states: only B matters and both candidates share it
        hs = HypothesisSet((SystemParams([[0.5]], [[1.0]]), SystemParams([[0.1]], [[1.0]])), true_index=1)
        traj = Trajectory(np.zeros((3, 1)), np.zeros((2, 1)))
        out = mle_estimate(hs, unit_noise_1d, traj)
        assert out.index == 0 and out.tie
        profile = out.risk_profile
        assert profile.argmin == 0 and profile.tie

    def test_risks_nonnegative(self, exp1):
        traj = simulate(exp1.hset.true_system, exp1.noise, None, 30, RngState(8))
        out = mle_estimate(exp1.hset, exp1.noise, traj)
        assert np.all(out.scores >= 0)
        assert out.scores[out.index] == out.scores.min()

    @pytest.mark.parametrize("c", [0.01, 3.0, 250.0])
    def test_noise_scaling_invariance(self, exp1, c):
        traj = simulate(exp1.hset.true_system, exp1.noise, None, 60, RngState(17))
        base = mle_estimate(exp1.hset, exp1.noise, traj)
        scaled = mle_estimate(exp1.hset, exp1.noise.scaled(c_w=c), traj)
        assert scaled.index == base.index
        np.testing.assert_allclose(scaled.scores, base.scores / c, rtol=1e-12)


class TestOLS:
    def test_noiseless_recovers_truth(self, exp1):
        traj = _exciting_noiseless(exp1.hset)
        fit = ols_fit(traj)
        true = exp1.hset.true_system
        np.testing.assert_allclose(fit, stack_params(true.a, true.b), atol=1e-10)
        assert ols_project_estimate(exp1.hset, traj).index == 0

    def test_projection_of_member(self, exp1):
        c = exp1.hset[1]
        out = project_to_candidates(exp1.hset, stack_params(c.a, c.b))
        assert out.index == 1
        assert out.scores[1] == 0.0

    def test_stacked_spectral_distance(self, exp1):
        # candidates differ by 0.1 in one entry: distance is exactly that
        out = project_to_candidates(exp1.hset, stack_params(exp1.hset[0].a, exp1.hset[0].b))
        np.testing.assert_allclose(out.scores, [0.0, 0.1, 0.1], atol=1e-15)
        assert out.index == 0 and not out.tie

    def test_short_trajectory_rank_deficient(self, exp1):
        traj = simulate(exp1.hset.true_system, exp1.noise, None, 4, RngState(0))
        with pytest.raises(RankDeficient):
            ols_project_estimate(exp1.hset, traj)

    def test_zero_inputs_rank_deficient(self, exp1):
        traj = Trajectory(np.zeros((11, 3)), np.zeros((10, 2)))
        with pytest.raises(RankDeficient):
            ols_project_estimate(exp1.hset, traj)
