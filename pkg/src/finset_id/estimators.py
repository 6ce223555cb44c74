"""Selecting the true system from a finite candidate set.

Two selectors are provided: the maximum-likelihood choice, which picks the
candidate with the smallest average whitened one-step prediction error, and
a baseline that fits ``(A, B)`` by unconstrained least squares and returns
the candidate nearest to the fit in spectral norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DimensionMismatch, EmptyTrajectory, NotPositiveDefinite
from .linalg_stats import as_vector, least_squares, spectral_norm, stack_params
from .lti import HypothesisSet, NoiseConfig, SystemParams, Trajectory

__all__ = [
    "RiskProfile",
    "EstimateOutcome",
    "transition_cost",
    "empirical_risk",
    "mle_estimate",
    "ols_fit",
    "project_to_candidates",
    "ols_project_estimate",
]

MLE = "mle"
OLS = "ols"


@dataclass(frozen=True)
class RiskProfile:
    risks: np.ndarray
    argmin: int
    tie: bool


@dataclass(frozen=True)
class EstimateOutcome:
    """Chosen candidate plus the scores it was chosen from.

    ``scores`` holds empirical risks for the MLE and spectral-norm
    distances for the projection baseline; ``fit`` is the unconstrained
    ``[A_hat, B_hat]`` for the latter.
    """

    index: int
    method: str
    scores: np.ndarray
    tie: bool = False
    fit: Optional[np.ndarray] = None

    @property
    def risk_profile(self) -> Optional[RiskProfile]:
        if self.method != MLE:
            return None
        return RiskProfile(self.scores, self.index, self.tie)


def _whitener(noise: NoiseConfig) -> np.ndarray:
    if noise.w_whiten is None:
        raise NotPositiveDefinite("cost needs a nondegenerate process-noise covariance")
    return noise.w_whiten


def transition_cost(candidate: SystemParams, noise: NoiseConfig, x_t, u_t, x_next) -> float:
    """``||x_next - A x_t - B u_t||^2`` weighted by ``Sigma_w^{-1}``."""
    x_t = as_vector(x_t, candidate.n_x, "x_t")
    u_t = as_vector(u_t, candidate.n_u, "u_t")
    x_next = as_vector(x_next, candidate.n_x, "x_next")
    if noise.n_x != candidate.n_x:
        raise DimensionMismatch("noise and candidate state dimensions differ")
    z = _whitener(noise) @ (x_next - candidate.a @ x_t - candidate.b @ u_t)
    return float(z @ z)


def _residuals(candidate: SystemParams, traj: Trajectory) -> np.ndarray:
    x = traj.states
    return x[1:] - x[:-1] @ candidate.a.T - traj.inputs @ candidate.b.T


def empirical_risk(candidate: SystemParams, noise: NoiseConfig, traj: Trajectory) -> float:
    """Mean of `transition_cost` over the ``T`` transitions of ``traj``."""
    if traj.horizon < 1:
        raise EmptyTrajectory("trajectory has no transitions")
    if (traj.n_x, traj.n_u) != (candidate.n_x, candidate.n_u):
        raise DimensionMismatch("trajectory and candidate dimensions differ")
    z = _residuals(candidate, traj) @ _whitener(noise).T
    return float(np.sum(z * z) / traj.horizon)


def _argmin_lowest(values: np.ndarray):
    best = values.min()
    hits = np.flatnonzero(values == best)
    return int(hits[0]), bool(hits.size > 1)


def mle_estimate(hset: HypothesisSet, noise: NoiseConfig, traj: Trajectory) -> EstimateOutcome:
    """Candidate with the smallest empirical risk; exact ties go to the lowest index."""
    risks = np.array([empirical_risk(c, noise, traj) for c in hset.candidates])
    idx, tie = _argmin_lowest(risks)
    return EstimateOutcome(idx, MLE, risks, tie)


def ols_fit(traj: Trajectory) -> np.ndarray:
    """Unconstrained least-squares ``[A_hat, B_hat]`` of ``x[t+1]`` on ``(x[t], u[t])``."""
    if traj.horizon < 1:
        raise EmptyTrajectory("trajectory has no transitions")
    regressors = np.hstack([traj.states[:-1], traj.inputs])
    return least_squares(regressors, traj.states[1:]).T


def project_to_candidates(hset: HypothesisSet, fit) -> EstimateOutcome:
    """Nearest candidate to ``fit = [A_hat, B_hat]`` in spectral norm."""
    fit = np.asarray(fit, dtype=float)
    dists = np.array([spectral_norm(fit - stack_params(c.a, c.b)) for c in hset.candidates])
    idx, tie = _argmin_lowest(dists)
    return EstimateOutcome(idx, OLS, dists, tie, fit)


def ols_project_estimate(hset: HypothesisSet, traj: Trajectory) -> EstimateOutcome:
    """Least-squares fit followed by spectral-norm projection onto the set.

    Raises `RankDeficient` when the data do not excite all of ``(x, u)``,
    which always happens for ``T < n_x + n_u``.
    """
    return project_to_candidates(hset, ols_fit(traj))
