"""Configuration-driven Monte Carlo and bound evaluation.

A configuration is a JSON document::

    {
      "name": "exp1",                      # optional
      "candidates": [{"A": [[...]], "B": [[...]]}, ...],
      "true_index": 0,                     # optional, default 0
      "sigma_u": [[...]],
      "sigma_w": [[...]],
      "horizons": [250, 500],
      "n_trials": 1000,
      "delta": 0.05,
      "seed": 0,
      "estimators": ["mle", "ols"],        # optional, default both
      "x0": [0, 0, 0]                      # optional, default zero
    }

The environment variable ``FINSET_SEED`` overrides ``seed``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import (
    RECURSION,
    BoundReport,
    theorem1_check,
    theorem1_minimal_T,
    theorem2_minimal_T,
    theorem2_per_candidate,
)
from .estimators import MLE, OLS, mle_estimate, ols_project_estimate
from .exceptions import ConfigInvalid, FinsetError, RankDeficient, UnknownExperiment
from .linalg_stats import RngState
from .lti import HypothesisSet, NoiseConfig, SystemParams, Trajectory, simulate_batch

__all__ = [
    "ExperimentConfig",
    "TrialTable",
    "load_config",
    "config_from_dict",
    "builtin_paper_config",
    "run_montecarlo",
    "run_bounds",
]

SEED_ENV = "FINSET_SEED"
ESTIMATORS = (MLE, OLS)


@dataclass(frozen=True)
class ExperimentConfig:
    hset: HypothesisSet
    noise: NoiseConfig
    horizons: tuple
    n_trials: int = 1000
    delta: float = 0.05
    seed: int = 0
    estimators: tuple = ESTIMATORS
    x0: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        if not self.horizons:
            raise ConfigInvalid("horizons", "must be non-empty")
        for h in self.horizons:
            if not isinstance(h, (int, np.integer)) or isinstance(h, bool) or h < 1:
                raise ConfigInvalid("horizons", f"entries must be positive integers, got {h!r}")
        if self.n_trials < 1:
            raise ConfigInvalid("n_trials", "must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigInvalid("delta", "must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed", "must be a 64-bit unsigned integer")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise ConfigInvalid("estimators", f"must be a non-empty subset of {list(ESTIMATORS)}")
        if (self.noise.n_x, self.noise.n_u) != (self.hset.n_x, self.hset.n_u):
            raise ConfigInvalid("sigma_w", "covariance sizes do not match the candidates")
        object.__setattr__(self, "horizons", tuple(int(h) for h in self.horizons))
        object.__setattr__(self, "estimators", tuple(self.estimators))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "candidates": [{"A": c.a.tolist(), "B": c.b.tolist()} for c in self.hset.candidates],
            "true_index": self.hset.true_index,
            "sigma_u": self.noise.sigma_u.tolist(),
            "sigma_w": self.noise.sigma_w.tolist(),
            "horizons": list(self.horizons),
            "n_trials": self.n_trials,
            "delta": self.delta,
            "seed": self.seed,
            "estimators": list(self.estimators),
            "x0": None if self.x0 is None else np.asarray(self.x0).tolist(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _require(d, key, where=""):
    if key not in d:
        raise ConfigInvalid(where + key, "missing")
    return d[key]


def _matrix(value, field_name):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigInvalid(field_name, "must be a nested numeric array") from None
    if arr.ndim != 2:
        raise ConfigInvalid(field_name, f"must be a 2-D array, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise ConfigInvalid(field_name, "contains non-finite entries")
    return arr


def seed_from_env(seed, env=None):
    """``FINSET_SEED`` if set and non-empty, else ``seed``."""
    env = os.environ if env is None else env
    value = env.get(SEED_ENV)
    if not value:
        return seed
    try:
        return int(value)
    except ValueError:
        raise ConfigInvalid(SEED_ENV, f"not an integer: {value!r}") from None


def config_from_dict(d: dict, env=None) -> ExperimentConfig:
    """Validate a parsed JSON config; errors name the offending field."""
    if not isinstance(d, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")

    raw = _require(d, "candidates")
    if not isinstance(raw, list) or not raw:
        raise ConfigInvalid("candidates", "must be a non-empty list")
    cands = []
    for k, c in enumerate(raw):
        where = f"candidates[{k}]."
        if not isinstance(c, dict):
            raise ConfigInvalid(f"candidates[{k}]", "must be an object with A and B")
        a = _matrix(_require(c, "A", where), where + "A")
        b = _matrix(_require(c, "B", where), where + "B")
        try:
            cands.append(SystemParams(a, b))
        except FinsetError as exc:
            raise ConfigInvalid(f"candidates[{k}]", str(exc)) from None
    try:
        hset = HypothesisSet(tuple(cands), int(d.get("true_index", 0)))
    except (FinsetError, ValueError) as exc:
        raise ConfigInvalid("candidates", str(exc)) from None

    sigma_u = _matrix(_require(d, "sigma_u"), "sigma_u")
    sigma_w = _matrix(_require(d, "sigma_w"), "sigma_w")
    for name, m, n in (("sigma_u", sigma_u, hset.n_u), ("sigma_w", sigma_w, hset.n_x)):
        if m.shape != (n, n):
            raise ConfigInvalid(name, f"must be {n}x{n}, got {m.shape[0]}x{m.shape[1]}")
    try:
        noise = NoiseConfig(sigma_w, sigma_u)
    except FinsetError as exc:
        raise ConfigInvalid("sigma_w/sigma_u", f"must be symmetric positive definite ({exc})") from None

    horizons = _require(d, "horizons")
    if not isinstance(horizons, list):
        raise ConfigInvalid("horizons", "must be a list of integers")

    seed = seed_from_env(d.get("seed", 0), env)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigInvalid("seed", "must be an integer")

    n_trials = d.get("n_trials", 1000)
    if not isinstance(n_trials, int) or isinstance(n_trials, bool):
        raise ConfigInvalid("n_trials", "must be an integer")
    delta = d.get("delta", 0.05)
    if not isinstance(delta, (int, float)) or isinstance(delta, bool):
        raise ConfigInvalid("delta", "must be a number")

    x0 = d.get("x0")
    if x0 is not None:
        x0 = np.array(x0, dtype=float).reshape(-1)
        if x0.shape[0] != hset.n_x:
            raise ConfigInvalid("x0", f"must have length {hset.n_x}")

    estimators = d.get("estimators", list(ESTIMATORS))
    if not isinstance(estimators, list):
        raise ConfigInvalid("estimators", "must be a list")

    return ExperimentConfig(
        hset=hset,
        noise=noise,
        horizons=tuple(horizons),
        n_trials=n_trials,
        delta=float(delta),
        seed=seed,
        estimators=tuple(estimators),
        x0=x0,
        name=str(d.get("name", "")),
    )


def load_config(path, env=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("<file>", f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigInvalid("<file>", str(exc)) from None
    return config_from_dict(d, env=env)


_REFERENCE_NOISE = {
    1: (np.diag([0.1, 0.1, 0.1]), np.diag([10.0, 0.1])),
    2: (np.diag([0.1, 0.1, 0.1]), np.diag([0.1, 10.0])),
    3: (np.diag([10.0, 0.1, 0.001]), np.diag([10.0, 0.1])),
}


def reference_hypothesis_set() -> HypothesisSet:
    """Three weakly coupled 3-state candidates sharing one input matrix."""
    b = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

    def a(first, last):
        return np.array([[first, 0.1, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, last]])

    return HypothesisSet((SystemParams(a(0.2, 0.5), b),
                          SystemParams(a(0.1, 0.5), b),
                          SystemParams(a(0.2, 0.6), b)), 0)


def builtin_paper_config(experiment: int, seed: int = 0) -> ExperimentConfig:
    """Reference setups 1-3; they differ only in the noise covariances."""
    if experiment not in _REFERENCE_NOISE:
        raise UnknownExperiment(f"experiment must be 1, 2 or 3, got {experiment!r}")
    sigma_w, sigma_u = _REFERENCE_NOISE[experiment]
    return ExperimentConfig(
        hset=reference_hypothesis_set(),
        noise=NoiseConfig(sigma_w, sigma_u),
        horizons=(250, 500, 750, 1000, 1250),
        n_trials=1000,
        delta=0.05,
        seed=seed,
        estimators=ESTIMATORS,
        name=f"exp{experiment}",
    )


@dataclass(frozen=True)
class TrialTable:
    """Selection counts indexed ``[estimator, horizon, candidate]``.

    ``failed[e, h]`` counts trials where estimator ``e`` raised
    `RankDeficient`; ``counts[e, h].sum() + failed[e, h] == n_trials``.
    """

    estimators: tuple
    horizons: tuple
    n_candidates: int
    n_trials: int
    counts: np.ndarray
    failed: np.ndarray
    seed: int
    digest: str = ""
    # per-trial chosen index, -1 on failure; kept for paired comparisons
    choices: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def percentages(self) -> np.ndarray:
        return 100.0 * self.counts / self.n_trials

    def pct(self, estimator: str, T: int, candidate: int) -> float:
        e = self.estimators.index(estimator)
        h = self.horizons.index(T)
        return float(self.percentages()[e, h, candidate])

    def rows(self):
        pct = self.percentages()
        for e, est in enumerate(self.estimators):
            for h, T in enumerate(self.horizons):
                for c in range(self.n_candidates):
                    yield est, T, c, int(self.counts[e, h, c]), float(pct[e, h, c]), int(self.failed[e, h])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["estimator", "T", "candidate", "count", "pct", "failed"])
        for est, T, c, count, pct, failed in self.rows():
            writer.writerow([est, T, c, count, f"{pct:.1f}", failed])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config_digest": self.digest,
            "n_trials": self.n_trials,
            "rows": [
                {"estimator": est, "T": T, "candidate": c, "count": count,
                 "pct": round(pct, 1), "failed": failed}
                for est, T, c, count, pct, failed in self.rows()
            ],
        }


def trial_rng(seed: int, trial: int, horizon_index: int) -> RngState:
    return RngState(seed, (trial, horizon_index))


def run_montecarlo(config: ExperimentConfig, keep_choices: bool = False) -> TrialTable:
    """Simulate ``n_trials`` fresh trajectories per horizon and tally each estimator.

    Trial ``j`` at horizon index ``h`` draws from stream ``(seed, j, h)``;
    all estimators see the same trajectory.
    """
    hset, noise = config.hset, config.noise
    n_e, n_h, n_c = len(config.estimators), len(config.horizons), len(hset)
    counts = np.zeros((n_e, n_h, n_c), dtype=np.int64)
    failed = np.zeros((n_e, n_h), dtype=np.int64)
    choices = np.full((n_e, n_h, config.n_trials), -1, dtype=np.int64)

    for h, T in enumerate(config.horizons):
        rngs = [trial_rng(config.seed, j, h) for j in range(config.n_trials)]
        states, inputs, _ = simulate_batch(hset.true_system, noise, T, rngs, x0=config.x0)
        for j in range(config.n_trials):
            traj = Trajectory(states[j], inputs[j])
            for e, est in enumerate(config.estimators):
                try:
                    if est == MLE:
                        idx = mle_estimate(hset, noise, traj).index
                    else:
                        idx = ols_project_estimate(hset, traj).index
                except RankDeficient:
                    failed[e, h] += 1
                    continue
                counts[e, h, idx] += 1
                choices[e, h, j] = idx
    return TrialTable(config.estimators, config.horizons, n_c, config.n_trials,
                      counts, failed, config.seed, config.digest(),
                      choices if keep_choices else None)


def run_bounds(config: ExperimentConfig, T_bar_max: Optional[int] = None,
               convention: str = RECURSION) -> BoundReport:
    """Upper-bound check at every configured horizon plus the lower-bound horizon.

    ``T_bar_max`` defaults to 100 times the largest horizon and also caps
    the search for the smallest certified horizon.
    """
    hset, noise, delta = config.hset, config.noise, config.delta
    if T_bar_max is None:
        T_bar_max = 100 * max(config.horizons)
    checks = [theorem1_check(hset, noise, delta, T, convention) for T in config.horizons]
    per_cand = theorem2_per_candidate(hset, noise, delta, T_bar_max, convention=convention)
    return BoundReport(
        delta=delta,
        T_bar_max=T_bar_max,
        minimal_T_lb=theorem2_minimal_T(hset, noise, delta, T_bar_max, convention=convention),
        lb_per_candidate=per_cand,
        minimal_T_ub=theorem1_minimal_T(hset, noise, delta, T_bar_max, convention),
        T_ub_max=T_bar_max,
        checks=checks,
        convention=convention,
    )
