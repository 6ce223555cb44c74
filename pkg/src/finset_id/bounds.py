"""Analytic sample-complexity quantities for finite-set identification.

All quantities are instance specific: they depend on the true system, the
alternatives in the hypothesis set and the two noise covariances. Notation
used below, for an alternative ``i``:

* ``dA, dB = A_true - A_i, B_true - B_i``
* ``W`` is the whitening matrix ``Sigma_w^{-1/2}`` (inverse lower Cholesky
  factor), ``L_u, L_w`` the lower factors of ``Sigma_u, Sigma_w``
* ``S_t`` the state covariance at time ``t`` when starting from ``x0 = 0``
* ``Sigma_z(t) = I + W (dB Sigma_u dB' + dA S_t dA') W'``, the covariance
  of the whitened residual of candidate ``i`` at time ``t``.

With the default ``"recursion"`` convention ``S_0 = 0`` and
``S_{t+1} = A S_t A' + B Sigma_u B' + Sigma_w``, so ``S_t`` sums ``t`` terms.
The ``"inclusive"`` convention sums ``t + 1`` terms (``S_t`` is the
recursion's ``S_{t+1}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg_stats import RngState, frob2, symmetrize
from .lti import HypothesisSet, NoiseConfig, SystemParams, simulate_batch

__all__ = [
    "RECURSION",
    "INCLUSIVE",
    "BMSB_P",
    "CovarianceSeries",
    "ResidualCovariance",
    "ExcitationGramians",
    "BmsbParams",
    "CandidateBound",
    "Theorem1Check",
    "BoundReport",
    "AnticoncentrationResult",
    "state_covariance",
    "residual_covariance",
    "excitation_gramians",
    "snr_trace",
    "burn_in_blocks",
    "theorem1_check",
    "theorem1_minimal_T",
    "theorem2_threshold",
    "theorem2_lhs",
    "theorem2_per_candidate",
    "theorem2_minimal_T",
    "corollary1_bound",
    "chi_square_risk_threshold",
    "chi_square_tail_bound",
    "bmsb_params",
    "verify_anticoncentration",
]

RECURSION = "recursion"
INCLUSIVE = "inclusive"
_CONVENTIONS = (RECURSION, INCLUSIVE)

TRACE = "trace"
FROBENIUS_OF_SUMS = "frobenius_of_sums"
_VARIANTS = (TRACE, FROBENIUS_OF_SUMS)

# small-ball probability of the whitened residual process
BMSB_P = 3 / 20


def _check_convention(convention):
    if convention not in _CONVENTIONS:
        raise ValueError(f"convention must be one of {_CONVENTIONS}, got {convention!r}")


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}, got {variant!r}")


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


# ---------------------------------------------------------------------------
# covariance series


@dataclass(frozen=True)
class CovarianceSeries:
    state_cov: np.ndarray  # (t_max + 1, n_x, n_x)
    system: SystemParams
    noise: NoiseConfig
    convention: str = RECURSION

    def __getitem__(self, t) -> np.ndarray:
        return self.state_cov[t]

    def __len__(self):
        return self.state_cov.shape[0]

    @property
    def t_max(self) -> int:
        return self.state_cov.shape[0] - 1


def state_covariance(system: SystemParams, noise: NoiseConfig, t_max: int,
                     convention: str = RECURSION) -> CovarianceSeries:
    """State covariances ``S_0 .. S_{t_max}`` of a zero-start trajectory."""
    _check_convention(convention)
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    n = system.n_x
    a = system.a
    drive = system.b @ noise.sigma_u @ system.b.T + noise.sigma_w
    out = np.empty((t_max + 1, n, n))
    cur = np.zeros((n, n)) if convention == RECURSION else symmetrize(drive)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(t_max + 1):
            out[t] = cur
            cur = symmetrize(a @ cur @ a.T + drive)
    out.flags.writeable = False
    return CovarianceSeries(out, system, noise, convention)


def _series_for(hset, noise, t_max, convention, series):
    if series is not None:
        if series.t_max < t_max:
            raise ValueError(f"covariance series covers t <= {series.t_max}, need {t_max}")
        return series
    return state_covariance(hset.true_system, noise, t_max, convention)


# ---------------------------------------------------------------------------
# residual covariance and excitation terms


@dataclass(frozen=True)
class ResidualCovariance:
    sigma_z: np.ndarray
    trace: float
    candidate: int
    t: int


def residual_covariance(hset: HypothesisSet, noise: NoiseConfig, i: int, t: int,
                        series: Optional[CovarianceSeries] = None,
                        convention: str = RECURSION) -> ResidualCovariance:
    """``Sigma_z(t)`` for candidate ``i``; pass ``series`` to reuse a covariance series."""
    series = _series_for(hset, noise, t, convention, series)
    da, db = hset.deltas(i)
    w = noise.w_whiten
    inner = db @ noise.sigma_u @ db.T + da @ series[t] @ da.T
    sigma_z = np.eye(hset.n_x) + symmetrize(w @ inner @ w.T)
    return ResidualCovariance(sigma_z, float(np.trace(sigma_z)), i, t)


@dataclass(frozen=True)
class ExcitationGramians:
    """``dA sum_{s<=t} A^s B L_u`` (input) and ``dA sum_{s<=t} A^s L_w`` (noise)."""

    lambda_u: np.ndarray
    lambda_w: np.ndarray
    candidate: int
    t: int


def _power_sum(a: np.ndarray, t: int) -> np.ndarray:
    acc = np.zeros_like(a)
    power = np.eye(a.shape[0])
    for _ in range(t + 1):
        acc = acc + power
        power = power @ a
    return acc


def excitation_gramians(hset: HypothesisSet, noise: NoiseConfig, i: int, t: int) -> ExcitationGramians:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    true = hset.true_system
    da, _ = hset.deltas(i)
    acc = _power_sum(true.a, t)
    lam_u = da @ acc @ true.b @ noise.u_factor.lower
    lam_w = da @ acc @ noise.w_factor.lower
    return ExcitationGramians(lam_u, lam_w, i, t)


def _input_term(hset, noise, i) -> float:
    """``||W dB L_u||_F^2``: the direct input contribution, constant in time."""
    _, db = hset.deltas(i)
    return frob2(noise.w_whiten @ db @ noise.u_factor.lower)


def _state_terms(hset, noise, series) -> np.ndarray:
    """``Tr(W dA S_t dA' W')`` for every candidate and every ``t`` in ``series``.

    Shape ``(len(hset), len(series))``; the true candidate's row is zero.
    """
    w = noise.w_whiten
    out = np.zeros((len(hset), len(series)))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(hset)):
            da, _ = hset.deltas(i)
            m = w @ da
            out[i] = np.einsum("ij,tjk,ik->t", m, series.state_cov, m)
    return out


def snr_trace(hset: HypothesisSet, noise: NoiseConfig, i: int, half_block: int,
              variant: str = TRACE, convention: str = RECURSION,
              series: Optional[CovarianceSeries] = None) -> float:
    """Signal-to-noise term ``Tr(Sigma_z(half_block))`` for candidate ``i``.

    ``variant="frobenius_of_sums"`` instead evaluates
    ``n_x + ||W dB L_u||^2 + ||W Lambda_u(t)||^2 + ||W Lambda_w(t)||^2`` with the
    summed excitation matrices of `excitation_gramians`. Squaring a sum of
    powers adds cross terms the trace does not contain, so this is kept only
    as a diagnostic.
    """
    _check_variant(variant)
    if half_block < 0:
        raise ValueError(f"half_block must be >= 0, got {half_block}")
    if variant == TRACE:
        return residual_covariance(hset, noise, i, half_block, series, convention).trace
    g = excitation_gramians(hset, noise, i, half_block)
    w = noise.w_whiten
    return hset.n_x + _input_term(hset, noise, i) + frob2(w @ g.lambda_u) + frob2(w @ g.lambda_w)


# ---------------------------------------------------------------------------
# upper bound


def burn_in_blocks(n_x: int, n_alternatives: int, delta: float) -> int:
    """Smallest number of blocks ``floor(T/k)`` meeting the burn-in condition.

    ``exp(-p m / 16) <= delta / (2 n_x N)`` with ``p = 3/20``, i.e.
    ``m >= (320/3) log(2 n_x N / delta)``.
    """
    _check_delta(delta)
    if n_alternatives == 0:
        return 0
    need = (16.0 / BMSB_P) * math.log(2 * n_x * n_alternatives / delta)
    return max(0, math.ceil(need))


def chi_square_risk_threshold(n_x: int) -> float:
    """``sqrt(n_x) + n_x``, the envelope the true model's risk stays below."""
    if n_x < 1:
        raise ValueError("n_x must be >= 1")
    return math.sqrt(n_x) + n_x


def chi_square_tail_bound(T: int) -> float:
    """Probability bound ``exp(-T/8)`` for the true risk exceeding the envelope."""
    return math.exp(-T / 8.0)


@dataclass(frozen=True)
class CandidateBound:
    index: int
    snr_trace: float
    eq9b_lhs: float
    eq9b_rhs: float
    thm2_lhs: float

    @property
    def margin(self) -> float:
        return self.eq9b_rhs - self.eq9b_lhs

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "snr_trace": self.snr_trace,
            "eq9b_lhs": self.eq9b_lhs,
            "eq9b_rhs": self.eq9b_rhs,
            "thm2_lhs": self.thm2_lhs,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class Theorem1Check:
    """Outcome of the upper-bound search at one horizon ``T``.

    ``witness_k`` is the smallest block length meeting both conditions, or
    ``None``. Per-candidate terms are reported at ``witness_k`` when the
    check passes and otherwise at ``best_k``, the block length with the
    largest worst-case margin among those meeting the burn-in condition
    (among all ``k`` if none does).
    """

    T: int
    delta: float
    satisfied: bool
    witness_k: Optional[int]
    best_k: int
    burn_in_blocks: int
    burn_in_satisfied: bool
    per_candidate: list

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "delta": self.delta,
            "satisfied": self.satisfied,
            "burn_in_satisfied": self.burn_in_satisfied,
            "burn_in_blocks": self.burn_in_blocks,
            "witness_k": self.witness_k,
            "best_k": self.best_k,
            "per_candidate": [c.to_dict() for c in self.per_candidate],
        }


def theorem1_check(hset: HypothesisSet, noise: NoiseConfig, delta: float, T: int,
                   convention: str = RECURSION) -> Theorem1Check:
    """Search ``k in [1, T]`` for a block length certifying the MLE at horizon ``T``.

    The certificate needs ``floor(T/k) >= burn_in_blocks`` and, for every
    alternative ``i``,
    ``sqrt(n_x) + n_x <= 9 k floor(T/k) / (3200 T) * Tr(Sigma_z(floor(k/2)))``.
    """
    _check_delta(delta)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    alts = hset.alternatives
    n_x = hset.n_x
    m_req = burn_in_blocks(n_x, len(alts), delta)
    series = state_covariance(hset.true_system, noise, T - 1, convention)
    state_terms = _state_terms(hset, noise, series)  # (N+1, T)
    input_terms = np.array([_input_term(hset, noise, i) for i in range(len(hset))])
    traces = n_x + input_terms[:, None] + state_terms
    with np.errstate(over="ignore", invalid="ignore"):
        info = T * input_terms + state_terms.sum(axis=1)

    ks = np.arange(1, T + 1)
    blocks = T // ks
    burn = blocks >= m_req
    factor = (BMSB_P**2 / 8.0) * ks * blocks / T
    lhs = chi_square_risk_threshold(n_x)
    if alts:
        rhs = factor[None, :] * traces[alts][:, ks // 2]  # (N, T)
        worst = (rhs - lhs).min(axis=0)
    else:
        rhs = np.zeros((0, T))
        worst = np.full(T, np.inf)
    ok = burn & (worst >= 0.0)

    if ok.any():
        pick = int(np.flatnonzero(ok)[0])
        witness = int(ks[pick])
        # the second burn-in condition is implied by the first
        assert T >= 8.0 * math.log(2.0 / delta)
    else:
        witness = None
        pool = np.flatnonzero(burn) if burn.any() else np.arange(T)
        pick = int(pool[np.argmax(worst[pool])])
    k = int(ks[pick])

    per_candidate = []
    for row, i in enumerate(alts):
        per_candidate.append(CandidateBound(
            i,
            float(traces[i, k // 2]),
            lhs,
            float(rhs[row, pick]),
            float(info[i]),
        ))
    return Theorem1Check(T, delta, witness is not None, witness, k, m_req,
                         bool(burn.any()), per_candidate)


def theorem1_minimal_T(hset: HypothesisSet, noise: NoiseConfig, delta: float, T_max: int,
                       convention: str = RECURSION) -> Optional[int]:
    """Smallest ``T <= T_max`` passing `theorem1_check`, or ``None``.

    For fixed ``k`` the factor ``k floor(T/k) / T`` is at most one, with
    equality at multiples of ``k``, and the burn-in needs ``T >= k m``. So
    the minimal horizon is ``k m`` for the smallest ``k`` whose trace
    condition holds at factor one.
    """
    _check_delta(delta)
    alts = hset.alternatives
    n_x = hset.n_x
    m_req = burn_in_blocks(n_x, len(alts), delta)
    if not alts:
        return 1
    k_max = T_max // m_req
    if k_max < 1:
        return None
    series = state_covariance(hset.true_system, noise, k_max // 2, convention)
    input_terms = np.array([_input_term(hset, noise, i) for i in range(len(hset))])
    traces = n_x + input_terms[:, None] + _state_terms(hset, noise, series)
    lhs = chi_square_risk_threshold(n_x)
    for k in range(1, k_max + 1):
        T = k * m_req
        factor = (BMSB_P**2 / 8.0) * k * (T // k) / T
        if np.all(factor * traces[alts, k // 2] >= lhs):
            return T
    return None


# ---------------------------------------------------------------------------
# lower bound


def theorem2_threshold(delta: float) -> float:
    """``2 log(1 / (2.4 delta))``."""
    _check_delta(delta)
    return 2.0 * math.log(1.0 / (2.4 * delta))


def theorem2_lhs(hset: HypothesisSet, noise: NoiseConfig, i: int, T_bar: int,
                 variant: str = TRACE, convention: str = RECURSION) -> float:
    """Accumulated information ``sum_{s<T_bar} Tr(W (dB Sigma_u dB' + dA S_s dA') W')``.

    Equals ``T_bar ||W dB L_u||^2 + sum_s Tr(W dA S_s dA' W')``. The
    ``"frobenius_of_sums"`` variant replaces each state term by
    ``||W Lambda_u(s)||^2 + ||W Lambda_w(s)||^2`` (diagnostic only).
    """
    _check_variant(variant)
    if T_bar < 1:
        raise ValueError(f"T_bar must be >= 1, got {T_bar}")
    total = T_bar * _input_term(hset, noise, i)
    if variant == TRACE:
        series = state_covariance(hset.true_system, noise, T_bar - 1, convention)
        with np.errstate(over="ignore", invalid="ignore"):
            return float(total + _state_terms(hset, noise, series)[i].sum())
    w = noise.w_whiten
    for s in range(T_bar):
        g = excitation_gramians(hset, noise, i, s)
        total += frob2(w @ g.lambda_u) + frob2(w @ g.lambda_w)
    return float(total)


def theorem2_per_candidate(hset: HypothesisSet, noise: NoiseConfig, delta: float,
                           T_bar_max: int, variant: str = TRACE,
                           convention: str = RECURSION) -> dict:
    """First ``T_bar <= T_bar_max`` at which each alternative's information
    reaches the threshold (``None`` if it never does).

    Scans incrementally and stops once every alternative has crossed.
    """
    _check_variant(variant)
    _check_convention(convention)
    thr = theorem2_threshold(delta)
    true = hset.true_system
    a = true.a
    alts = hset.alternatives
    w = noise.w_whiten
    drive = true.b @ noise.sigma_u @ true.b.T + noise.sigma_w
    input_terms = {i: _input_term(hset, noise, i) for i in alts}
    m = {i: w @ hset.deltas(i)[0] for i in alts}

    cov = np.zeros_like(a) if convention == RECURSION else symmetrize(drive)
    power_sum = np.zeros_like(a)
    power = np.eye(a.shape[0])
    bu = true.b @ noise.u_factor.lower
    lw = noise.w_factor.lower
    acc = {i: 0.0 for i in alts}
    first = {i: None for i in alts}
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(T_bar_max):
            if variant == FROBENIUS_OF_SUMS:
                power_sum = power_sum + power
                power = power @ a
            for i in alts:
                if first[i] is not None:
                    continue
                if variant == TRACE:
                    term = float(np.trace(m[i] @ cov @ m[i].T))
                else:
                    term = frob2(m[i] @ power_sum @ bu) + frob2(m[i] @ power_sum @ lw)
                acc[i] += input_terms[i] + term
                if acc[i] >= thr:
                    first[i] = s + 1
            if all(v is not None for v in first.values()):
                break
            cov = symmetrize(a @ cov @ a.T + drive)
    return first


def theorem2_minimal_T(hset: HypothesisSet, noise: NoiseConfig, delta: float,
                       T_bar_max: int, variant: str = TRACE,
                       convention: str = RECURSION) -> Optional[int]:
    """Smallest ``T_bar`` at which every alternative meets the lower-bound condition.

    Since the accumulated information is nondecreasing, this is the largest
    per-candidate crossing time. ``None`` means it exceeds ``T_bar_max``.
    """
    first = theorem2_per_candidate(hset, noise, delta, T_bar_max, variant, convention)
    if not first:
        return 1
    if any(v is None for v in first.values()):
        return None
    return max(first.values())


# ---------------------------------------------------------------------------
# anti-concentration


def corollary1_bound(k: int, nu: float, p: float, T: int, p_squared: bool = False):
    """Small-ball threshold and probability for a ``(k, nu, p)`` small-ball process.

    Returns ``(nu^2 p^2 / 8 * k floor(T/k), exp(-floor(T/k) p / 16))``. With
    ``p_squared=True`` the weaker exponent ``p^2 / 16`` is used instead.
    """
    if not 1 <= k <= T:
        raise ValueError(f"need 1 <= k <= T, got k={k}, T={T}")
    if nu <= 0:
        raise ValueError("nu must be positive")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    blocks = T // k
    threshold = nu**2 * p**2 / 8.0 * k * blocks
    rate = p**2 if p_squared else p
    return threshold, math.exp(-blocks * rate / 16.0)


@dataclass(frozen=True)
class BmsbParams:
    k: int
    gamma_sb: np.ndarray
    p: float = BMSB_P


def bmsb_params(hset: HypothesisSet, noise: NoiseConfig, i: int, k: int,
                series: Optional[CovarianceSeries] = None,
                convention: str = RECURSION) -> BmsbParams:
    """Small-ball parameters ``(k, Sigma_z(floor(k/2)), 3/20)`` of candidate ``i``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rc = residual_covariance(hset, noise, i, k // 2, series, convention)
    return BmsbParams(k, rc.sigma_z, BMSB_P)


@dataclass(frozen=True)
class AnticoncentrationResult:
    rates: np.ndarray  # per-coordinate violation fraction
    thresholds: np.ndarray  # per-coordinate small-ball threshold
    bound: float
    n_trials: int
    k: int
    T: int
    sums: np.ndarray = field(repr=False)  # (n_trials, n_x) per-coordinate sums of squares

    @property
    def std_error(self) -> float:
        """Binomial standard error at the analytic bound."""
        return math.sqrt(self.bound * (1.0 - self.bound) / self.n_trials)

    def within_contract(self, n_se: float = 3.0) -> bool:
        return bool(np.all(self.rates <= self.bound + n_se * self.std_error))


def verify_anticoncentration(hset: HypothesisSet, noise: NoiseConfig, i: int, k: int, T: int,
                             n_trials: int, rng: RngState, x0=None) -> AnticoncentrationResult:
    """Monte Carlo frequency of the per-coordinate small-ball event for candidate ``i``.

    For each of ``n_trials`` trajectories from the true system, coordinate
    ``l`` violates when ``sum_t z_t[l]^2 <= 9 k floor(T/k) / 3200 * Sigma_z(floor(k/2))[l, l]``,
    where ``z_t = W (x[t+1] - A_i x[t] - B_i u[t])``. Trial ``j`` uses stream
    ``rng.child(j)``.
    """
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    params = bmsb_params(hset, noise, i, k)
    diag = np.diag(params.gamma_sb)
    thresholds = np.empty(hset.n_x)
    bound = None
    for l in range(hset.n_x):
        thresholds[l], bound = corollary1_bound(k, math.sqrt(diag[l]), params.p, T)

    rngs = [rng.child(j) for j in range(n_trials)]
    states, inputs, _ = simulate_batch(hset.true_system, noise, T, rngs, x0=x0)
    cand = hset[i]
    resid = states[:, 1:] - states[:, :-1] @ cand.a.T - inputs @ cand.b.T
    z = resid @ noise.w_whiten.T
    sums = np.sum(z * z, axis=1)
    rates = np.mean(sums <= thresholds[None, :], axis=0)
    return AnticoncentrationResult(rates, thresholds, bound, n_trials, k, T, sums)


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class BoundReport:
    delta: float
    T_bar_max: int
    minimal_T_lb: Optional[int]
    lb_per_candidate: dict
    minimal_T_ub: Optional[int]
    T_ub_max: int
    checks: list
    convention: str = RECURSION

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "convention": self.convention,
            "T_bar_max": self.T_bar_max,
            "minimal_T_lb": self.minimal_T_lb,
            "lb_per_candidate": {str(k): v for k, v in self.lb_per_candidate.items()},
            "minimal_T_ub": self.minimal_T_ub,
            "T_ub_max": self.T_ub_max,
            "checks": [c.to_dict() for c in self.checks],
        }
