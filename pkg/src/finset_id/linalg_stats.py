"""Small dense linear algebra and seeded Gaussian sampling.

Matrices are plain ``numpy`` arrays; the helpers here add the validation
and error types the rest of the package relies on. Everything operates on
tiny matrices (a handful of states), so accuracy is preferred over speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import (
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
)

__all__ = [
    "as_matrix",
    "as_vector",
    "CholeskyFactor",
    "RngState",
    "cholesky",
    "sample_gaussian",
    "least_squares",
    "spectral_norm",
]

SYMMETRY_RTOL = 1e-12
RANK_RTOL = 1e-10
UINT64_MAX = 2**64 - 1


def as_matrix(m, name="matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D float array, raising on anything else."""
    arr = np.array(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


def as_vector(v, n=None, name="vector") -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T`` equal to the source matrix.

    Zero diagonals are tolerated so degenerate (noise-free) factors can be
    built for testing; `cholesky` itself only ever returns strictly
    positive diagonals.
    """

    lower: np.ndarray

    def __post_init__(self):
        lower = as_matrix(self.lower, "lower")
        if lower.shape[0] != lower.shape[1]:
            raise DimensionMismatch(f"Cholesky factor must be square, got {lower.shape}")
        if np.any(np.triu(lower, 1) != 0.0):
            raise ValueError("Cholesky factor must be lower-triangular")
        if np.any(np.diag(lower) < 0.0):
            raise ValueError("Cholesky factor must have a nonnegative diagonal")
        object.__setattr__(self, "lower", lower)

    @classmethod
    def zeros(cls, n: int) -> "CholeskyFactor":
        return cls(np.zeros((n, n)))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(np.diag(self.lower) == 0.0))

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T

    def inverse(self) -> np.ndarray:
        """``L^{-1}``, i.e. the whitening map with ``L^{-1} M L^{-T} = I``."""
        if self.is_degenerate:
            raise NotPositiveDefinite("degenerate factor has no inverse")
        inv = scipy.linalg.solve_triangular(self.lower, np.eye(self.dim), lower=True)
        inv.flags.writeable = False
        return inv


def cholesky(m) -> CholeskyFactor:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises
    ------
    NotSymmetric
        If ``max|m - m.T|`` exceeds ``1e-12 * max|m|``.
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"cholesky needs a square matrix, got {m.shape}")
    scale = np.max(np.abs(m))
    if np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    try:
        lower = np.linalg.cholesky(0.5 * (m + m.T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.any(np.diag(lower) <= 0.0):
        raise NotPositiveDefinite("nonpositive pivot")
    return CholeskyFactor(lower)


@dataclass
class RngState:
    """Seeded random stream.

    ``(seed, stream)`` fully determines the sequence of draws; streams are
    derived with ``numpy.random.SeedSequence`` spawn keys so stream ``(j,)``
    and ``(j + 1,)`` are statistically independent. The object advances as
    it is used and must not be shared between concurrent tasks.
    """

    seed: int
    stream: tuple = ()
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.stream, (int, np.integer)):
            self.stream = (int(self.stream),)
        self.stream = tuple(int(s) for s in self.stream)
        if not 0 <= int(self.seed) <= UINT64_MAX:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(not 0 <= s <= UINT64_MAX for s in self.stream):
            raise ValueError("stream counters must be 64-bit unsigned integers")
        self.seed = int(self.seed)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *key: int) -> "RngState":
        """Fresh, independent stream ``stream + key`` under the same seed."""
        return RngState(self.seed, self.stream + tuple(key))

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)


def sample_gaussian(mean, cov_factor: CholeskyFactor, rng: RngState, size=None) -> np.ndarray:
    """Draw ``mean + L @ xi`` with ``xi`` i.i.d. standard normal.

    With ``size`` set, returns ``size`` stacked draws (shape ``(size, n)``);
    the rows are identical to ``size`` consecutive single draws.
    """
    mean = as_vector(mean, name="mean")
    if mean.shape[0] != cov_factor.dim:
        raise DimensionMismatch(
            f"mean has length {mean.shape[0]} but factor is {cov_factor.dim}x{cov_factor.dim}"
        )
    n = mean.shape[0]
    if size is None:
        xi = rng.standard_normal(n)
        return mean + cov_factor.lower @ xi
    xi = rng.standard_normal((size, n))
    return mean + xi @ cov_factor.lower.T


def least_squares(regressors, targets) -> np.ndarray:
    """Minimiser of ``||targets - regressors @ theta||_F``.

    ``regressors`` is ``T x p`` and ``targets`` ``T x q``; returns ``p x q``.
    Raises `RankDeficient` when the smallest singular value of the regressors
    falls below ``1e-10`` times the largest.
    """
    X = np.asarray(regressors, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("regressors must be 2-D")
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != X.shape[0]:
        raise DimensionMismatch(
            f"regressors have {X.shape[0]} rows but targets have {Y.shape[0]}"
        )
    T, p = X.shape
    if T < p:
        raise RankDeficient(f"need at least {p} rows, got {T}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise RankDeficient("non-finite data in least squares")
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < RANK_RTOL * sv[0]:
        raise RankDeficient(
            f"regressors are rank deficient (singular values {sv[-1]:.3g} / {sv[0]:.3g})"
        )
    theta, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return theta


def spectral_norm(m, return_vector=False):
    """Largest singular value of ``m``.

    With ``return_vector=True`` also returns a unit right singular vector
    ``v`` attaining ``||m v|| = ||m||_2``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _, s, vt = np.linalg.svd(m)
    norm = float(s[0]) if s.size else 0.0
    if return_vector:
        return norm, vt[0]
    return norm


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def frob2(m) -> float:
    """Squared Frobenius norm."""
    m = np.asarray(m, dtype=float)
    return float(np.sum(m * m))


def stack_params(a, b) -> np.ndarray:
    """``[a, b]`` as one parameter matrix."""
    return np.hstack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)])

