"""LTI systems, finite hypothesis sets and trajectory simulation.

The data model is

    x[t+1] = A x[t] + B u[t] + w[t],   u[t] ~ N(0, Sigma_u),  w[t] ~ N(0, Sigma_w)

A horizon-``T`` trajectory holds states ``x[0..T]`` and inputs ``u[0..T-1]``,
i.e. exactly ``T`` transitions ``(x[t], u[t], x[t+1])``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import DimensionMismatch
from .linalg_stats import (
    CholeskyFactor,
    RngState,
    as_matrix,
    as_vector,
    cholesky,
    sample_gaussian,
)

__all__ = [
    "SystemParams",
    "HypothesisSet",
    "NoiseConfig",
    "Trajectory",
    "simulate",
    "simulate_batch",
    "transitions",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


@dataclass(frozen=True)
class SystemParams:
    """One candidate model ``(A, B)``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "A")
        b = as_matrix(self.b, "B")
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"A must be square, got {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise DimensionMismatch(f"B has {b.shape[0]} rows but A is {a.shape[0]}x{a.shape[0]}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_x(self) -> int:
        return self.a.shape[0]

    @property
    def n_u(self) -> int:
        return self.b.shape[1]

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.a))))


@dataclass(frozen=True)
class HypothesisSet:
    """Ordered candidates ``theta_0 .. theta_N``; ``true_index`` marks the data generator."""

    candidates: tuple
    true_index: int = 0

    def __post_init__(self):
        cands = tuple(
            c if isinstance(c, SystemParams) else SystemParams(*c) for c in self.candidates
        )
        if not cands:
            raise ValueError("hypothesis set must contain at least one candidate")
        shape = (cands[0].n_x, cands[0].n_u)
        for i, c in enumerate(cands):
            if (c.n_x, c.n_u) != shape:
                raise DimensionMismatch(
                    f"candidate {i} has (n_x, n_u) = {(c.n_x, c.n_u)}, expected {shape}"
                )
        for i in range(len(cands)):
            for j in range(i + 1, len(cands)):
                if np.array_equal(cands[i].a, cands[j].a) and np.array_equal(cands[i].b, cands[j].b):
                    raise ValueError(f"candidates {i} and {j} are identical")
        if not 0 <= self.true_index < len(cands):
            raise ValueError(f"true_index {self.true_index} out of range [0, {len(cands) - 1}]")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "true_index", int(self.true_index))

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, i) -> SystemParams:
        return self.candidates[i]

    @property
    def true_system(self) -> SystemParams:
        return self.candidates[self.true_index]

    @property
    def n_x(self) -> int:
        return self.candidates[0].n_x

    @property
    def n_u(self) -> int:
        return self.candidates[0].n_u

    @property
    def alternatives(self) -> list:
        """Indices of every candidate other than the true one."""
        return [i for i in range(len(self)) if i != self.true_index]

    def deltas(self, i):
        """``(A_true - A_i, B_true - B_i)``."""
        t, c = self.true_system, self.candidates[i]
        return t.a - c.a, t.b - c.b


class NoiseConfig:
    """Input and process-noise covariances with their Cholesky factors.

    ``w_factor`` and ``u_factor`` are the lower square roots of ``Sigma_w``
    and ``Sigma_u``; ``w_whiten`` is ``w_factor^{-1}`` so that
    ``w_whiten @ Sigma_w @ w_whiten.T = I``.
    """

    def __init__(self, sigma_w, sigma_u):
        self.w_factor = cholesky(sigma_w)
        self.u_factor = cholesky(sigma_u)
        self.sigma_w = as_matrix(sigma_w, "sigma_w")
        self.sigma_u = as_matrix(sigma_u, "sigma_u")
        self.w_whiten = self.w_factor.inverse()

    @classmethod
    def noiseless(cls, n_x: int, n_u: int, input_factor: Optional[CholeskyFactor] = None):
        """Zero process noise (and zero inputs unless ``input_factor`` is given).

        For simulation only: there is no whitening matrix, so it cannot be
        used to evaluate costs or bounds.
        """
        obj = cls.__new__(cls)
        obj.w_factor = CholeskyFactor.zeros(n_x)
        obj.u_factor = input_factor if input_factor is not None else CholeskyFactor.zeros(n_u)
        obj.sigma_w = obj.w_factor.reconstruct()
        obj.sigma_u = obj.u_factor.reconstruct()
        obj.w_whiten = None
        return obj

    @property
    def n_x(self) -> int:
        return self.w_factor.dim

    @property
    def n_u(self) -> int:
        return self.u_factor.dim

    def scaled(self, c_w: float = 1.0, c_u: float = 1.0) -> "NoiseConfig":
        return NoiseConfig(c_w * self.sigma_w, c_u * self.sigma_u)

    def __repr__(self):
        return f"NoiseConfig(sigma_w={self.sigma_w.tolist()}, sigma_u={self.sigma_u.tolist()})"


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (T+1, n_x)
    inputs: np.ndarray  # (T, n_u)
    noises: Optional[np.ndarray] = None  # (T, n_x)

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        inputs = np.asarray(self.inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs.reshape(states.shape[0] - 1, -1)
        if inputs.shape[0] + 1 != states.shape[0]:
            raise DimensionMismatch("trajectory needs exactly one more state than inputs")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        if self.noises is not None:
            noises = np.asarray(self.noises, dtype=float)
            if noises.shape != (inputs.shape[0], states.shape[1]):
                raise DimensionMismatch(f"noises have shape {noises.shape}")
            object.__setattr__(self, "noises", noises)

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_x(self) -> int:
        return self.states.shape[1]

    @property
    def n_u(self) -> int:
        return self.inputs.shape[1]


def _check_dims(system: SystemParams, noise: NoiseConfig):
    if (noise.n_x, noise.n_u) != (system.n_x, system.n_u):
        raise DimensionMismatch(
            f"noise is for (n_x, n_u) = {(noise.n_x, noise.n_u)}, "
            f"system is {(system.n_x, system.n_u)}"
        )


def simulate_batch(
    system: SystemParams,
    noise: NoiseConfig,
    horizon: int,
    rngs: Sequence[RngState],
    x0=None,
):
    """Simulate one trajectory per RNG stream, vectorised over streams.

    Each stream first draws all ``horizon`` inputs, then all process noises.
    Returns ``(states, inputs, noises)`` with shapes ``(n, T+1, n_x)``,
    ``(n, T, n_u)`` and ``(n, T, n_x)``.
    """
    _check_dims(system, noise)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    n_x, n_u = system.n_x, system.n_u
    x0 = np.zeros(n_x) if x0 is None else as_vector(x0, n_x, "x0")
    zeros_u, zeros_w = np.zeros(n_u), np.zeros(n_x)

    n = len(rngs)
    inputs = np.empty((n, horizon, n_u))
    noises = np.empty((n, horizon, n_x))
    for j, rng in enumerate(rngs):
        inputs[j] = sample_gaussian(zeros_u, noise.u_factor, rng, size=horizon)
        noises[j] = sample_gaussian(zeros_w, noise.w_factor, rng, size=horizon)

    states = np.empty((n, horizon + 1, n_x))
    states[:, 0] = x0
    drive = _rowmul(inputs, system.b) + noises
    # no stability check: overflow in long unstable runs surfaces as inf
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(horizon):
            states[:, t + 1] = _rowmul(states[:, t], system.a) + drive[:, t]
    return states, inputs, noises


def _rowmul(v: np.ndarray, m: np.ndarray) -> np.ndarray:
    """``v @ m.T`` over the last axis, accumulated column by column.

    Unlike BLAS, the rounding does not depend on how many rows are stacked,
    so batched and single simulations agree bit for bit.
    """
    out = v[..., 0:1] * m[:, 0]
    for k in range(1, m.shape[1]):
        out = out + v[..., k:k + 1] * m[:, k]
    return out


def simulate(system: SystemParams, noise: NoiseConfig, x0, horizon: int,
             rng: RngState) -> Trajectory:
    """Simulate a single trajectory; identical to one stream of `simulate_batch`.

    ``x0=None`` starts from the origin.
    """
    states, inputs, noises = simulate_batch(system, noise, horizon, [rng], x0=x0)
    return Trajectory(states[0], inputs[0], noises[0])


def transitions(traj: Trajectory):
    """``[(x_t, u_t, x_{t+1}) for t in 0..T-1]``."""
    return [
        (traj.states[t], traj.inputs[t], traj.states[t + 1]) for t in range(traj.horizon)
    ]


def write_trajectory_csv(traj: Trajectory, fh=None) -> str:
    """Write ``t, x0.., u0..`` rows; the last row's inputs are blank.

    Returns the CSV text; also writes it to ``fh`` when given.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"x{i}" for i in range(traj.n_x)] + [f"u{i}" for i in range(traj.n_u)])
    for t in range(traj.horizon + 1):
        row = [t] + [repr(float(v)) for v in traj.states[t]]
        if t < traj.horizon:
            row += [repr(float(v)) for v in traj.inputs[t]]
        else:
            row += [""] * traj.n_u
        writer.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_trajectory_csv(fh) -> Trajectory:
    reader = csv.reader(fh)
    header = next(reader)
    x_cols = [k for k, h in enumerate(header) if h.startswith("x")]
    u_cols = [k for k, h in enumerate(header) if h.startswith("u")]
    states, inputs = [], []
    rows = [r for r in reader if r]
    for k, row in enumerate(rows):
        if int(row[0]) != k:
            raise ValueError(f"row {k} has t={row[0]}")
        states.append([float(row[c]) for c in x_cols])
        if k < len(rows) - 1:
            inputs.append([float(row[c]) for c in u_cols])
        elif any(row[c].strip() for c in u_cols):
            raise ValueError("last row must have blank inputs")
    if len(states) < 2:
        raise ValueError("trajectory CSV needs at least two rows")
    return Trajectory(np.array(states), np.array(inputs).reshape(len(states) - 1, len(u_cols)))
