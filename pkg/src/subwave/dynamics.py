"""Time evolution of single-excitation qubit amplitudes.

The amplitudes obey ``d(alpha)/dt = -(gamma0 / 2) * J @ alpha``. Two
independent routes are provided: a closed-form eigenmode expansion and a
fixed-step classical Runge-Kutta integrator that only touches ``J``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .coupling import ChainConfig, build_coupling_matrix
from .errors import IllConditioned, NotDiagonalizable
from .spectral import SpectralDecomposition, decompose

MAX_EXPANSION_CONDITION = 1e12
STORAGE_HORIZON = 1e6


@dataclass(frozen=True)
class QubitState:
    """Complex excitation amplitudes, one per qubit."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a non-empty vector")
        if np.vdot(amps, amps).real > 1 + 1e-12:
            raise ValueError("total excitation probability exceeds 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "QubitState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @property
    def n(self) -> int:
        return self.amplitudes.size

    @property
    def probability(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class ModeCoefficients:
    coefficients: np.ndarray
    residual: float


@dataclass(frozen=True)
class EvolutionTrace:
    times: np.ndarray
    amplitudes: np.ndarray  # shape (len(times), n)

    @property
    def per_qubit_probability(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def total_probability(self) -> np.ndarray:
        return self.per_qubit_probability.sum(axis=1)


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, QubitState):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def _check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("times must be non-empty")
    if times[0] < 0:
        raise ValueError("times must start at t >= 0")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    return times


def expand_in_modes(state, decomp: SpectralDecomposition) -> ModeCoefficients:
    """Solve ``V @ x = alpha0`` for the mode coefficients ``x``."""
    if not decomp.eigenvector_condition < MAX_EXPANSION_CONDITION:
        raise IllConditioned(
            f"eigenvector condition {decomp.eigenvector_condition:.3g} >= "
            f"{MAX_EXPANSION_CONDITION:.0e}; use evolve_ode"
        )
    alpha0 = _amplitudes(state)
    V = decomp.eigenvectors
    if alpha0.size != V.shape[0]:
        raise ValueError("state length does not match the decomposition")
    x = np.linalg.solve(V, alpha0)
    return ModeCoefficients(x, float(np.linalg.norm(V @ x - alpha0)))


def evolve_eigen(state, decomp: SpectralDecomposition, times) -> EvolutionTrace:
    times = _check_times(times)
    x = expand_in_modes(state, decomp).coefficients
    rates = decomp.config.gamma0 * decomp.eigenvalues / 2
    factors = np.exp(-np.outer(times, rates)) * x
    return EvolutionTrace(times, factors @ decomp.eigenvectors.T)


def ode_step_size(config: ChainConfig, times: np.ndarray) -> float:
    """Internal RK4 step: ``min(0.01 / (gamma0 * n), smallest sampling gap / 4)``."""
    h = 0.01 / (config.gamma0 * config.n)
    gaps = np.diff(np.concatenate([[0.0], times]))
    gaps = gaps[gaps > 0]
    if gaps.size:
        h = min(h, gaps.min() / 4)
    return h


def evolve_ode(state, J: np.ndarray, config: ChainConfig, times, max_step: float | None = None) -> EvolutionTrace:
    """Classical fourth-order Runge-Kutta at a fixed internal step.

    Each requested time is reached exactly by splitting the interval from the
    previous sample into equal steps no longer than the internal step.
    """
    times = _check_times(times)
    h = ode_step_size(config, times) if max_step is None else max_step
    A = -(config.gamma0 / 2) * np.asarray(J, dtype=complex)
    alpha = _amplitudes(state).copy()
    t = 0.0
    out = np.empty((times.size, alpha.size), dtype=complex)
    for i, target in enumerate(times):
        span = target - t
        if span > 0:
            steps = math.ceil(span / h - 1e-9)
            dt = span / steps
            for _ in range(steps):
                k1 = A @ alpha
                k2 = A @ (alpha + dt / 2 * k1)
                k3 = A @ (alpha + dt / 2 * k2)
                k4 = A @ (alpha + dt * k3)
                alpha = alpha + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = target
        out[i] = alpha
    return EvolutionTrace(times, out)


def _probability_function(state, config: ChainConfig):
    alpha0 = _amplitudes(state)
    J = build_coupling_matrix(config)
    try:
        decomp = decompose(J, config)
        x = expand_in_modes(alpha0, decomp).coefficients
    except (NotDiagonalizable, IllConditioned):
        A = -(config.gamma0 / 2) * J

        def probability(t: float) -> float:
            a = scipy.linalg.expm(A * t) @ alpha0
            return float(np.vdot(a, a).real)

        return probability

    V = decomp.eigenvectors
    rates = config.gamma0 * decomp.eigenvalues / 2

    def probability(t: float) -> float:
        a = V @ (x * np.exp(-rates * t))
        return float(np.vdot(a, a).real)

    return probability


def storage_time(state, config: ChainConfig, threshold: float, samples: int = 1000) -> float:
    """First time the total excitation probability falls to ``threshold`` of its start.

    Returns ``math.inf`` if the drop does not happen before ``1e6 / gamma0``.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    prob = _probability_function(state, config)
    p0 = prob(0.0)
    if p0 <= 0:
        raise ValueError("state has zero excitation probability")
    target = threshold * p0
    horizon = STORAGE_HORIZON / config.gamma0

    lo_window, hi_window = 0.0, 1.0 / config.gamma0
    crossing = None
    while crossing is None:
        grid = np.linspace(lo_window, hi_window, samples + 1)
        values = np.array([prob(t) for t in grid])
        below = np.nonzero(values <= target)[0]
        if below.size:
            i = below[0]
            crossing = (grid[i - 1], grid[i]) if i > 0 else (grid[0], grid[0])
        elif hi_window >= horizon:
            return math.inf
        else:
            lo_window, hi_window = hi_window, min(2 * hi_window, horizon)

    lo, hi = crossing
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if prob(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi
