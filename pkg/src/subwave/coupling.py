"""Closed-form matrices for a chain of qubits coupled to a 1D waveguide.

All matrices are plain dense numpy arrays. The coupling matrix is complex
symmetric (not Hermitian): ``J[j, l] = exp(i * theta * |j - l|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChainConfig:
    """A chain of ``n`` identical qubits with phase ``theta`` between neighbours.

    ``theta`` is used as given (no reduction mod 2*pi). ``gamma0`` is the
    single-emitter decay rate into the waveguide.
    """

    n: int
    theta: float
    gamma0: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        if not (self.gamma0 > 0 and math.isfinite(self.gamma0)):
            raise ValueError(f"gamma0 must be positive, got {self.gamma0!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "gamma0", float(self.gamma0))

    def with_theta(self, theta: float) -> "ChainConfig":
        return ChainConfig(self.n, theta, self.gamma0)


def _distance(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :])


def build_coupling_matrix(config: ChainConfig) -> np.ndarray:
    return np.exp(1j * config.theta * _distance(config.n))


def build_mirror_matrix(n: int) -> np.ndarray:
    """Anti-diagonal permutation reversing the qubit order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.eye(n)[::-1].copy()


def build_perturbation_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(J0, M)`` with ``J ~= J0 + i*delta*M`` near ``theta = 2*k*pi``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.ones((n, n)), _distance(n).astype(float)


def lu_closed_form(config: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Triangular factors with ``L @ U == J`` and unit diagonal on ``L``.

    ``L[a, j] = p**(a-j)`` below the diagonal; ``U`` has first row
    ``p**(j-1)`` and rows below it ``p**(j-a) * (1 - p**2)`` on and above
    the diagonal, where ``p = exp(i*theta)``.
    """
    n = config.n
    a = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    # p**k evaluated as exp(i*theta*k) to keep unit modulus exact for large k
    lower = np.where(a >= j, np.exp(1j * config.theta * (a - j)), 0)
    one_minus_p2 = 1 - np.exp(2j * config.theta)
    upper = np.where(a <= j, np.exp(1j * config.theta * (j - a)) * one_minus_p2, 0)
    upper[0, :] = np.exp(1j * config.theta * np.arange(n))
    return lower.astype(complex), upper.astype(complex)


def determinant_closed_form(config: ChainConfig) -> complex:
    return complex((1 - np.exp(2j * config.theta)) ** (config.n - 1))


def numeric_determinant(matrix: np.ndarray) -> complex:
    """Generic determinant via partial-pivoted LU (LAPACK), for cross-checks."""
    return complex(np.linalg.det(matrix))


def nearest_pi_multiple(theta: float) -> tuple[int, float]:
    """Return ``(k, delta)`` with ``theta = k*pi + delta`` and ``|delta| <= pi/2``."""
    k = round(theta / math.pi)
    return int(k), theta - k * math.pi


def is_singular(theta: float, tol: float) -> bool:
    """True when ``theta`` lies within ``tol`` (absolute) of an integer multiple of pi."""
    if not 0 < tol < math.pi / 2:
        raise ValueError("tol must lie in (0, pi/2)")
    return abs(nearest_pi_multiple(theta)[1]) < tol
