"""Collective decay modes of the coupling matrix and their mirror symmetry."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .coupling import (
    ChainConfig,
    build_coupling_matrix,
    build_mirror_matrix,
    nearest_pi_multiple,
)
from .errors import DegenerateUnresolved, NotDiagonalizable, OutOfPerturbativeRange

DEFAULT_SYMMETRY_TOL = 1e-6
CLUSTER_TOL = 1e-8
MAX_EIGENVECTOR_CONDITION = 1e14
PERTURBATIVE_RANGE = 0.3


class Symmetry(str, enum.Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"
    UNCLASSIFIED = "unclassified"

    def opposite(self) -> "Symmetry":
        if self is Symmetry.SYMMETRIC:
            return Symmetry.ANTISYMMETRIC
        if self is Symmetry.ANTISYMMETRIC:
            return Symmetry.SYMMETRIC
        return Symmetry.UNCLASSIFIED


@dataclass(frozen=True)
class DecayMode:
    """One collective mode.

    ``eigenvalue`` is the dimensionless eigenvalue of J. The mode amplitude
    evolves as ``exp(-gamma0 * eigenvalue * t / 2)``, so ``decay_rate`` is the
    decay rate of the excitation probability.
    """

    eigenvalue: complex
    decay_rate: float
    frequency_shift: float
    eigenvector: np.ndarray
    symmetry: Symmetry


@dataclass(frozen=True)
class SpectralDecomposition:
    config: ChainConfig
    modes: tuple[DecayMode, ...]
    eigenvector_condition: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def eigenvectors(self) -> np.ndarray:
        """Eigenvectors as columns, in mode order."""
        return np.column_stack([m.eigenvector for m in self.modes])

    def symmetry_counts(self) -> dict[Symmetry, int]:
        counts = {s: 0 for s in Symmetry}
        for mode in self.modes:
            counts[mode.symmetry] += 1
        return counts

    @property
    def superradiant(self) -> DecayMode:
        return self.modes[0]


def classify_symmetry(v: np.ndarray, P: np.ndarray, tol: float = DEFAULT_SYMMETRY_TOL) -> Symmetry:
    Pv = P @ v
    if np.linalg.norm(Pv - v) < tol:
        return Symmetry.SYMMETRIC
    if np.linalg.norm(Pv + v) < tol:
        return Symmetry.ANTISYMMETRIC
    return Symmetry.UNCLASSIFIED


def subspace_dimensions(n: int) -> tuple[int, int]:
    """Sizes of the (symmetric, anti-symmetric) mirror eigenspaces."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n + 1) // 2, n // 2


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Normalize ``v`` and rotate it so its first non-negligible entry is real positive."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    for c in v:
        if abs(c) > 1e-8:
            return v * (abs(c) / c)
    return v


def _clusters(values: np.ndarray) -> list[list[int]]:
    # union-find over near-equal eigenvalue pairs
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) < CLUSTER_TOL * max(1.0, abs(values[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _gram_schmidt(columns: np.ndarray, drop_tol: float) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for col in columns.T:
        w = col.astype(complex)
        for b in basis:
            w = w - np.vdot(b, w) * b
        # second pass for numerical orthogonality
        for b in basis:
            w = w - np.vdot(b, w) * b
        norm = np.linalg.norm(w)
        if norm > drop_tol:
            basis.append(w / norm)
    return basis


def _resolve_cluster(J: np.ndarray, P: np.ndarray, values: np.ndarray, tol: float):
    """Orthonormal mirror-adapted eigenbasis for one degenerate cluster."""
    m = len(values)
    n = J.shape[0]
    center = values.mean()
    # right singular vectors of the smallest singular values span the eigenspace
    _, sv, vh = np.linalg.svd(J - center * np.eye(n))
    if sv[-m] > 1e-6 * max(1.0, sv[0]):
        raise NotDiagonalizable(f"eigenvalue cluster near {center:.3g} is defective")
    space = vh[-m:].conj().T
    sym = _gram_schmidt((space + P @ space) / 2, drop_tol=math.sqrt(tol))
    anti = _gram_schmidt((space - P @ space) / 2, drop_tol=math.sqrt(tol))
    if len(sym) + len(anti) != m:
        raise DegenerateUnresolved(
            f"cluster of size {m} near {center:.3g} split into "
            f"{len(sym)} symmetric + {len(anti)} anti-symmetric vectors"
        )
    out = []
    for v in sym + anti:
        lam = np.vdot(v, J @ v)
        out.append((lam, v))
    return out


def _sort_key(mode: DecayMode):
    lam = mode.eigenvalue
    vec = tuple(x for c in mode.eigenvector for x in (round(c.real, 10), round(c.imag, 10)))
    return (-round(lam.real, 10), -round(lam.imag, 10), vec)


def decompose(
    J: np.ndarray, config: ChainConfig, tol: float = DEFAULT_SYMMETRY_TOL
) -> SpectralDecomposition:
    """Eigen-decompose ``J`` into mirror-classified decay modes.

    Modes are sorted by descending real part so ``modes[0]`` is the
    superradiant candidate. Degenerate clusters are re-expressed in the
    symmetric and anti-symmetric eigenspaces of the mirror operator.
    """
    if not 0 < tol < 0.1:
        raise ValueError("classification tolerance must lie in (0, 0.1)")
    J = np.asarray(J, dtype=complex)
    n = J.shape[0]
    if n != config.n:
        raise ValueError(f"matrix size {n} does not match config.n={config.n}")
    P = build_mirror_matrix(n)
    values, vectors = np.linalg.eig(J)

    pairs: list[tuple[complex, np.ndarray]] = []
    for group in _clusters(values):
        if len(group) == 1:
            i = group[0]
            pairs.append((values[i], vectors[:, i]))
        else:
            pairs.extend(_resolve_cluster(J, P, values[group], tol))

    modes = []
    for lam, v in pairs:
        v = fix_phase(v)
        lam = complex(lam)
        modes.append(
            DecayMode(
                eigenvalue=lam,
                decay_rate=config.gamma0 * lam.real,
                frequency_shift=config.gamma0 * lam.imag,
                eigenvector=v,
                symmetry=classify_symmetry(v, P, tol),
            )
        )
    modes.sort(key=_sort_key)
    V = np.column_stack([m.eigenvector for m in modes])
    condition = float(np.linalg.cond(V))
    if not condition < MAX_EIGENVECTOR_CONDITION:
        raise NotDiagonalizable(
            f"eigenvector condition number {condition:.3g} exceeds "
            f"{MAX_EIGENVECTOR_CONDITION:.0e}; use ODE evolution instead"
        )
    return SpectralDecomposition(config=config, modes=tuple(modes), eigenvector_condition=condition)


def decompose_config(config: ChainConfig, tol: float = DEFAULT_SYMMETRY_TOL) -> SpectralDecomposition:
    return decompose(build_coupling_matrix(config), config, tol)


def superradiant_pattern(n: int, k: int) -> np.ndarray:
    """Unnormalized superradiant vector at ``theta = k*pi``: all ones for even k,
    ``(-1, 1, -1, ...)`` for odd k."""
    if k % 2 == 0:
        return np.ones(n)
    return (-1.0) ** np.arange(1, n + 1)


def perturbative_superradiant(config: ChainConfig) -> tuple[complex, np.ndarray]:
    """First-order superradiant eigenvalue and eigenvector near ``theta = k*pi``.

    Uses ``lambda ~= n + delta * (w^T J'(k*pi) w) / (w^T w)`` where ``J'`` is
    the theta-derivative of J. For even k this is ``n + i*delta*(w^T M w)/(w^T w)``
    with ``M[j, l] = |j - l|``; for odd k the derivative carries the extra
    ``(-1)**|j-l|`` sign of ``J0``.
    """
    k, delta = nearest_pi_multiple(config.theta)
    if abs(delta) >= PERTURBATIVE_RANGE:
        raise OutOfPerturbativeRange(
            f"theta is {abs(delta):.3g} from {k}*pi; first-order expansion needs < {PERTURBATIVE_RANGE}"
        )
    n = config.n
    w = superradiant_pattern(n, k)
    dist = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    derivative = 1j * dist * (-1.0) ** (k * dist)
    lam = n + delta * (w @ derivative @ w) / (w @ w)
    return complex(lam), w / np.linalg.norm(w)


def expected_superradiant_symmetry(n: int, k: int) -> Symmetry:
    """Mirror class of the superradiant state at ``theta ~= k*pi``."""
    if k % 2 == 0 or n % 2 == 1:
        return Symmetry.SYMMETRIC
    return Symmetry.ANTISYMMETRIC


@dataclass(frozen=True)
class Theorem3Report:
    superradiant_symmetry: Symmetry
    protected_subspace: Symmetry
    max_protected_decay_rate: float


def verify_theorem3(config: ChainConfig, tol: float = DEFAULT_SYMMETRY_TOL) -> Theorem3Report:
    """Report the superradiant mode's mirror class and the fastest protected mode.

    ``max_protected_decay_rate`` is ``nan`` when the protected class is empty.
    """
    decomp = decompose_config(config, tol)
    sup = decomp.superradiant.symmetry
    protected = sup.opposite()
    rates = [m.decay_rate for m in decomp.modes if m.symmetry is protected]
    return Theorem3Report(
        superradiant_symmetry=sup,
        protected_subspace=protected,
        max_protected_decay_rate=max(rates) if rates else float("nan"),
    )
