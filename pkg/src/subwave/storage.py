"""Storage-state selection: symmetry-protected versus optimal eigenmode.

Near ``theta = k*pi`` the coupling matrix approaches the rank-one matrix
``w w^T`` (``w`` the superradiant pattern), and all other modes collapse onto
its null space. The ideal (zero-imperfection) subradiant states used for
state preparation are the limits of those modes, obtained from first-order
degenerate perturbation theory inside each mirror class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import (
    ChainConfig,
    build_mirror_matrix,
    is_singular,
    nearest_pi_multiple,
)
from .dynamics import QubitState, expand_in_modes, storage_time
from .errors import NoProtectedSubspace
from .spectral import (
    DecayMode,
    SpectralDecomposition,
    Symmetry,
    decompose_config,
    expected_superradiant_symmetry,
    fix_phase,
    superradiant_pattern,
)

SINGULAR_TOL = 1e-8
# wide enough to cover the theta = 2.1*pi working point (delta ~ 0.314)
PROTECTED_RANGE = math.pi / 8
PROBE_DELTA = 1e-3


@dataclass(frozen=True)
class StrategyReport:
    config: ChainConfig
    optimal_mode: DecayMode
    protected_best: DecayMode
    superradiant_mode: DecayMode
    superradiant_overlap_optimal: float
    superradiant_overlap_protected: float
    storage_time_optimal: float
    storage_time_protected: float
    state_optimal: QubitState
    state_protected: QubitState


def optimal_storage_state(config: ChainConfig) -> DecayMode:
    """Mode with the smallest decay rate (ties: smaller |frequency shift|, then mode order)."""
    modes = decompose_config(config).modes
    best = min(
        range(len(modes)),
        key=lambda i: (round(modes[i].decay_rate, 12), round(abs(modes[i].frequency_shift), 12), i),
    )
    return modes[best]


def protected_symmetry(config: ChainConfig) -> Symmetry:
    """Mirror class guaranteed subradiant near the nearest multiple of pi."""
    if config.n == 1:
        raise NoProtectedSubspace("a single qubit has no anti-symmetric subspace")
    k, delta = nearest_pi_multiple(config.theta)
    if abs(delta) >= PROTECTED_RANGE:
        raise NoProtectedSubspace(
            f"theta is {abs(delta):.3g} from {k}*pi; no class is protected beyond {PROTECTED_RANGE:.3g}"
        )
    return expected_superradiant_symmetry(config.n, k).opposite()


def symmetry_protected_best(config: ChainConfig) -> DecayMode:
    protected = protected_symmetry(config)
    candidates = [m for m in decompose_config(config).modes if m.symmetry is protected]
    if not candidates:
        raise NoProtectedSubspace(f"no {protected.value} modes for n={config.n}")
    return min(candidates, key=lambda m: m.decay_rate)


def superradiant_overlap(state, decomp: SpectralDecomposition) -> float:
    """Magnitude of the expansion coefficient on the fastest-decaying mode."""
    x = expand_in_modes(state, decomp).coefficients
    rates = [m.decay_rate for m in decomp.modes]
    return float(abs(x[int(np.argmax(rates))]))


def _mirror_basis(n: int, exclude: np.ndarray, sign: int) -> np.ndarray:
    """Orthonormal real basis of ``{v : P v = sign * v, v . exclude = 0}``."""
    P = build_mirror_matrix(n)
    projector = (np.eye(n) + sign * P) / 2
    # drop the component along the superradiant pattern, which has a definite mirror class
    e = exclude / np.linalg.norm(exclude)
    projector = projector - np.outer(projector @ e, projector @ e)
    # eigenvalues of an orthogonal projector are 0 or 1
    values, vectors = np.linalg.eigh(projector)
    return vectors[:, values > 0.5]


def limit_subradiant_states(n: int, k: int) -> list[tuple[Symmetry, float, np.ndarray]]:
    """Limits of the subradiant modes as ``theta -> k*pi``.

    Returns ``(symmetry, first_order_shift, vector)`` triples. The mode
    eigenvalue behaves as ``i * delta * first_order_shift`` to first order.
    """
    w = superradiant_pattern(n, k)
    dist = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    signed_distance = dist * (-1.0) ** (k * dist)
    out = []
    for symmetry, sign in ((Symmetry.SYMMETRIC, 1), (Symmetry.ANTISYMMETRIC, -1)):
        Q = _mirror_basis(n, w, sign)
        if Q.shape[1] == 0:
            continue
        shifts, coords = np.linalg.eigh(Q.T @ signed_distance @ Q)
        for mu, y in zip(shifts, coords.T):
            out.append((symmetry, float(mu), fix_phase(Q @ y)))
    return out


def _ideal_counterpart(mode: DecayMode, config: ChainConfig) -> np.ndarray:
    """Eigenvector on the ideal ``config`` that continues into ``mode``."""
    if is_singular(config.theta, SINGULAR_TOL):
        k, _ = nearest_pi_multiple(config.theta)
        candidates = [v for _, _, v in limit_subradiant_states(config.n, k)]
        w = superradiant_pattern(config.n, k)
        candidates.append(w / np.linalg.norm(w))
    else:
        candidates = [m.eigenvector for m in decompose_config(config).modes]
    overlaps = [abs(np.vdot(v, mode.eigenvector)) for v in candidates]
    return fix_phase(candidates[int(np.argmax(overlaps))])


def named_state(name: str, config: ChainConfig, index: int | None = None) -> QubitState:
    """Prepared states: ``dicke``, ``alternating``, ``sym_subradiant``,
    ``antisym_subradiant`` and ``single`` (qubit ``index``, 1-based).

    The subradiant states are the zero-imperfection limits at the multiple of
    pi nearest ``config.theta``; among the candidates of the requested mirror
    class, the one continuing into the slowest mode at ``config.theta`` is
    returned (probed at a small offset when ``theta`` is exactly singular).
    """
    n = config.n
    if name == "dicke":
        return QubitState.normalized(np.ones(n))
    if name == "alternating":
        return QubitState.normalized((-1.0) ** np.arange(1, n + 1))
    if name == "single":
        if index is None or not 1 <= index <= n:
            raise ValueError(f"single state needs a qubit index in 1..{n}")
        amps = np.zeros(n, dtype=complex)
        amps[index - 1] = 1
        return QubitState(amps)
    if name in ("sym_subradiant", "antisym_subradiant"):
        wanted = Symmetry.SYMMETRIC if name == "sym_subradiant" else Symmetry.ANTISYMMETRIC
        k, delta = nearest_pi_multiple(config.theta)
        candidates = [v for s, _, v in limit_subradiant_states(n, k) if s is wanted]
        if not candidates:
            raise ValueError(f"no {wanted.value} subradiant state exists for n={n}")
        if abs(delta) < SINGULAR_TOL:
            delta = PROBE_DELTA
        probe = decompose_config(config.with_theta(k * math.pi + delta))
        modes = [m for m in probe.modes if m.symmetry is wanted]

        def slowest_match(v):
            match = max(modes, key=lambda m: abs(np.vdot(v, m.eigenvector)))
            return match.decay_rate

        return QubitState.normalized(min(candidates, key=slowest_match))
    raise ValueError(f"unknown state name {name!r}")


def compare_strategies(config: ChainConfig, threshold: float, perturbation: float) -> StrategyReport:
    """Compare the optimal and symmetry-protected storage strategies.

    Both target modes are identified on the perturbed configuration
    (``theta + perturbation``); the states actually prepared are their
    counterparts on the ideal ``config``, then evolved under the perturbed one.
    """
    perturbed = config.with_theta(config.theta + perturbation)
    decomp = decompose_config(perturbed)
    optimal = optimal_storage_state(perturbed)
    protected = symmetry_protected_best(perturbed)
    state_opt = QubitState.normalized(_ideal_counterpart(optimal, config))
    state_prot = QubitState.normalized(_ideal_counterpart(protected, config))
    return StrategyReport(
        config=config,
        optimal_mode=optimal,
        protected_best=protected,
        superradiant_mode=decomp.superradiant,
        superradiant_overlap_optimal=superradiant_overlap(state_opt, decomp),
        superradiant_overlap_protected=superradiant_overlap(state_prot, decomp),
        storage_time_optimal=storage_time(state_opt, perturbed, threshold),
        storage_time_protected=storage_time(state_prot, perturbed, threshold),
        state_optimal=state_opt,
        state_protected=state_prot,
    )
