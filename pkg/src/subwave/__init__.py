"""Collective decay modes and storage times for qubits coupled to a 1D waveguide."""

__version__ = "0.1.0"

from .coupling import (
    ChainConfig,
    build_coupling_matrix,
    build_mirror_matrix,
    build_perturbation_matrices,
    determinant_closed_form,
    is_singular,
    lu_closed_form,
)
from .dynamics import (
    EvolutionTrace,
    ModeCoefficients,
    QubitState,
    evolve_eigen,
    evolve_ode,
    expand_in_modes,
    storage_time,
)
from .errors import (
    DegenerateUnresolved,
    IllConditioned,
    NoProtectedSubspace,
    NotDiagonalizable,
    OutOfPerturbativeRange,
    SubwaveError,
)
from .spectral import (
    DecayMode,
    SpectralDecomposition,
    Symmetry,
    classify_symmetry,
    decompose,
    decompose_config,
    perturbative_superradiant,
    subspace_dimensions,
    verify_theorem3,
)
from .storage import (
    StrategyReport,
    compare_strategies,
    named_state,
    optimal_storage_state,
    superradiant_overlap,
    symmetry_protected_best,
)
