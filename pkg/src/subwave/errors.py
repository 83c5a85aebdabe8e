"""Exception types raised by subwave."""


class SubwaveError(Exception):
    """Base class for all library errors."""


class DegenerateUnresolved(SubwaveError):
    """A degenerate eigenvalue cluster could not be split into mirror eigenspaces."""


class NotDiagonalizable(SubwaveError):
    """The eigenvector matrix is numerically singular."""


class IllConditioned(SubwaveError):
    """Mode expansion refused; the eigenvector basis is too ill-conditioned."""


class OutOfPerturbativeRange(SubwaveError):
    """Phase is too far from a multiple of pi for the first-order expansion."""


class NoProtectedSubspace(SubwaveError):
    """No symmetry class is protected for the given configuration."""
