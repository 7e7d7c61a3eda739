"""Exceptions raised by the simulation kernels."""


class FwqedError(Exception):
    """Base class for physics-domain failures reported to the user."""


class GapClosedError(FwqedError):
    """A topological invariant or bound state was requested where the gap is closed."""


class ResolutionError(FwqedError):
    """A numerical quantity failed to converge at the available resolution."""


class NonHermitianError(FwqedError, ValueError):
    """A Hamiltonian provider returned a matrix that is not Hermitian."""


class NormDriftError(FwqedError):
    """State norm drifted beyond tolerance during time evolution."""
