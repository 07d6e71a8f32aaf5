# decoherence_lab/errors.py

class DecoherenceLabError(Exception):
    """Root of every error raised by the library."""
    pass


# --- numerics ---
class QuadratureError(DecoherenceLabError):
    """A quadrature rule was misconfigured or an integrand was not finite."""
    pass

class AiryDomainError(DecoherenceLabError):
    """Airy function requested outside the documented validity window."""
    pass

class RootFindingError(DecoherenceLabError):
    """An Airy root could not be bracketed or did not converge."""
    pass

class HermiteOverflowError(DecoherenceLabError):
    """The Hermite-function recurrence produced a non-finite value."""
    pass


# --- states ---
class StateConstructionError(DecoherenceLabError):
    """An initial state or density matrix violates its invariants."""
    pass


# --- evolution ---
class EvolutionError(DecoherenceLabError):
    """Invalid evolution request (negative time, bad dimensions)."""
    pass

class BasisMismatchError(EvolutionError):
    """A density matrix was handed to a propagator for another basis kind."""
    pass


# --- spectra ---
class ScatteringError(DecoherenceLabError):
    """Interface matching for a barrier scattering state failed."""
    pass


# --- observables ---
class ObservableError(DecoherenceLabError):
    """An observable cannot be evaluated for the given input."""
    pass

class CurrentSignError(ObservableError):
    """The probability current changes sign too much for an arrival-time density."""
    pass

class PeakHeightError(ObservableError):
    """The projectile never rises: initial momentum does not exceed m g / gamma."""
    pass


# --- wigner ---
class WignerResolutionError(DecoherenceLabError):
    """A phase-space residual is dominated by discretization error."""
    pass


# --- cli ---
class ConfigNotFoundError(DecoherenceLabError):
    """The scenario configuration file does not exist."""
    pass

class ConfigValidationError(DecoherenceLabError):
    """The scenario configuration failed to parse or validate."""
    pass

class OutputWriteError(DecoherenceLabError):
    """A result file could not be written."""
    pass
