"""Exception types shared across the package."""


class OrdmaxError(Exception):
    """Base class for all package-specific errors."""


class ValidationFailure(OrdmaxError):
    """A correlation model violates a condition required by the target law."""


class EmbeddingNotPSD(OrdmaxError):
    """Circulant embedding produced eigenvalues too negative to clip."""


class DimensionMismatch(OrdmaxError):
    """Input paths do not share a lattice or have inconsistent shapes."""


class GridOutOfRange(OrdmaxError):
    """A sampling-grid point falls outside the simulated horizon."""


class StepMismatch(OrdmaxError):
    """The fBm time step does not divide the horizon or the grid spacing."""


class InsufficientData(OrdmaxError):
    """Not enough points to extrapolate a slope."""


class DomainError(OrdmaxError):
    """Parameter outside the admissible domain (e.g. horizon too small)."""


class InvalidJointConstant(OrdmaxError):
    """A supplied joint constant makes the joint CDF exceed a marginal."""


class SingularPair(OrdmaxError):
    """A correlation interpolant reaches 1; the bound integrand is singular."""


class CholeskyFailure(OrdmaxError):
    """Covariance matrix is not positive definite."""


class RegimeMismatch(OrdmaxError):
    """Experiment configuration is inconsistent with the selected law."""


class LengthMismatch(OrdmaxError):
    """Paired vectors differ in length."""


class EmptySamples(OrdmaxError):
    """An empirical distribution was requested from zero samples."""
