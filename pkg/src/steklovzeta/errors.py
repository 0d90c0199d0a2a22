"""Exception types shared across the package."""


class SteklovError(Exception):
    """Base class for all library-specific failures."""


class NonPositiveWeight(SteklovError):
    """A weight function is not strictly positive on the sampling grid."""


class AliasingError(SteklovError):
    """A synthesis grid is too small for the requested bandwidth."""


class MeanNotOne(SteklovError):
    """The reciprocal density handed to the antiderivative has mean != 1."""


class NotNormalized(SteklovError):
    """An operation requiring unit mean of 1/a received an unnormalized weight."""


class BandwidthExceeded(SteklovError):
    """Requested matrix order exceeds the available square-root bandwidth."""


class NegativeEigenvalue(SteklovError):
    """A supposedly positive semidefinite matrix has a significantly negative eigenvalue."""


class EigenSolverFailure(SteklovError):
    """The dense eigensolver failed or returned inconsistent data."""


class PoleAtOne(SteklovError):
    """The Riemann zeta function was evaluated at its pole x = 1."""


class EstimatorDivergence(SteklovError):
    """Trace estimates at two truncation orders disagree beyond tolerance."""


class UnsupportedArgument(SteklovError):
    """Argument lies in a region the implementation deliberately excludes."""


class NonZeroSum(SteklovError):
    """An index tuple for a lattice coefficient does not sum to zero."""


class BudgetExceeded(SteklovError):
    """A lattice sum would exceed the configured tuple-evaluation budget."""


class NonRealWeight(SteklovError):
    """An operation defined only for real-valued weights received a complex one."""


class UnknownGallery(SteklovError):
    """Requested gallery label is not registered."""


class VanishingDerivative(SteklovError):
    """The boundary map derivative vanishes on the boundary grid."""


class NoWitness(SteklovError):
    """No mode with a positive Rayleigh defect exists inside the trusted window."""


class ConfigError(SteklovError):
    """An experiment configuration violates its invariants."""


class UnivalenceWarning(UserWarning):
    """The sufficient univalence criterion for a domain map is violated."""
