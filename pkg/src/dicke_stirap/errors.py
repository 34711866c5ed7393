"""Exception types raised across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateInputError(DomainError):
    """Input for which the requested object is undefined (e.g. both pulses off)."""


class AmbiguityError(ArithmeticError):
    """The requested eigenvalue cannot be singled out."""


class ConsistencyError(ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


class TruncationError(RuntimeError):
    """Population reached the top level of a truncated phonon space."""


class IntegrationError(RuntimeError):
    """The time integrator failed."""


class StiffnessError(IntegrationError):
    """Step size underflowed."""


class AccuracyError(IntegrationError):
    """The requested local tolerance could not be met."""
