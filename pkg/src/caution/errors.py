"""Exception hierarchy shared by all modules."""


class CautionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CautionError, ValueError):
    """An argument violates a documented precondition."""


class MismatchedSpaceError(ValidationError):
    """Two distributions do not live on the same parameter space."""


class NonNumericStatesError(ValidationError):
    """A moment was requested for a distribution over labelled states."""


class UndefinedGainError(CautionError, ArithmeticError):
    """The benchmark divergence is infinite, so the gain is undefined."""


class WorkingNotPlausibleError(ValidationError):
    """The working posterior is not a member of the knowledge base."""


class InfeasibleSetError(ValidationError):
    """Interval bounds on a simplex admit no probability vector."""


class NonConvergenceError(CautionError, ArithmeticError):
    """A numerical optimization failed to reach its tolerance."""
