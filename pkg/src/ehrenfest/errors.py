"""Exception types shared across the package."""


class EhrenfestError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EhrenfestError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NumericalAccuracyError(EhrenfestError, ArithmeticError):
    """A numerical procedure failed to reach its target tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    achieved : float, optional
        Best error estimate reached before giving up.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InsufficientSupportError(EhrenfestError):
    """Too few weighted states to define a transition frequency."""


class SweepError(EhrenfestError):
    """Every point of a sweep failed; ``failures`` maps hbar to a message."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = dict(failures or {})


class FitError(EhrenfestError):
    """A scaling fit could not be performed."""
