"""Exception types shared across the package.

Input/precondition problems raise ``ValueError`` subclasses; failures of a
numerical procedure on valid input raise :class:`NumericalError`.
"""


class ConfluentWavenumbersError(ValueError):
    """k1**2 and k2**2 coincide; kernels divide by their difference."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-finite values, no convergence, ...)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
