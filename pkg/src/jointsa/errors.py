"""Exception types raised by jointsa."""


class JointSAError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(JointSAError, ValueError):
    pass


class DegeneratePixelError(JointSAError, ValueError):
    """A pixel has zero (or non-positive) scattered intensity."""


class UndefinedRoughnessError(JointSAError, ValueError):
    pass


class UndefinedSCRError(JointSAError, ValueError):
    pass


class DegenerateSampleError(JointSAError, ValueError):
    """The sample has no spread in log domain, so it cannot be fitted."""


class FitError(JointSAError, RuntimeError):
    """The log-cumulant equations have no solution in the search bracket.

    ``diagnostics`` carries the sample log-cumulants and the bracket.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
