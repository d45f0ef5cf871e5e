"""Exception types shared across the package."""


class CCMeasureError(Exception):
    """Base class for all library errors."""


class InputError(CCMeasureError, ValueError):
    """Invalid arguments: wrong dimension, out-of-domain time, bad schedule."""


class SolverError(CCMeasureError):
    """A numerical solver failed to reach its tolerance.

    ``best`` carries the best value found before giving up (may be None).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EstimateError(CCMeasureError):
    """An estimator could not produce a trustworthy value (e.g. a ladder
    failed to converge at some times, listed in ``times``)."""

    def __init__(self, message, times=()):
        super().__init__(message)
        self.times = list(times)
