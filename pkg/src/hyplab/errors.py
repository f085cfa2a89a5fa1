"""Exception types shared across the library."""


class HyplabError(Exception):
    """Base class for all library errors."""


class DomainError(HyplabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class AccuracyError(HyplabError):
    """A quadrature or summation failed to reach the requested tolerance.

    Carries the best available estimate and the error bound that was
    actually achieved, so callers can decide whether to proceed anyway.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ResourceError(HyplabError):
    """An enumeration or sum hit its element/radius cap before converging.

    `achieved` reports how far the computation got (e.g. the radius that was
    fully enumerated), `estimate`/`error_bound` the partial value if any.
    """

    def __init__(self, message, achieved=None, estimate=None, error_bound=None):
        super().__init__(message)
        self.achieved = achieved
        self.estimate = estimate
        self.error_bound = error_bound


class ConsistencyError(HyplabError):
    """Two routes that must agree disagreed beyond tolerance."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class RangeError(HyplabError, ValueError):
    """A curve or grid does not cover the range an operation requires."""


class ConfigError(HyplabError, ValueError):
    """An experiment configuration failed validation."""
