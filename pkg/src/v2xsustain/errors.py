"""Shared exception types.

Every numeric routine raises DomainError (or a subclass) for inputs outside
its mathematical domain instead of returning NaN, so callers can tell a
modeling violation from a computed zero.
"""


class DomainError(ValueError):
    """Input violates a documented precondition of the model."""


class DivergenceError(DomainError):
    """The requested integral or limit does not converge."""


class OverflowRangeError(OverflowError):
    """Result exceeds double-precision range."""


class IntegrandError(ValueError):
    """Integrand returned a non-finite value inside the integration interval."""


class ConvergenceError(RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available estimate so callers can inspect how far
    the refinement got before the depth limit.
    """

    def __init__(self, message: str, best_estimate: float, error_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class AuthenticationError(Exception):
    """Challenge-response verification failed."""


class OrderingError(ValueError):
    """Append-only log received an out-of-order timestamp."""


class SimulationTruncated(RuntimeError):
    """Event cap exceeded; carries the partial trace generated so far."""

    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial = partial


class ConfigError(ValueError):
    """Scenario configuration failed to parse or validate."""
