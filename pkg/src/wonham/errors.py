"""Exception hierarchy shared by all modules."""


class WonhamError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(WonhamError, ValueError):
    """Invalid experiment configuration (bad field values, bad JSON, unknown keys)."""


class DomainError(WonhamError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GridMismatchError(WonhamError):
    """Two paths that must share a time grid do not."""


class IntegrationError(WonhamError):
    """SDE integration produced a non-finite value.

    Carries the first offending step index in ``step``.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class QuadratureError(WonhamError):
    """A quadrature did not converge or pushed a probability out of range."""


class SingularWindowError(WonhamError):
    """The backward path-transform hit a nonpositive logarithm argument."""
