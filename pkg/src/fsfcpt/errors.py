"""Exception types raised by fsfcpt."""


class FsfCptError(Exception):
    """Base class for all package errors."""


class DomainError(FsfCptError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularSystemError(FsfCptError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to trust.

    ``diagnostics`` carries the condition estimate and the offending
    velocity node / parameter values.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConvergenceError(FsfCptError, RuntimeError):
    """An iterative or time-stepping procedure failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(FsfCptError, ValueError):
    """A scan configuration failed validation.

    ``issues`` lists every violation found, not only the first.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class IllConditionedError(SingularSystemError):
    """A derived quantity divides by a (numerically) vanishing value."""
