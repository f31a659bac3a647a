"""Exception taxonomy shared by all modules.

Exit-code mapping used by the CLI: usage errors exit 2 (argparse),
ValidationError and subclasses exit 3, NumericalError and subclasses exit 4.
"""


class EulermocError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(EulermocError, ValueError):
    """Bad parameters, violated preconditions, or failed property checks."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class PropertyViolationError(ValidationError):
    """A construction-time property check failed.

    Carries the construction step index at which the violation occurred.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(ValidationError):
    """Malformed or inconsistent configuration input."""


class NumericalError(EulermocError, RuntimeError):
    """Numerical procedure failed (bracketing, convergence, stability)."""


class BracketError(NumericalError):
    """Root bracket invalid or could not be established by widening."""


class ConvergenceError(NumericalError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class CflError(NumericalError):
    """Time step too large for the current velocity field.

    ``suggested_dt`` is a step size that would satisfy the guard.
    """

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt
