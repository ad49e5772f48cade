"""Exception hierarchy shared by all onsim modules.

Two broad families matter for callers: ValidationError covers bad input or
violated preconditions (the CLI maps these to exit code 2), NumericalError
covers failures of an otherwise well-posed computation (exit code 3).
"""


class SimulationError(Exception):
    """Base class for all errors raised by onsim."""


class ValidationError(SimulationError):
    """Invalid configuration, parameters or violated preconditions."""


class DomainError(ValidationError):
    """Evaluation requested outside the model's domain (x < 0)."""


class NonMonotonicError(ValidationError):
    """Potential derivative is not strictly positive on the required interval."""


class DegenerateMotionError(ValidationError):
    """Displacement too small for oscillation analysis (s below threshold)."""


class UndersampledError(ValidationError):
    """Sample spacing too coarse to resolve the oscillation being analysed."""


class InsufficientDataError(ValidationError):
    """Not enough envelope extrema (or too short a run) for beat statistics."""


class NumericalError(SimulationError):
    """A numerical procedure failed to converge or lost required accuracy."""


class BracketError(NumericalError):
    """Root bracketing failed (no sign change on the search interval)."""


class EventNotFoundError(NumericalError):
    """Requested number of integration events not found before t_end."""
