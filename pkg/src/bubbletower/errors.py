"""Exception types raised by the numerical routines."""


class BubbleTowerError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class DomainError(BubbleTowerError, ValueError):
    code = "domain"


class RangeError(BubbleTowerError, OverflowError):
    code = "range"


class ConvergenceError(BubbleTowerError, RuntimeError):
    code = "convergence"


class StepLimitError(BubbleTowerError, RuntimeError):
    code = "step_limit"


class NonMonotoneError(BubbleTowerError, RuntimeError):
    code = "non_monotone"


class NoZeroError(BubbleTowerError, RuntimeError):
    code = "no_zero"


class NoBubblesError(BubbleTowerError, RuntimeError):
    code = "no_bubbles"
