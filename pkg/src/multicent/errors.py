"""Exception hierarchy for multicent.

Every error raised by the library derives from :class:`MulticentError` so
callers (in particular the CLI) can map failure classes to exit codes
without catching built-in exceptions.
"""


class MulticentError(Exception):
    """Base class for all multicent errors."""


class ParseError(MulticentError):
    """A network file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DomainError(MulticentError):
    """An argument is outside its admissible domain (indices, shapes, parameters)."""


class NumericError(MulticentError):
    """A computation produced non-finite values (overflow, invalid operation)."""


class ConditioningError(MulticentError):
    """A linear system is singular or too ill-conditioned to solve reliably.

    ``condition`` holds a condition-number estimate when one is available.
    """

    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class ConvergenceError(MulticentError):
    """An iterative method did not reach the requested tolerance.

    ``estimate`` carries the best approximation found so far, so callers can
    inspect or reuse it.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SizeCapError(MulticentError):
    """A dense computation was refused because the problem exceeds the size cap."""
