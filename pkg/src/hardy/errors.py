"""Exception hierarchy shared by every module of the package."""


class HardyError(Exception):
    """Base class for all errors raised by :mod:`hardy`."""


class InvalidInputError(HardyError, ValueError):
    """Non-finite or otherwise malformed numerical input."""


class DomainError(HardyError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PreconditionError(DomainError):
    """A documented precondition on the data (not just the parameters) failed."""


class InvariantViolation(HardyError, ValueError):
    """A weight pair or sequence breaks one of its structural invariants."""


class SequenceParseError(HardyError, ValueError):
    """A sequence file could not be parsed.

    ``line`` and ``field`` locate the offending record when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class BudgetError(HardyError, RuntimeError):
    """An iterative estimate did not reach its tolerance within budget.

    ``bracket`` carries the best ``(lower, upper)`` interval found so far.
    """

    def __init__(self, message, bracket=None, evaluations=0):
        self.bracket = bracket
        self.evaluations = evaluations
        super().__init__(f"{message}; best bracket {bracket}")


class SumOverflowError(HardyError, OverflowError):
    """A truncated series overflowed double precision."""
