"""Exception types shared across the package."""


class HardyLabError(Exception):
    """Base class for all errors raised by hardylab."""


class DomainError(HardyLabError, ValueError):
    """Input outside the domain of a mean or an estimator."""


class EvaluationError(HardyLabError, ArithmeticError):
    """Floating point evaluation produced a non-finite value.

    ``exponent`` holds the power-mean exponent being evaluated when the
    failure happened.
    """

    def __init__(self, message, exponent=None):
        super().__init__(message)
        self.exponent = exponent


class UnaryCase(HardyLabError):
    """Raised by :func:`hardylab.means.expand_pairs` when a ``circ`` mix
    receives a single unit-weight entry and no pair exists."""


class ParseError(HardyLabError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class InfiniteConstant(HardyLabError):
    """The requested sharp constant is +infinity."""


class ConstructionError(HardyLabError, RuntimeError):
    """The Kedlaya matrix builder could not complete."""
