"""Exception hierarchy shared across the package."""


class QprocError(Exception):
    """Base class for all package errors."""


class RepresentationError(QprocError):
    """A piecewise-monotone representation violates its structural invariants."""


class DomainError(QprocError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedCombinationError(QprocError):
    """The requested measure/integrand combination has no supported evaluation path."""


class SpecParseError(QprocError):
    """A distribution spec string failed to parse.

    ``offset`` is the byte offset of the offending token in the input.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class GridError(QprocError):
    """A sampling or integration grid violates its preconditions."""


class StepTooLargeError(QprocError):
    """A perturbation step destroys monotonicity; the caller must shrink it."""


class InvalidDirectionError(QprocError):
    """A tangent direction fails the endpoint-vanishing requirement."""


class PreconditionError(QprocError):
    """A statistical precondition (regularity, finite moment) does not hold."""


class ConfigError(QprocError):
    """An experiment configuration is internally inconsistent."""
