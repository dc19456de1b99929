"""Exception types shared across the library.

Each class maps to a distinct CLI exit code (see ``cli.EXIT_CODES``), so
callers can tell an unphysical measurement outcome apart from a numerical
failure without parsing messages.
"""


class ChargeQuenchError(Exception):
    """Base class for all library errors."""


class FeasibilityError(ChargeQuenchError):
    """A measurement outcome violates the ballistic time-delay bound."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class RegimeError(ChargeQuenchError):
    """A closed form was requested outside the regime where it is known."""


class QuadratureError(ChargeQuenchError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ForbiddenOutcomeError(ChargeQuenchError):
    """Exact-oracle projection onto an outcome of (numerically) zero weight."""
