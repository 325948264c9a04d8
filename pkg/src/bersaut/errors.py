"""Exception hierarchy.

Usage and domain errors subclass ValueError so callers that only care about
"bad input" can catch that; verification failures subclass RuntimeError.
"""


class BersautError(Exception):
    """Base class for every error raised by this package."""


class UsageError(BersautError, ValueError):
    pass


class DomainError(BersautError, ValueError):
    """A point lies outside the region where an object is defined."""


class ConstructionError(BersautError, ValueError):
    """Invalid parameters for a domain or automorphism."""


class UnsupportedCompositionError(BersautError, ValueError):
    pass


class OracleError(BersautError, RuntimeError):
    """A user-supplied homomorphism or character failed when queried."""


class UnitObstruction(BersautError, RuntimeError):
    """chi(id) lies outside the domain, so z - chi(id) would be a unit."""

    def __init__(self, c, message=None):
        self.c = c
        super().__init__(message or f"chi(id) = {c!r} lies outside the domain; "
                         "z - chi(id) is invertible there, so chi cannot be a character")


class NotPointEvaluation(BersautError, RuntimeError):
    pass


class InvalidHomomorphism(BersautError, RuntimeError):
    pass


class RecoveryFailure(BersautError, RuntimeError):
    pass


class StencilError(BersautError, RuntimeError):
    """Not enough clearance from the boundary for a derivative stencil."""


class DegreeTooHighError(BersautError, RuntimeError):
    def __init__(self, condition_number, message=None):
        self.condition_number = condition_number
        super().__init__(message or f"Gram matrix numerically singular "
                         f"(condition number {condition_number:.3e}); lower the degree")


class FrameError(BersautError, RuntimeError):
    """Boundary frame cannot be built (non-smooth point or degenerate Levi form)."""


class HypothesisFailure(BersautError, RuntimeError):
    pass


class DichotomyViolation(BersautError, AssertionError):
    """A normal limit was neither constant nor an automorphism."""
