"""Exception types shared across modules."""


class EllqgError(Exception):
    """Base class for library errors."""


class PoleProximityError(EllqgError, ArithmeticError):
    """A denominator theta value fell below the genericity guard."""


class SamplingError(EllqgError, RuntimeError):
    """Rejection sampling of generic parameters ran out of attempts."""


class CapError(EllqgError, ValueError):
    """A size cap (n, k, shuffle length) was exceeded."""


class SingularMatrixError(EllqgError, ArithmeticError):
    """A change-of-basis or evaluation matrix is numerically singular."""
