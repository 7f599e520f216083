"""Exception and warning types raised across the package."""


class HDualError(Exception):
    """Base class for all errors raised by hdual."""


class RegionViolation(HDualError, ValueError):
    """Exponents outside the admissible region.

    ``reason`` is one of ``below-lower-p``, ``below-lower-q``,
    ``hyperbola-low`` or ``hyperbola-high``.
    """

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        self.detail = message
        super().__init__(f"{reason}: {message}" if message else reason)


class DegenerateScaling(HDualError, ValueError):
    pass


class UnsupportedDimension(HDualError, ValueError):
    pass


class UnsupportedOrder(HDualError, ValueError):
    pass


class DomainError(HDualError, ValueError):
    pass


class ResolutionError(HDualError, ValueError):
    pass


class BadResolution(HDualError, ValueError):
    pass


class NonLatticeShift(HDualError, ValueError):
    pass


class FloorViolation(HDualError, ValueError):
    pass


class GridMismatch(HDualError, ValueError):
    pass


class SingularGrid(HDualError, ValueError):
    pass


class ZeroState(HDualError, ValueError):
    pass


class NotInPositiveCone(HDualError, ValueError):
    """The interaction term C of the state is not positive."""


class NoDescentDirection(HDualError, RuntimeError):
    pass


class SeedOutsideCone(HDualError, RuntimeError):
    pass


class NotConverged(HDualError, RuntimeError):
    pass


class ConfigError(HDualError, ValueError):
    def __init__(self, message: str, reason: str | None = None):
        self.reason = reason
        super().__init__(message)


class IoError(HDualError, OSError):
    pass


class MaxItersExceeded(RuntimeWarning):
    """Emitted when a solver stops at ``max_iters`` without converging."""


class TruncationWarning(RuntimeWarning):
    """Emitted when a ground state has not decayed at half the box width."""
