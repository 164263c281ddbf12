"""Exception types raised by the wall-distance kit."""


class WallDistanceError(Exception):
    """Base class for all kit-specific errors."""


class DimensionTooSmallError(WallDistanceError, ValueError):
    """Grid has fewer nodes than the minimum stencil width along a direction."""


class DegenerateMappingError(WallDistanceError, ValueError):
    """Grid mapping produced a non-positive Jacobian somewhere."""


class SingularMetricError(WallDistanceError, ValueError):
    """Metric matrix is (numerically) singular at one or more nodes."""


class LineTooShortError(WallDistanceError, ValueError):
    """A grid line is too short for the requested stencil."""


class ZeroPivotError(WallDistanceError, ValueError):
    """Tridiagonal elimination hit a zero pivot (singular system)."""


class DivergenceError(WallDistanceError, RuntimeError):
    """Pseudo-time iteration blew up (instability)."""


class BodyOutsideDomainError(WallDistanceError, ValueError):
    """A prescribed body motion leaves the computational domain."""


class InvalidPolygonError(WallDistanceError, ValueError):
    """Polygon is degenerate or self-intersecting."""


class CflViolationError(WallDistanceError, ValueError):
    """Requested time step violates the CFL restriction."""


class NegativeRadicandError(WallDistanceError, ValueError):
    """Poisson post-processing radicand is negative beyond round-off."""


class UnknownCaseError(WallDistanceError, KeyError):
    """Case identifier is not in the canonical registry."""


class TooFewIterationsError(WallDistanceError, ValueError):
    """Timing probe needs at least 100 iterations."""


class CaseMismatchError(WallDistanceError, ValueError):
    """compare() requires all run configs to share one case."""


class ConfigError(WallDistanceError, ValueError):
    """Run configuration failed schema validation."""
