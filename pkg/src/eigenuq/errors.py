"""Exception types shared across the toolkit.

Everything derives from EigenUQError so callers can catch the whole
family; the leaf classes mirror the distinct failure modes of the
tensor algebra, the map, the solver, and the campaign plumbing.
"""


class EigenUQError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteError(EigenUQError, ValueError):
    """A constructed value contains NaN or Inf."""


class DegenerateTKE(EigenUQError, ValueError):
    """Turbulent kinetic energy at or below the floor; anisotropy undefined."""


class InvalidFrame(EigenUQError, ValueError):
    """Eigenvector matrix fails the orthonormality requirement."""


class RealizabilityError(EigenUQError, ValueError):
    """State falls outside the realizable (barycentric-triangle) set."""


class InvalidMagnitude(EigenUQError, ValueError):
    """A blending factor (delta_b or urlx) is outside [0, 1]."""


class OrderingError(EigenUQError, ValueError):
    """An eigenvalue triple is not sorted in descending order."""


class ShapeError(EigenUQError, ValueError):
    """Field inputs have mismatched lengths or shapes."""


class GeometryError(EigenUQError, ValueError):
    """Triangle geometry is degenerate (collinear vertices)."""


class GridError(EigenUQError, ValueError):
    """Channel grid parameters are invalid or infeasible."""


class ConfigError(EigenUQError, ValueError):
    """Configuration text or values cannot be interpreted.

    Carries the 1-based line number when the failure is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AggregationError(EigenUQError, ValueError):
    """Aggregation inputs are unusable (missing baseline, too few runs, ...)."""


class IoError(EigenUQError, OSError):
    """An output location is missing or unwritable."""


class LaunchError(EigenUQError, RuntimeError):
    """An external solver process could not be started."""
