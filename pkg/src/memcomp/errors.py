"""Exception types shared across the package."""


class MemcompError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(MemcompError):
    """Two fields that must share a grid do not."""


class AdmissibilityError(MemcompError):
    """An input violates a positivity/admissibility requirement
    (resource profile with no positive values, non-positive weighted
    mass, zero competition coefficient, ...)."""


class ConvergenceError(MemcompError):
    """An iterative solver failed to converge, or a time integration
    produced non-finite values.

    ``partial_result`` (when set) carries whatever result object was
    assembled before the failure.
    """

    def __init__(self, message, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


class DegenerateExpansionError(MemcompError):
    """A first-order expansion coefficient vanishes where it must not."""


class SubcriticalTargetError(MemcompError):
    """The requested growth-rate target sits on the wrong side of the
    critical value, producing a non-positive amplitude."""


class DegenerateGeometryError(MemcompError):
    """Region-line construction hit a vanishing denominator."""


class NoHopfError(MemcompError):
    """The critical cosine lies outside [-1, 1]: no purely imaginary
    crossing exists for these parameters."""


class CharacteristicInconsistencyError(MemcompError):
    """Neither branch of the crossing-phase angle satisfies the
    characteristic system to the requested tolerance."""


class BracketError(MemcompError):
    """A bisection bracket does not straddle the sought transition."""


class ConfigError(MemcompError):
    """A run configuration failed validation."""
