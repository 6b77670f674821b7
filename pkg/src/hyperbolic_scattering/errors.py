from __future__ import annotations

from typing import Any


class ScatteringError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code: int = 4


class SurfaceError(ScatteringError):
    """Unreadable surface file, schema violation or failed validation."""

    exit_code = 2

    def __init__(self, message: str, report: Any | None = None) -> None:
        super().__init__(message)
        self.report = report


class ClassificationError(ScatteringError):
    """An element expected to be hyperbolic is elliptic or parabolic."""


class ResourceBudgetError(ScatteringError):
    exit_code = 3


class EstimationError(ScatteringError):
    """Too little data, or an ill-conditioned fit."""


class BracketingError(ScatteringError):
    pass


class MethodNotApplicableError(ScatteringError):
    pass


class DivergenceRegionError(ScatteringError):
    """Evaluation requested outside the Euler-product half-plane."""


class TailTooLargeError(ScatteringError):
    def __init__(self, message: str, needed_cutoff: float) -> None:
        super().__init__(message)
        self.needed_cutoff = needed_cutoff


class RouteError(ScatteringError):
    pass


class ResolutionError(ScatteringError):
    pass


class LocalizationError(ScatteringError):
    pass


class CoverageError(ScatteringError):
    pass


class GeometryError(ScatteringError):
    pass


class InsufficientTrappingError(ScatteringError):
    pass


class PrecisionError(ScatteringError):
    pass


class ZeroOnContourError(LocalizationError):
    """The function vanishes, or nearly so, on a contour used for a winding count."""
