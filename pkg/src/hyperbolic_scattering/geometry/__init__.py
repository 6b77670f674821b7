from hyperbolic_scattering.geometry.moebius import (
    MoebiusMap,
    compose,
    hyperbolic_distance,
    translation_length,
)
from hyperbolic_scattering.geometry.schottky import (
    Disk,
    Model,
    PairedDisks,
    SchottkySurface,
    ValidationReport,
    conjugate_surface,
    surface_from_generators,
    symmetric_surface,
    validate_schottky,
)
from hyperbolic_scattering.geometry.surface_io import bundled_surface, list_bundled, load_surface, resolve_surface

__all__ = [
    "Disk",
    "MoebiusMap",
    "Model",
    "PairedDisks",
    "SchottkySurface",
    "ValidationReport",
    "bundled_surface",
    "compose",
    "conjugate_surface",
    "hyperbolic_distance",
    "list_bundled",
    "load_surface",
    "resolve_surface",
    "surface_from_generators",
    "symmetric_surface",
    "translation_length",
    "validate_schottky",
]
