from hyperbolic_scattering.dimension.poincare import (
    DimensionEstimate,
    DimensionMethod,
    delta_poincare,
    poincare_partial_sums,
)
from hyperbolic_scattering.dimension.refinement import delta_refinement

__all__ = [
    "DimensionEstimate",
    "DimensionMethod",
    "delta_poincare",
    "delta_refinement",
    "poincare_partial_sums",
]
