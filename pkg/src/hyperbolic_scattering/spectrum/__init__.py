from hyperbolic_scattering.spectrum.counting import CountingFit, counting_exponent, counting_function
from hyperbolic_scattering.spectrum.enumerate import (
    LengthSpectrum,
    Orientation,
    PrimitiveGeodesic,
    enumerate_geodesics,
    naive_enumeration,
)

__all__ = [
    "CountingFit",
    "LengthSpectrum",
    "Orientation",
    "PrimitiveGeodesic",
    "counting_exponent",
    "counting_function",
    "enumerate_geodesics",
    "naive_enumeration",
]
