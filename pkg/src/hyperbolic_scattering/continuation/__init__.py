from hyperbolic_scattering.continuation.counting import (
    WindowFit,
    count_hypothesis_window,
    count_log_window,
    fit_window_exponent,
    hypothesis_window_region,
    log_window_region,
)
from hyperbolic_scattering.continuation.resonances import (
    Resonance,
    ResonanceSet,
    find_resonances,
    find_resonances_parallel,
)
from hyperbolic_scattering.continuation.transfer import (
    OrientationCheck,
    TransferDiscretization,
    build_discretization,
    calibrate,
    converged_discretization,
    determinant,
    leading_resonance,
    orientation_check,
)

__all__ = [
    "OrientationCheck",
    "Resonance",
    "ResonanceSet",
    "TransferDiscretization",
    "WindowFit",
    "build_discretization",
    "calibrate",
    "converged_discretization",
    "count_hypothesis_window",
    "count_log_window",
    "determinant",
    "find_resonances",
    "find_resonances_parallel",
    "fit_window_exponent",
    "hypothesis_window_region",
    "leading_resonance",
    "log_window_region",
    "orientation_check",
]
