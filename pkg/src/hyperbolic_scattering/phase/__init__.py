from hyperbolic_scattering.phase.breit_wigner import BreitWignerReport, breit_wigner_check
from hyperbolic_scattering.phase.krein import (
    gamma_ratio,
    weyl_primitive,
    xi_argument_route,
    xi_exact_series,
)
from hyperbolic_scattering.phase.probe import bump, probe_majorant, probe_sum_S
from hyperbolic_scattering.phase.scattering import PhaseCurve, PhaseRoute, PhaseSample, scattering_phase
from hyperbolic_scattering.phase.weyl import WeylFit, exponent_chain_residual, weyl_fit

__all__ = [
    "BreitWignerReport",
    "PhaseCurve",
    "PhaseRoute",
    "PhaseSample",
    "WeylFit",
    "breit_wigner_check",
    "bump",
    "exponent_chain_residual",
    "gamma_ratio",
    "probe_majorant",
    "probe_sum_S",
    "scattering_phase",
    "weyl_fit",
    "weyl_primitive",
    "xi_argument_route",
    "xi_exact_series",
]
