from hyperbolic_scattering.zeta.argument import (
    ArgumentValue,
    ZetaRoute,
    arg_zeta,
    argument_curve_determinant,
    argument_curve_euler,
    argument_growth,
    integrated_argument,
    log_modulus_growth,
)
from hyperbolic_scattering.zeta.euler import (
    LogDerivative,
    ZetaValue,
    find_zeta_half_plane_constant,
    zeta_euler,
    zeta_logderiv,
    zeta_table,
)
from hyperbolic_scattering.zeta.funnel import FunnelZero, funnel_phase, funnel_zero_lattice, zeta_funnel

__all__ = [
    "ArgumentValue",
    "FunnelZero",
    "LogDerivative",
    "ZetaRoute",
    "ZetaValue",
    "arg_zeta",
    "argument_curve_determinant",
    "argument_curve_euler",
    "argument_growth",
    "find_zeta_half_plane_constant",
    "funnel_phase",
    "funnel_zero_lattice",
    "integrated_argument",
    "log_modulus_growth",
    "zeta_euler",
    "zeta_funnel",
    "zeta_logderiv",
    "zeta_table",
]
