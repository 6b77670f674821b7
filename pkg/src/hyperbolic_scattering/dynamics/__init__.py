from hyperbolic_scattering.dynamics.core import CollarCore, ConvexCore, convex_core, sample_liouville
from hyperbolic_scattering.dynamics.escape import (
    EscapeEstimate,
    exponent_chain,
    lambda_max_estimate,
    pressure_from_escape,
    trapped_fraction,
)
from hyperbolic_scattering.dynamics.flow import FlowState, axis_state, flow, frame_from, reverse, universal_cover_flow

__all__ = [
    "CollarCore",
    "ConvexCore",
    "EscapeEstimate",
    "FlowState",
    "axis_state",
    "convex_core",
    "exponent_chain",
    "flow",
    "frame_from",
    "lambda_max_estimate",
    "pressure_from_escape",
    "reverse",
    "sample_liouville",
    "trapped_fraction",
    "universal_cover_flow",
]
