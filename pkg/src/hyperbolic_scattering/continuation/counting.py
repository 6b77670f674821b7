from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import linregress

from hyperbolic_scattering.contour import ComplexBox
from hyperbolic_scattering.continuation.resonances import ResonanceSet
from hyperbolic_scattering.errors import CoverageError, EstimationError


def log_window_region(z: float, c: float) -> ComplexBox:
    """
    Lambda-plane box holding every rho with |z - Re rho| <= log z and Im rho <= 1 + c log|Re rho|.

    Im rho = 1/2 - Re lambda; zeros with Re lambda >= 1/2 are real, so away from
    z = 0 the box stops at the critical line.
    """
    w = math.log(z)
    depth = 1.0 + c * math.log(z + w)
    top = 0.5 if z - w > 0.0 else 1.0
    return ComplexBox(0.5 - depth, top, z - w, z + w)


def hypothesis_window_region(z: float, c: float) -> ComplexBox:
    r = c * math.log(z)
    return ComplexBox(0.5 - r, 0.5 + r, z - r, z + r)


def _require(z: float, res: ResonanceSet, region: ComplexBox) -> None:
    if z <= 1.0:
        raise ValueError(f"window counts need z > 1, got {z}")
    if not res.covers(region):
        raise CoverageError(
            f"resonance search does not cover the window {region.as_list()} (lambda-plane) at z = {z:g}"
        )


def count_log_window(res: ResonanceSet, z: float, c: float) -> int:
    """#{rho : Im rho <= 1 + c log|Re rho|, |z - Re rho| <= log z}, with multiplicity."""
    _require(z, res, log_window_region(z, c))
    w = math.log(z)
    n = 0
    for r in res:
        rho = r.z
        if abs(z - rho.real) > w or rho.real == 0.0:
            continue
        if rho.imag <= 1.0 + c * math.log(abs(rho.real)):
            n += r.multiplicity
    return n


def count_hypothesis_window(res: ResonanceSet, z: float, c: float) -> int:
    """#{rho : |z - rho| <= c log z}, with multiplicity."""
    _require(z, res, hypothesis_window_region(z, c))
    radius = c * math.log(z)
    return sum(r.multiplicity for r in res if abs(z - r.z) <= radius)


@dataclass(frozen=True)
class WindowFit:
    alpha: float
    stderr: float
    n_points: int


def fit_window_exponent(z: Sequence[float], counts: Sequence[int]) -> WindowFit:
    """Exponent alpha of counts ~ z^alpha from a log-log regression over nonzero counts."""
    z_arr = np.asarray(z, dtype=float)
    n_arr = np.asarray(counts, dtype=float)
    keep = n_arr > 0
    if np.count_nonzero(keep) < 3:
        raise EstimationError(f"need at least 3 nonempty windows, got {int(np.count_nonzero(keep))}")
    x, y = np.log(z_arr[keep]), np.log(n_arr[keep])
    if np.ptp(x) <= 0.0:
        raise EstimationError("window centres do not vary")
    fit = linregress(x, y)
    return WindowFit(float(fit.slope), float(fit.stderr), int(x.size))
