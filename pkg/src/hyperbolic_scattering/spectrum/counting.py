from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from hyperbolic_scattering.errors import EstimationError
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum

MIN_ENTRIES = 200


@dataclass(frozen=True)
class CountingFit:
    """log N(R) ~ exponent * R + intercept over the upper half of the length range."""

    exponent: float
    stderr: float
    intercept: float
    r_squared: float
    n_points: int
    fit_range: tuple[float, float]


def counting_exponent(spec: LengthSpectrum, min_entries: int = MIN_ENTRIES) -> CountingFit:
    if spec.rank == 1:
        # a cylinder has a single closed geodesic, so N(R) is constant past it
        ell = spec.shortest
        return CountingFit(0.0, 0.0, 0.0, 1.0, len(spec), (ell, spec.cutoff))
    if len(spec) < min_entries:
        raise EstimationError(f"counting exponent needs at least {min_entries} geodesics, got {len(spec)}")

    lengths = spec.lengths
    top = lengths[-1] if not math.isfinite(spec.cutoff) else spec.cutoff
    lo = 0.5 * (lengths[0] + top)
    counts = np.arange(1, len(lengths) + 1, dtype=float)
    mask = lengths >= lo
    # one point per distinct length: the count after the last tie
    x = lengths[mask]
    y = np.log(counts[mask])
    last_of_tie = np.append(np.diff(x) > 0.0, True)
    x, y = x[last_of_tie], y[last_of_tie]
    if x.size < 3 or np.ptp(x) <= 0.0:
        raise EstimationError(f"only {x.size} distinct lengths in the fit range [{lo:.6g}, {top:.6g}]")
    fit = linregress(x, y)
    return CountingFit(
        exponent=float(fit.slope),
        stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        n_points=int(x.size),
        fit_range=(float(lo), float(top)),
    )


def counting_function(spec: LengthSpectrum, radius: float | np.ndarray) -> int | np.ndarray:
    return spec.counting_function(radius)


def growth_constant(spec: LengthSpectrum, exponent: float) -> float:
    """max over R of N(R) e^{-exponent R}, evaluated at the jumps of N."""
    if not spec.entries:
        return 0.0
    lengths = spec.lengths
    counts = np.arange(1, len(lengths) + 1, dtype=float)
    return float(np.max(counts * np.exp(-exponent * lengths)))
