from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from hyperbolic_scattering.errors import EstimationError

FLOOR = 1e-13


@dataclass(frozen=True)
class EnvelopeFit:
    """Power law C * z^exponent fitted to the log-binned maximum envelope of |values|."""

    exponent: float
    stderr: float
    log_constant: float
    n_bins: int
    at_floor: bool = False

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant) if math.isfinite(self.log_constant) else 0.0


def envelope_exponent(
    z: np.ndarray,
    values: np.ndarray,
    n_bins: int = 12,
    floor: float = FLOOR,
) -> EnvelopeFit:
    z = np.asarray(z, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if z.size != v.size or z.size < 2 * n_bins:
        raise EstimationError(f"need at least {2 * n_bins} samples for an envelope fit, got {z.size}")
    if np.any(z <= 0.0):
        raise EstimationError("envelope fits need z > 0")

    scale = max(1.0, float(np.max(v)))
    if float(np.max(v)) <= floor * scale:
        return EnvelopeFit(-math.inf, 0.0, -math.inf, 0, at_floor=True)

    edges = np.geomspace(z.min(), z.max(), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, n_bins - 1)
    xs, ys = [], []
    for b in range(n_bins):
        sel = idx == b
        if not np.any(sel):
            continue
        k = np.argmax(np.where(sel, v, -np.inf))
        if v[k] <= floor * scale:
            continue
        xs.append(math.log(z[k]))
        ys.append(math.log(v[k]))
    if len(xs) < 3:
        return EnvelopeFit(-math.inf, 0.0, -math.inf, len(xs), at_floor=True)
    fit = linregress(xs, ys)
    return EnvelopeFit(float(fit.slope), float(fit.stderr), float(fit.intercept), len(xs))
