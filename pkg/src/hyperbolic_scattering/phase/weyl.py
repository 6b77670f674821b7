from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from hyperbolic_scattering.errors import EstimationError
from hyperbolic_scattering.fitting import EnvelopeFit, envelope_exponent
from hyperbolic_scattering.phase.probe import smooth_step
from hyperbolic_scattering.phase.scattering import PhaseSample
from hyperbolic_scattering.telemetry import get_logger, log_event

logger = get_logger("phase")

MIN_SAMPLES = 100
MAX_CONDITION = 1e12
# fraction of the log-z range tapered at each end of the fit window
TAPER = 0.1
ZERO_REMAINDER = 1e-11


@dataclass(frozen=True)
class WeylFit:
    leading_coefficient: float
    constant: float
    expected_coefficient: float | None
    remainder_z: np.ndarray = field(repr=False)
    remainder: np.ndarray = field(repr=False)
    integrated_remainder: np.ndarray = field(repr=False)
    remainder_fit: EnvelopeFit
    integrated_fit: EnvelopeFit
    fit_window: tuple[float, float]
    condition_number: float

    @property
    def coefficients(self) -> tuple[float, float]:
        """Coefficients of a z^2 + b."""
        return self.leading_coefficient, self.constant

    @property
    def remainder_exponent(self) -> float:
        return self.remainder_fit.exponent

    @property
    def integrated_remainder_exponent(self) -> float:
        return self.integrated_fit.exponent

    @property
    def relative_error(self) -> float | None:
        if not self.expected_coefficient:
            return None
        return abs(self.leading_coefficient - self.expected_coefficient) / abs(self.expected_coefficient)

    def summary(self) -> dict:
        return {
            "leading_coefficient": self.leading_coefficient,
            "constant": self.constant,
            "expected_coefficient": self.expected_coefficient,
            "relative_error": self.relative_error,
            "remainder_exponent": self.remainder_exponent,
            "remainder_at_floor": self.remainder_fit.at_floor,
            "integrated_remainder_exponent": self.integrated_remainder_exponent,
            "integrated_at_floor": self.integrated_fit.at_floor,
            "fit_window": list(self.fit_window),
            "condition_number": self.condition_number,
        }


def taper_weights(z: np.ndarray) -> np.ndarray:
    """Smooth window in log z: 0 at the ends of the range, 1 on its interior."""
    u = np.log(z)
    lo, hi = float(u.min()), float(u.max())
    width = TAPER * (hi - lo)
    if width <= 0.0:
        return np.ones_like(z)
    return smooth_step((u - lo) / width) * smooth_step((hi - u) / width)


def weyl_fit(
    samples: Sequence[PhaseSample],
    delta: float,
    volume: float | None = None,
    n_bins: int = 12,
) -> WeylFit:
    """
    Fit s(z) = a z^2 + b + R(z) and measure the growth of R and of its integral.

    Only samples with z > 0 enter; they must number at least 100 and span a decade.
    """
    z = np.array([p.z for p in samples if p.z > 0.0])
    s = np.array([p.s for p in samples if p.z > 0.0])
    if z.size < MIN_SAMPLES:
        raise EstimationError(f"Weyl fit needs at least {MIN_SAMPLES} samples with z > 0, got {z.size}")
    if z.max() < 10.0 * z.min():
        raise EstimationError(f"samples span [{z.min():.4g}, {z.max():.4g}], less than a decade")
    order = np.argsort(z)
    z, s = z[order], s[order]

    w = np.sqrt(taper_weights(z))
    design = np.column_stack([z**2, np.ones_like(z)])
    cond = float(np.linalg.cond(design * w[:, None]))
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        raise EstimationError(f"Weyl design matrix is ill-conditioned (condition number {cond:.3g})")
    (a, b), *_ = np.linalg.lstsq(design * w[:, None], s * w, rcond=None)

    remainder = s - (a * z**2 + b)
    scale = max(1.0, float(np.max(np.abs(s))))
    remainder[np.abs(remainder) <= ZERO_REMAINDER * scale] = 0.0
    # R(0) = s(0) - b = -b closes the integral at the origin
    integrated = cumulative_trapezoid(np.concatenate([[-b], remainder]), np.concatenate([[0.0], z]), initial=0.0)[1:]
    integrated[np.abs(integrated) <= ZERO_REMAINDER * scale * z.max()] = 0.0

    rem_fit = envelope_exponent(z, remainder, n_bins=n_bins)
    int_fit = envelope_exponent(z, integrated, n_bins=n_bins)
    expected = volume / (4.0 * math.pi) if volume is not None else None
    fit = WeylFit(
        leading_coefficient=float(a),
        constant=float(b),
        expected_coefficient=expected,
        remainder_z=z,
        remainder=remainder,
        integrated_remainder=integrated,
        remainder_fit=rem_fit,
        integrated_fit=int_fit,
        fit_window=(float(z.min()), float(z.max())),
        condition_number=cond,
    )
    log_event(logger, "weyl_fit", delta=delta, **{k: v for k, v in fit.summary().items() if k != "fit_window"})
    return fit


def exponent_chain_residual(remainder_exponent: float, pressure: float, lambda_max: float) -> float:
    """|remainder exponent - (1 + P / Lambda)| for surfaces (n = 1)."""
    return abs(remainder_exponent - (1.0 + pressure / lambda_max))
