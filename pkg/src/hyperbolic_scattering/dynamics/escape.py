from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from hyperbolic_scattering.dynamics.core import Frames, convex_core, sample_liouville
from hyperbolic_scattering.errors import EstimationError, InsufficientTrappingError, PrecisionError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.telemetry import get_logger, log_event, timed

logger = get_logger("dynamics")

MIN_SAMPLES = 10_000
FIT_WINDOW = (1e-3, 1e-1)
CONFIDENCE = 0.95
MAX_CI_WIDTH = 0.1
MIN_LAMBDA_TIME = 10.0


@dataclass(frozen=True)
class EscapeEstimate:
    times: np.ndarray
    trapped_fractions: np.ndarray
    stderr: np.ndarray
    sample_count: int
    fitted_rate: float
    confidence_interval: tuple[float, float]
    fit_points: int = 0
    efficiency: float = 1.0
    exit_times: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def ci_width(self) -> float:
        lo, hi = self.confidence_interval
        return hi - lo

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"t": self.times, "fraction": self.trapped_fractions, "stderr": self.stderr},
            columns=["t", "fraction", "stderr"],
        )

    def summary(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "fitted_rate": self.fitted_rate,
            "confidence_interval": list(self.confidence_interval),
            "fit_points": self.fit_points,
            "sampling_efficiency": self.efficiency,
        }


def survival_curve(exit_times: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Empirical P(exit >= t) and its binomial standard error."""
    n = exit_times.size
    ordered = np.sort(exit_times)
    kept = n - np.searchsorted(ordered, times, side="left")
    frac = kept / n
    return frac, np.sqrt(frac * (1.0 - frac) / n)


def fit_escape_rate(
    times: np.ndarray, fractions: np.ndarray, n: int, window: tuple[float, float] = FIT_WINDOW
) -> tuple[float, tuple[float, float], int]:
    """
    Weighted least squares of log fraction against t inside the fraction window.

    The binomial error of a fraction f from n samples gives log f the variance (1 - f) / (n f).
    """
    sel = (fractions >= window[0]) & (fractions <= window[1])
    t, f = times[sel], fractions[sel]
    if t.size < 3:
        raise EstimationError(
            f"only {t.size} time points have trapped fractions in [{window[0]:g}, {window[1]:g}]; "
            "extend the time grid or raise the sample count"
        )
    w = n * f / (1.0 - f)
    design = np.column_stack([np.ones_like(t), t])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], np.log(f) * sw, rcond=None)
    resid = np.log(f) - design @ coef
    dof = t.size - 2
    # scale by the reduced chi-square when the scatter exceeds the binomial model
    scale = max(1.0, float(np.sum(w * resid**2)) / dof) if dof > 0 else 1.0
    cov = np.linalg.inv(design.T @ (design * w[:, None])) * scale
    se = math.sqrt(cov[1, 1])
    q = stats.t.ppf(0.5 + 0.5 * CONFIDENCE, max(dof, 1))
    rate = float(coef[1])
    return rate, (rate - q * se, rate + q * se), int(t.size)


def _sample_exit_times(
    s: SchottkySurface, n_samples: int, seed: int, horizon: float, workers: int | None
) -> tuple[np.ndarray, float, Frames]:
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    settings = get_settings()
    core = convex_core(s, settings.core_collar)
    frames, efficiency = sample_liouville(core, n_samples, seed, workers or settings.workers)
    return core.exit_times(frames, horizon), efficiency, frames


def trapped_fraction(
    s: SchottkySurface,
    times: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> EscapeEstimate:
    """
    Fraction of Liouville samples over the core whose trajectory is still in the
    core at time t, with the escape rate fitted where it lies in [1e-3, 1e-1].
    """
    t = np.asarray(times, dtype=float)
    if t.size == 0 or np.any(t < 0.0) or np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be a strictly increasing grid of t >= 0")
    with timed(logger, "trapped_fraction", surface=s.name, samples=n_samples, seed=seed) as ev:
        exits, efficiency, _ = _sample_exit_times(s, n_samples, seed, float(t[-1]), workers)
        frac, err = survival_curve(exits, t)
        if t[0] == 0.0:
            frac[0], err[0] = 1.0, 0.0
        rate, ci, used = fit_escape_rate(t, frac, n_samples)
        ev.update(fitted_rate=rate, ci_low=ci[0], ci_high=ci[1], efficiency=efficiency)
    return EscapeEstimate(
        times=t,
        trapped_fractions=frac,
        stderr=err,
        sample_count=n_samples,
        fitted_rate=rate,
        confidence_interval=ci,
        fit_points=used,
        efficiency=efficiency,
        exit_times=exits,
    )


def jacobi_propagator(t: float) -> np.ndarray:
    """
    Differential of the time-t flow in the frame (flow, stable-unstable plane).

    Perpendicular Jacobi fields in curvature -1 solve J'' = J, so (J, J') evolves
    by [[cosh t, sinh t], [sinh t, cosh t]]; the flow direction is preserved.
    """
    ch, sh = math.cosh(t), math.sinh(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, ch, sh], [0.0, sh, ch]])


def jacobi_growth(frames: Frames, t: float) -> np.ndarray:
    """
    Growth |(J, J')(t)| / |(J, J')(0)| of one perpendicular Jacobi field per frame.

    Each field starts from (J, J') = (cos psi, sin psi), psi the direction angle
    of its frame, and is evolved by the closed-form propagator.
    """
    psi = frames.direction_angle()
    start = np.stack([np.cos(psi), np.sin(psi)])
    return np.linalg.norm(jacobi_propagator(t)[1:, 1:] @ start, axis=0)


def lambda_max_estimate(
    s: SchottkySurface,
    t_max: float,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> float:
    """(1/t_max) log of the largest Jacobi-field growth over samples still trapped at t_max."""
    if t_max < MIN_LAMBDA_TIME:
        raise ValueError(f"t_max must be at least {MIN_LAMBDA_TIME:g}, got {t_max:g}")
    exits, _, frames = _sample_exit_times(s, n_samples, seed, t_max, workers)
    kept = exits >= t_max
    trapped = int(np.count_nonzero(kept))
    if trapped == 0:
        raise InsufficientTrappingError(
            f"none of {n_samples} samples stayed in the core of {s.name} up to t = {t_max:g}; raise n_samples"
        )
    growth = jacobi_growth(frames.select(kept), t_max)
    estimate = math.log(float(np.max(growth))) / t_max
    log_event(logger, "lambda_max", surface=s.name, t_max=t_max, trapped=trapped, estimate=estimate)
    return estimate


def pressure_from_escape(est: EscapeEstimate) -> float:
    """Escape rate as the estimate of the topological pressure of the unstable Jacobian."""
    if not est.ci_width < MAX_CI_WIDTH:
        raise PrecisionError(
            f"escape-rate interval [{est.confidence_interval[0]:.4f}, {est.confidence_interval[1]:.4f}] "
            f"is wider than {MAX_CI_WIDTH}; raise n_samples"
        )
    if est.fitted_rate >= 0.0:
        logger.warning("nonnegative_pressure", extra={"fitted_rate": est.fitted_rate})
    return est.fitted_rate


def exponent_chain(rate: float, lambda_max: float) -> float:
    """1 + P / Lambda_max, the dimension predicted by the escape data."""
    return 1.0 + rate / lambda_max
