from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Sequence

import numpy as np

from hyperbolic_scattering.contour import ComplexBox, central_derivative
from hyperbolic_scattering.continuation.resonances import Resonance, ResonanceSet
from hyperbolic_scattering.errors import CoverageError
from hyperbolic_scattering.fitting import EnvelopeFit, envelope_exponent
from hyperbolic_scattering.telemetry import get_logger, log_event

if TYPE_CHECKING:
    from hyperbolic_scattering.continuation.transfer import TransferDiscretization

logger = get_logger("phase")

WINDOW_BINS = 6


def resonance_disc_region(center: float, sigma: float) -> ComplexBox:
    """Lambda-plane box around the disc |rho - center| <= sigma + 1."""
    r = sigma + 1.0
    top = 0.5 if center - r > 0.0 else 0.5 + r
    return ComplexBox(0.5 - r, top, center - r, center + r)


def disc_resonances(res: ResonanceSet, center: float, sigma: float) -> list[Resonance]:
    region = resonance_disc_region(center, sigma)
    if not res.covers(region):
        raise CoverageError(
            f"resonances in the disc of radius {sigma + 1.0:g} around z = {center:g} are not fully enumerated"
        )
    return [r for r in res if abs(r.z - center) <= sigma + 1.0]


def resonance_sum(z: np.ndarray, resonances: Sequence[Resonance]) -> np.ndarray:
    """(1/pi) sum_rho m Im(rho) / |z - rho|^2."""
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.size)
    for r in resonances:
        total += r.multiplicity * r.z.imag / np.abs(z - r.z) ** 2
    return total / math.pi


def resonance_majorant(z: np.ndarray, resonances: Sequence[Resonance]) -> float:
    """Upper bound for |resonance_sum| over the window."""
    z = np.asarray(z, dtype=float)
    total = 0.0
    for r in resonances:
        nearest = float(np.min(np.abs(z - r.z)))
        total += r.multiplicity * abs(r.z.imag) / nearest**2
    return total / math.pi


@dataclass(frozen=True)
class BreitWignerReport:
    window: tuple[float, float]
    sigma: float
    resonance_count: int
    majorant: float
    quadratic_residual: np.ndarray
    linear_residual: np.ndarray
    quadratic_fit: EnvelopeFit
    linear_fit: EnvelopeFit
    log_derivative_fit: EnvelopeFit | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "window": list(self.window),
            "sigma": self.sigma,
            "resonance_count": self.resonance_count,
            "resonance_majorant": self.majorant,
            "quadratic_reading": {
                "max_abs_residual": float(np.max(np.abs(self.quadratic_residual))),
                "residual_exponent": self.quadratic_fit.exponent,
                "at_floor": self.quadratic_fit.at_floor,
            },
            "linear_reading": {
                "max_abs_residual": float(np.max(np.abs(self.linear_residual))),
                "residual_exponent": self.linear_fit.exponent,
                "at_floor": self.linear_fit.at_floor,
            },
        }
        if self.log_derivative_fit is not None:
            out["log_derivative_check"] = {
                "exponent": self.log_derivative_fit.exponent,
                "constant": self.log_derivative_fit.constant,
            }
        return out


def log_derivative_defect(
    z: np.ndarray,
    disc: "TransferDiscretization",
    resonances: Sequence[Resonance],
) -> np.ndarray:
    """|Z'/Z(1/2 + iz) - sum_s m / (1/2 + iz - s)| with Z the continued determinant."""
    out = np.empty(len(z))
    for k, t in enumerate(z):
        lam = complex(0.5, float(t))
        logderiv = central_derivative(disc, lam) / disc(lam)
        poles = sum(r.multiplicity / (lam - r.s) for r in resonances)
        out[k] = abs(logderiv - poles)
    return out


def breit_wigner_check(
    z_window: tuple[float, float],
    res: ResonanceSet,
    sigma: float,
    z: Sequence[float],
    ds_dz: Sequence[float],
    volume: float,
    disc: "TransferDiscretization | None" = None,
) -> BreitWignerReport:
    """
    Compare d s/dz with the leading term plus the resonance Lorentzians.

    Both readings of the leading term are reported: z^2 Vol/(4 pi) and its
    derivative-consistent form z Vol/(2 pi).
    """
    lo, hi = z_window
    zz = np.asarray(z, dtype=float)
    dd = np.asarray(ds_dz, dtype=float)
    sel = (zz >= lo) & (zz <= hi)
    zz, dd = zz[sel], dd[sel]
    center = 0.5 * (lo + hi)
    near = disc_resonances(res, center, sigma)

    lorentz = resonance_sum(zz, near)
    quadratic = dd - volume * zz**2 / (4.0 * math.pi) - lorentz
    linear = dd - volume * zz / (2.0 * math.pi) - lorentz
    ld_fit = None
    if disc is not None:
        ld_fit = envelope_exponent(zz, log_derivative_defect(zz, disc, near), n_bins=WINDOW_BINS)

    report = BreitWignerReport(
        window=(float(lo), float(hi)),
        sigma=sigma,
        resonance_count=len(near),
        majorant=resonance_majorant(zz, near),
        quadratic_residual=quadratic,
        linear_residual=linear,
        quadratic_fit=envelope_exponent(zz, quadratic, n_bins=WINDOW_BINS),
        linear_fit=envelope_exponent(zz, linear, n_bins=WINDOW_BINS),
        log_derivative_fit=ld_fit,
    )
    log_event(
        logger,
        "breit_wigner_check",
        window=list(report.window),
        resonances=len(near),
        linear_exponent=report.linear_fit.exponent,
        quadratic_exponent=report.quadratic_fit.exponent,
    )
    return report
