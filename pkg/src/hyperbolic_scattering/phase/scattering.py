from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
import pandas as pd

from hyperbolic_scattering.errors import RouteError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.phase.krein import (
    CriticalPoint,
    GeodesicSeries,
    argument_derivative_determinant,
    critical_point_constant,
    five_point_derivative,
    weyl_primitive,
    xi_argument_route,
    xi_exact_series,
    xi_series_derivative,
)
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum
from hyperbolic_scattering.telemetry import get_logger, timed
from hyperbolic_scattering.zeta.funnel import funnel_phase

if TYPE_CHECKING:
    from hyperbolic_scattering.continuation.transfer import TransferDiscretization

logger = get_logger("phase")

DERIVATIVE_STEP = 1e-3


class PhaseRoute(str, Enum):
    EXACT_SERIES = "exact_series"
    ARGUMENT_INTEGRAL = "argument_integral"


@dataclass(frozen=True)
class PhaseSample:
    """
    Scattering phase at one frequency.

    xi_funnels sums the funnel Krein functions without their linear prefactor phase,
    which is reported as xi_funnels_drift = -z sum_j l_j / (4 pi).
    """

    z: float
    xi: float
    xi_funnels: float
    xi_funnels_drift: float
    s: float
    ds_dz: float
    route: PhaseRoute


@dataclass(frozen=True)
class PhaseCurve:
    samples: list[PhaseSample]
    critical: CriticalPoint
    funnel_sup: float
    series_bound: float | None = None

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.samples])

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.samples])

    @property
    def ds_dz(self) -> np.ndarray:
        return np.array([p.ds_dz for p in self.samples])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "z": [p.z for p in self.samples],
                "xi": [p.xi for p in self.samples],
                "xi_F": [p.xi_funnels for p in self.samples],
                "s": [p.s for p in self.samples],
                "ds_dz": [p.ds_dz for p in self.samples],
            },
            columns=["z", "xi", "xi_F", "s", "ds_dz"],
        )


def funnel_xi(z: np.ndarray, funnel_lengths: Sequence[float]) -> np.ndarray:
    """Sum over funnels of (1/pi)(Arg Z_F(1/2 + iz) + z l/4), zero at z = 0."""
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.size)
    for ell in funnel_lengths:
        total += funnel_phase(z, ell) / math.pi
    return total


def _series_route(
    z: np.ndarray, spec: LengthSpectrum, chi: int, delta: float
) -> tuple[np.ndarray, np.ndarray, Callable[[np.ndarray], np.ndarray]]:
    xi = xi_exact_series(z, spec, chi, delta).xi

    def xi_at(x: np.ndarray) -> np.ndarray:
        return xi_exact_series(x, spec, chi, delta).xi

    return xi, five_point_derivative(xi_at, z, DERIVATIVE_STEP), xi_at


def scattering_phase(
    z: float | Sequence[float] | np.ndarray,
    surface: SchottkySurface,
    route: PhaseRoute | str = PhaseRoute.EXACT_SERIES,
    spec: LengthSpectrum | None = None,
    delta: float | None = None,
    disc: "TransferDiscretization | None" = None,
) -> PhaseCurve:
    """
    s(z) = xi(z) - sum_j xi_{F_j}(z), normalized so that s(0+) = 0.

    The exact-series route needs an oriented length spectrum and delta < 1/2; the
    argument route follows the phase of the continued determinant and works for any delta.
    """
    route = PhaseRoute(route)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zs < 0.0) or np.any(np.diff(zs) < 0.0):
        raise ValueError("phase samples need a sorted grid of z >= 0")
    chi = surface.euler_characteristic

    with timed(logger, "scattering_phase", surface=surface.name, route=route.value, samples=int(zs.size)) as ev:
        series_bound = None
        if route is PhaseRoute.EXACT_SERIES:
            if spec is None or delta is None:
                raise RouteError("the exact-series route needs a length spectrum and delta")
            xi, dxi, _ = _series_route(zs, spec, chi, delta)
            critical = CriticalPoint(0, False)
            series_bound = GeodesicSeries.from_spectrum(spec, delta).absolute_bound / math.pi
        else:
            if disc is None:
                raise RouteError("the argument route needs a transfer discretization")
            critical = critical_point_constant(disc)
            if critical.ambiguous:
                logger.warning(
                    "critical_zero_ambiguous",
                    extra={"surface": surface.name, "multiplicity": critical.multiplicity},
                )
            xi = xi_argument_route(zs, chi, disc, critical).xi
            dxi = chi * (-zs * np.tanh(np.pi * zs)) + argument_derivative_determinant(zs, disc, DERIVATIVE_STEP) / math.pi

        xf = funnel_xi(zs, surface.funnel_lengths)
        dxf = five_point_derivative(lambda x: funnel_xi(x, surface.funnel_lengths), zs, DERIVATIVE_STEP)
        drift = -zs * sum(surface.funnel_lengths) / (4.0 * math.pi)
        s = xi - 0.5 * critical.multiplicity - xf
        ds = dxi - dxf
        funnel_sup = float(np.max(np.abs(xf))) if xf.size else 0.0
        ev.update(funnel_sup=funnel_sup, critical_multiplicity=critical.multiplicity)

    samples = [
        PhaseSample(float(zs[k]), float(xi[k]), float(xf[k]), float(drift[k]), float(s[k]), float(ds[k]), route)
        for k in range(zs.size)
    ]
    return PhaseCurve(samples, critical, funnel_sup, series_bound)


def series_derivative_check(z: np.ndarray, spec: LengthSpectrum, chi: int, delta: float) -> float:
    """Largest gap between the termwise derivative of xi and its 5-point difference."""
    _, dxi, _ = _series_route(np.asarray(z, dtype=float), spec, chi, delta)
    return float(np.max(np.abs(dxi - xi_series_derivative(z, spec, chi, delta))))


def functional_equation_residual(
    z: float,
    xi: float,
    chi: int,
    zeta_at: Callable[[complex], complex],
    critical_multiplicity: int = 0,
) -> float:
    """|exp(-2 pi i xi + 2 pi i chi F + i pi c) - Z(1/2 - iz)/Z(1/2 + iz)|."""
    lhs = np.exp(
        -2j * math.pi * xi + 2j * math.pi * chi * float(weyl_primitive(z)) + 1j * math.pi * critical_multiplicity
    )
    rhs = zeta_at(complex(0.5, -z)) / zeta_at(complex(0.5, z))
    return float(abs(lhs - rhs))
