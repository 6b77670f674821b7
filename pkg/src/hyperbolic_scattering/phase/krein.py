from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import mpmath
import numpy as np
from scipy.integrate import quad

from hyperbolic_scattering.contour import ComplexBox, winding_number
from hyperbolic_scattering.errors import MethodNotApplicableError, RouteError, ZeroOnContourError
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum
from hyperbolic_scattering.zeta.argument import argument_curve_determinant
from hyperbolic_scattering.zeta.euler import M_SERIES_TOL, TailModel

if TYPE_CHECKING:
    from hyperbolic_scattering.continuation.transfer import TransferDiscretization

CRITICAL_WINDOW = 1e-6
FIVE_POINT = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def gamma_ratio(t: float | np.ndarray, n: int = 1) -> float | np.ndarray:
    """Gamma(n/2 + it) Gamma(n/2 - it) / (Gamma(it) Gamma(-it)); for n = 1 this is t tanh(pi t)."""
    if n != 1:
        raise MethodNotApplicableError(f"only surfaces (n = 1) are supported, got n = {n}")
    return np.asarray(t) * np.tanh(np.pi * np.asarray(t)) if np.ndim(t) else float(t * math.tanh(math.pi * t))


def gamma_ratio_reference(t: float, dps: int = 40) -> float:
    """High-precision Gamma-function evaluation of the same ratio."""
    if t == 0.0:
        return 0.0
    with mpmath.workdps(dps):
        it = mpmath.mpc(0, t)
        num = mpmath.gamma(mpmath.mpf(1) / 2 + it) * mpmath.gamma(mpmath.mpf(1) / 2 - it)
        den = mpmath.gamma(it) * mpmath.gamma(-it)
        return float(mpmath.re(num / den))


def weyl_primitive(z: float | np.ndarray) -> float | np.ndarray:
    """F(z) = -int_0^z t tanh(pi t) dt, by adaptive quadrature between sorted sample points."""
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    order = np.argsort(np.abs(zs))
    out = np.empty(zs.size)
    acc, prev = 0.0, 0.0
    for k in order:
        a = abs(zs[k])
        if a > prev:
            piece, _ = quad(lambda t: t * math.tanh(math.pi * t), prev, a, epsabs=1e-13, epsrel=1e-13, limit=200)
            acc += piece
            prev = a
        # t tanh(pi t) is even, so F is odd
        out[k] = -acc if zs[k] >= 0.0 else acc
    return out if np.ndim(z) else float(out[0])


def weyl_primitive_derivative(z: float | np.ndarray) -> float | np.ndarray:
    return -gamma_ratio(z)


@dataclass(frozen=True)
class GeodesicSeries:
    """Amplitudes e^{-m l/2} / (m G(m)) and frequencies m l of the sine series of Arg Z(1/2 + iz)."""

    amplitudes: np.ndarray
    frequencies: np.ndarray
    tail_bound: float

    @classmethod
    def from_spectrum(cls, spec: LengthSpectrum, delta_hint: float, inflation: float = 1.2) -> "GeodesicSeries":
        lengths = spec.lengths
        if lengths.size == 0:
            return cls(np.zeros(0), np.zeros(0), 0.0)
        m_max = max(1, int(math.ceil(-math.log(M_SERIES_TOL) / (0.5 * lengths[0]))))
        m = np.arange(1, m_max + 1, dtype=float)
        ml = lengths[:, None] * m[None, :]
        amp = np.exp(-0.5 * ml - np.log1p(-np.exp(-ml)) - np.log(m)[None, :])
        tail = TailModel.from_spectrum(spec, delta_hint, inflation).log_tail(0.5)
        return cls(amp.ravel(), ml.ravel(), tail)

    @property
    def absolute_bound(self) -> float:
        return float(np.sum(self.amplitudes))

    def arg(self, z: np.ndarray) -> np.ndarray:
        return np.sin(np.outer(z, self.frequencies)) @ self.amplitudes

    def arg_derivative(self, z: np.ndarray) -> np.ndarray:
        return np.cos(np.outer(z, self.frequencies)) @ (self.amplitudes * self.frequencies)


@dataclass(frozen=True)
class XiValues:
    z: np.ndarray
    xi: np.ndarray
    tail_bound: float
    route: str


def xi_exact_series(
    z: float | np.ndarray,
    spec: LengthSpectrum,
    chi: int,
    delta: float,
) -> XiValues:
    """xi(z) = chi F(z) + (1/pi) sum_gamma sum_m e^{-m l/2} sin(z m l) / (m G(m)); needs delta < 1/2."""
    if delta >= 0.5:
        raise RouteError(
            f"delta = {delta:.6g} >= 1/2: the geodesic series diverges on the critical line; use xi_argument_route"
        )
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    series = GeodesicSeries.from_spectrum(spec, delta)
    xi = chi * np.asarray(weyl_primitive(zs)) + series.arg(zs) / math.pi
    return XiValues(zs, xi, series.tail_bound / math.pi, "exact_series")


def xi_series_derivative(z: np.ndarray, spec: LengthSpectrum, chi: int, delta: float) -> np.ndarray:
    """Termwise derivative of the exact series."""
    if delta >= 0.5:
        raise RouteError(f"delta = {delta:.6g} >= 1/2: no termwise series on the critical line")
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    series = GeodesicSeries.from_spectrum(spec, delta)
    return chi * np.asarray(weyl_primitive_derivative(zs)) + series.arg_derivative(zs) / math.pi


@dataclass(frozen=True)
class CriticalPoint:
    """Zeros of the determinant at lambda = 1/2; c enters xi as c/2."""

    multiplicity: int
    ambiguous: bool


def critical_point_constant(disc: "TransferDiscretization", window: float = CRITICAL_WINDOW) -> CriticalPoint:
    try:
        n = winding_number(disc, ComplexBox.around(complex(0.5, 0.0), window))
    except ZeroOnContourError:
        return CriticalPoint(0, True)
    if n == 0:
        return CriticalPoint(0, False)
    scale = max(abs(disc(complex(0.5 + 10 * window, 0.0))), abs(disc(complex(0.5 - 10 * window, 0.0))))
    exact = abs(disc(complex(0.5, 0.0))) <= 1e-12 * max(scale, 1e-300)
    return CriticalPoint(n, not exact)


def xi_argument_route(
    z: float | np.ndarray,
    chi: int,
    disc: "TransferDiscretization",
    critical: CriticalPoint | None = None,
) -> XiValues:
    """xi(z) = chi F(z) + (1/pi) Arg Z(1/2 + iz) + c/2, with the argument followed on the determinant."""
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    crit = critical if critical is not None else critical_point_constant(disc)
    start = 10 * CRITICAL_WINDOW if crit.multiplicity else 0.0
    zs_eval = np.maximum(zs, start)
    args = argument_curve_determinant(zs_eval, disc, start=start)
    xi = chi * np.asarray(weyl_primitive(zs)) + args / math.pi + 0.5 * crit.multiplicity
    return XiValues(zs, xi, disc.resolution_tol, "argument_integral")


def five_point_derivative(values_at: Callable[[np.ndarray], np.ndarray], z: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Central 5-point derivative of a vectorized function."""
    z = np.asarray(z, dtype=float)
    stencil = [values_at(z + k * h) for k in (-2.0, -1.0, 1.0, 2.0)]
    return sum(w * v for w, v in zip(FIVE_POINT, stencil)) / h


def argument_derivative_determinant(z: np.ndarray, disc: "TransferDiscretization", h: float = 1e-3) -> np.ndarray:
    """d/dz Arg det(1 - L_{1/2 + iz}) by 5-point differences of local phase increments."""
    z = np.asarray(z, dtype=float)
    base = np.array([disc(complex(0.5, t)) for t in z])

    def increments(shifted: np.ndarray) -> np.ndarray:
        vals = np.array([disc(complex(0.5, t)) for t in shifted])
        return np.angle(vals / base)

    return five_point_derivative(increments, z, h)
