from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
from scipy.integrate import quad

from hyperbolic_scattering.contour import phase_change
from hyperbolic_scattering.errors import RouteError
from hyperbolic_scattering.fitting import EnvelopeFit, envelope_exponent
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum
from hyperbolic_scattering.zeta.euler import zeta_euler, zeta_logderiv

if TYPE_CHECKING:
    from hyperbolic_scattering.continuation.transfer import TransferDiscretization

QUAD_LIMIT = 2000


class ZetaRoute(str, Enum):
    EULER = "euler"
    DETERMINANT = "determinant"


@dataclass(frozen=True)
class ArgumentValue:
    z: float
    value: float
    error: float
    route: ZetaRoute


def _euler_arg(z: float, spec: LengthSpectrum, delta_hint: float) -> ArgumentValue:
    if delta_hint >= 0.5:
        raise RouteError(
            f"the Euler product does not converge on Re(s) = 1/2 when delta = {delta_hint:.6g} >= 1/2; "
            "use the determinant route"
        )
    if z == 0.0:
        return ArgumentValue(0.0, 0.0, 0.0, ZetaRoute.EULER)

    def integrand(t: float) -> float:
        return zeta_logderiv(0.5 + 1j * t, spec, delta_hint).value.real

    value, err = quad(integrand, 0.0, z, limit=QUAD_LIMIT, epsabs=1e-11, epsrel=1e-11)
    return ArgumentValue(float(z), float(value), float(err), ZetaRoute.EULER)


def _determinant_arg(z: float, disc: "TransferDiscretization") -> ArgumentValue:
    if z == 0.0:
        return ArgumentValue(0.0, 0.0, 0.0, ZetaRoute.DETERMINANT)
    # about eight samples per unit of z resolves the oscillation of det(1 - L_s)
    n = max(16, int(math.ceil(8.0 * abs(z))))
    value = phase_change(disc, complex(0.5, 0.0), complex(0.5, z), n_initial=n)
    return ArgumentValue(float(z), float(value), disc.resolution_tol, ZetaRoute.DETERMINANT)


def arg_zeta(
    z: float,
    route: ZetaRoute | str,
    spec: LengthSpectrum | None = None,
    delta_hint: float | None = None,
    disc: "TransferDiscretization | None" = None,
) -> ArgumentValue:
    """
    Arg Z(1/2 + iz) as the integral of Re Z'/Z(1/2 + it) over [0, z].

    The Euler route integrates the log-derivative series; the determinant route
    follows the phase of the continued determinant continuously along the line.
    """
    route = ZetaRoute(route)
    if route is ZetaRoute.EULER:
        if spec is None or delta_hint is None:
            raise RouteError("the Euler route needs a length spectrum and a delta hint")
        return _euler_arg(z, spec, delta_hint)
    if disc is None:
        raise RouteError("the determinant route needs a transfer discretization")
    return _determinant_arg(z, disc)


def argument_curve_euler(z: np.ndarray, spec: LengthSpectrum, delta_hint: float) -> np.ndarray:
    """Im log Z(1/2 + iz) from the Euler sum, the continuous branch vanishing at z = 0."""
    if delta_hint >= 0.5:
        raise RouteError(f"delta = {delta_hint:.6g} >= 1/2: the Euler sum diverges on the critical line")
    return np.array([zeta_euler(0.5 + 1j * t, spec, delta_hint, strict=False).log_value.imag for t in z])


def argument_curve_determinant(z: np.ndarray, disc: "TransferDiscretization", start: float = 0.0) -> np.ndarray:
    """
    Continuous arg of the determinant along 1/2 + iz for sorted z >= start, zero at z = start.

    A positive start avoids a zero of the determinant at lambda = 1/2.
    """
    z = np.asarray(z, dtype=float)
    if z.size and (np.any(np.diff(z) < 0.0) or z[0] < start):
        raise ValueError(f"z grid must be sorted and start at or above {start}")
    out = np.empty(z.size)
    acc, prev = 0.0, float(start)
    for k, t in enumerate(z):
        if t > prev:
            n = max(4, int(math.ceil(8.0 * (t - prev))))
            acc += phase_change(disc, complex(0.5, prev), complex(0.5, t), n_initial=n)
        out[k] = acc
        prev = float(t)
    return out


def integrated_argument(z: float, arg_fn: Callable[[float], float], lower: float = 1.0) -> tuple[float, float]:
    """Integral of Arg Z(1/2 + it) over [lower, z], with quadrature error estimate."""
    value, err = quad(arg_fn, lower, z, limit=QUAD_LIMIT, epsabs=1e-9, epsrel=1e-9)
    return float(value), float(err)


def argument_growth(z: Sequence[float], args: Sequence[float]) -> EnvelopeFit:
    return envelope_exponent(np.asarray(z), np.asarray(args))


def log_modulus_growth(
    spec: LengthSpectrum,
    delta_hint: float,
    sigma: float,
    z: Sequence[float],
) -> EnvelopeFit:
    """Envelope exponent of log|Z(sigma + iz)| on the given samples."""
    logs = [zeta_euler(sigma + 1j * t, spec, delta_hint, strict=False).log_value.real for t in z]
    return envelope_exponent(np.asarray(z), np.asarray(logs))
