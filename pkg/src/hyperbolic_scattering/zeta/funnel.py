from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hyperbolic_scattering.contour import ComplexBox, winding_number
from hyperbolic_scattering.zeta.euler import ZetaValue

FACTOR_TOL = 1e-18
MIN_REAL_PART = -60.0


def _k_max(sigma: float, funnel_length: float) -> int:
    # |e^{-(s + 2k + 1) l}| < FACTOR_TOL once 2k + 1 + sigma > -log(FACTOR_TOL) / l
    return max(0, int(math.ceil((-math.log(FACTOR_TOL) / funnel_length - sigma - 1.0) / 2.0)))


def zeta_funnel(s: complex, funnel_length: float) -> ZetaValue:
    """Z_F(s) = e^{-s l/4} prod_{k>=0} (1 - e^{-(s + 2k + 1) l})^2 for a hyperbolic funnel of boundary length l."""
    if funnel_length <= 0.0:
        raise ValueError(f"funnel length must be positive, got {funnel_length}")
    s = complex(s)
    if s.real < MIN_REAL_PART:
        raise ValueError(f"Re(s) = {s.real} is below the supported range {MIN_REAL_PART}")
    ell = funnel_length
    k_max = _k_max(s.real, ell)
    k = np.arange(k_max + 1, dtype=float)
    q = np.exp(-(s + 2.0 * k + 1.0) * ell)
    log_value = -s * ell / 4.0 + 2.0 * complex(np.sum(np.log1p(-q)))

    q_next = math.exp(-(s.real + 2.0 * (k_max + 1) + 1.0) * ell)
    tail = 2.0 * q_next / ((1.0 - q_next) * (1.0 - math.exp(-2.0 * ell)))
    return ZetaValue(s=s, value=complex(np.exp(log_value)), log_value=log_value, tail_bound=tail, terms_used=k_max + 1)


def funnel_phase(z: float | np.ndarray, funnel_length: float) -> np.ndarray:
    """
    Continuous arg of the product part of Z_F(1/2 + iz), without the -z l/4 prefactor phase.

    On Re(s) = 1/2 every factor has |e^{-(s + 2k + 1) l}| < 1, so the principal logarithm is continuous.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    ell = funnel_length
    k = np.arange(_k_max(0.5, ell) + 1, dtype=float)
    q = np.exp(-(0.5 + 2.0 * k[None, :] + 1.0) * ell) * np.exp(-1j * z[:, None] * ell)
    return 2.0 * np.sum(np.log1p(-q), axis=1).imag


@dataclass(frozen=True)
class FunnelZero:
    s: complex
    order: int
    modulus: float


def funnel_zero_lattice(funnel_length: float, k_max: int, m_max: int) -> list[FunnelZero]:
    """
    Zeros s = -(2k+1) + 2 pi i m / l for 0 <= k <= k_max, |m| <= m_max.

    The order of each zero is measured by the winding number of Z_F around a
    small square centred on it.
    """
    ell = funnel_length
    half = min(0.25, 0.5 * math.pi / ell)
    out: list[FunnelZero] = []
    for k in range(k_max + 1):
        for m in range(-m_max, m_max + 1):
            s0 = complex(-(2 * k + 1), 2.0 * math.pi * m / ell)
            order = winding_number(lambda s: zeta_funnel(s, ell).value, ComplexBox.around(s0, half))
            out.append(FunnelZero(s=s0, order=order, modulus=abs(zeta_funnel(s0, ell).value)))
    return out
