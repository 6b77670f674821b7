from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from hyperbolic_scattering.errors import DivergenceRegionError, TailTooLargeError
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.spectrum.counting import growth_constant
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum
from hyperbolic_scattering.telemetry import get_logger

logger = get_logger("zeta")

M_SERIES_TOL = 1e-18


@dataclass(frozen=True)
class ZetaValue:
    s: complex
    value: complex
    log_value: complex
    tail_bound: float
    terms_used: int


@dataclass(frozen=True)
class LogDerivative:
    s: complex
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class TailModel:
    """N(R) <= constant * e^{exponent R}, inflated from the measured spectrum."""

    exponent: float
    constant: float
    shortest: float
    cutoff: float

    @classmethod
    def from_spectrum(cls, spec: LengthSpectrum, delta_hint: float, inflation: float) -> "TailModel":
        exponent = inflation * max(delta_hint, 0.0)
        constant = inflation * growth_constant(spec, exponent)
        return cls(exponent, constant, spec.shortest, spec.cutoff)

    def _k(self, sigma: float) -> float:
        return 1.0 / ((1.0 - math.exp(-self.shortest)) * (1.0 - math.exp(-sigma * self.shortest)))

    def log_tail(self, sigma: float) -> float:
        """Bound on |log Z| contributed by geodesics longer than the cutoff."""
        gap = sigma - self.exponent
        if gap <= 0.0 or not math.isfinite(self.cutoff):
            return math.inf
        return self._k(sigma) * sigma * self.constant * math.exp(-gap * self.cutoff) / gap

    def logderiv_tail(self, sigma: float) -> float:
        gap = sigma - self.exponent
        if gap <= 0.0 or not math.isfinite(self.cutoff):
            return math.inf
        big_l = self.cutoff
        return (
            self._k(sigma) * sigma * self.constant * math.exp(-gap * big_l) * (big_l / gap + 1.0 / gap**2)
        )

    def needed_cutoff(self, sigma: float, tolerance: float) -> float:
        gap = sigma - self.exponent
        if gap <= 0.0:
            return math.inf
        return math.log(self._k(sigma) * sigma * self.constant / (gap * tolerance)) / gap


def _m_max(sigma: float, shortest: float) -> int:
    return max(1, int(math.ceil(-math.log(M_SERIES_TOL) / (sigma * shortest))))


def _series_terms(s: complex, lengths: np.ndarray, m_max: int) -> np.ndarray:
    """(1/m) e^{-s m l} / G(m) on a (geodesic, m) grid, with G(m) = 1 - e^{-m l} taken in log space."""
    m = np.arange(1, m_max + 1, dtype=float)
    ml = lengths[:, None] * m[None, :]
    log_terms = -s * ml - np.log1p(-np.exp(-ml)) - np.log(m)[None, :]
    return np.exp(log_terms)


def _m_tail(sigma: float, lengths: np.ndarray, m_max: int) -> float:
    # sum over m > m_max of e^{-sigma m l} / (m G(m)), bounded by a geometric series
    q = np.exp(-sigma * lengths)
    return float(np.sum(q ** (m_max + 1) / ((1.0 - q) * (1.0 - np.exp(-lengths)))))


def _check_region(s: complex, delta_hint: float) -> float:
    sigma = float(np.real(s))
    if sigma <= delta_hint:
        raise DivergenceRegionError(
            f"Re(s) = {sigma:.6g} is not above the critical exponent {delta_hint:.6g}; "
            "use the transfer-operator determinant"
        )
    return sigma


def zeta_euler(
    s: complex,
    spec: LengthSpectrum,
    delta_hint: float,
    tolerance: float | None = None,
    inflation: float | None = None,
    strict: bool = True,
) -> ZetaValue:
    """
    Selberg zeta function from the truncated Euler product.

    log Z(s) = - sum_gamma sum_m (1/m) e^{-s m l} / (1 - e^{-m l}); the tail bound
    covers geodesics above the spectrum cutoff and the truncated m-series.
    """
    settings = get_settings()
    tolerance = tolerance if tolerance is not None else settings.zeta_tolerance
    inflation = inflation if inflation is not None else settings.tail_inflation
    s = complex(s)
    sigma = _check_region(s, delta_hint)

    model = TailModel.from_spectrum(spec, delta_hint, inflation)
    tail = model.log_tail(sigma)
    if strict and tail > tolerance:
        needed = model.needed_cutoff(sigma, tolerance)
        raise TailTooLargeError(
            f"tail bound {tail:.3g} at Re(s) = {sigma:.6g} exceeds {tolerance:.3g}; "
            f"enumerate up to L = {needed:.4g} (have {spec.cutoff:.4g})",
            needed_cutoff=needed,
        )

    lengths = spec.lengths
    if lengths.size == 0:
        return ZetaValue(s, 1.0 + 0.0j, 0.0j, tail, 0)
    m_max = _m_max(sigma, float(lengths[0]))
    terms = _series_terms(s, lengths, m_max)
    log_value = -complex(np.sum(np.sum(terms, axis=1)))
    tail += _m_tail(sigma, lengths, m_max)
    used = int(np.count_nonzero(np.abs(terms) > 0.0))
    return ZetaValue(s=s, value=complex(np.exp(log_value)), log_value=log_value, tail_bound=tail, terms_used=used)


def zeta_logderiv(
    s: complex,
    spec: LengthSpectrum,
    delta_hint: float,
    inflation: float | None = None,
) -> LogDerivative:
    """Z'/Z(s) = sum_gamma sum_m l e^{-s m l} / (1 - e^{-m l})."""
    settings = get_settings()
    inflation = inflation if inflation is not None else settings.tail_inflation
    s = complex(s)
    sigma = _check_region(s, delta_hint)
    model = TailModel.from_spectrum(spec, delta_hint, inflation)
    lengths = spec.lengths
    if lengths.size == 0:
        return LogDerivative(s, 0.0j, model.logderiv_tail(sigma))
    m_max = _m_max(sigma, float(lengths[0]))
    m = np.arange(1, m_max + 1, dtype=float)
    # (1/m) term times m l
    terms = _series_terms(s, lengths, m_max) * (lengths[:, None] * m[None, :])
    value = complex(np.sum(np.sum(terms, axis=1)))
    return LogDerivative(s=s, value=value, tail_bound=model.logderiv_tail(sigma))


def zeta_table(
    spec: LengthSpectrum,
    points: Iterable[complex],
    delta_hint: float,
    tolerance: float | None = None,
) -> pd.DataFrame:
    rows = []
    for p in points:
        zv = zeta_euler(p, spec, delta_hint, tolerance=tolerance, strict=False)
        rows.append(
            {
                "re_s": zv.s.real,
                "im_s": zv.s.imag,
                "re_log_z": zv.log_value.real,
                "im_log_z": zv.log_value.imag,
                "tail_bound": zv.tail_bound,
            }
        )
    return pd.DataFrame(rows, columns=["re_s", "im_s", "re_log_z", "im_log_z", "tail_bound"])


@dataclass(frozen=True)
class HalfPlaneConstant:
    abscissa: int
    min_real_part: float
    z_max: float


def find_zeta_half_plane_constant(
    spec: LengthSpectrum,
    delta_hint: float,
    z_samples: np.ndarray | None = None,
    max_abscissa: int = 20,
) -> HalfPlaneConstant | None:
    """Smallest integer N <= max_abscissa with Re Z(N + iz) > 1/2 on every sample z."""
    z = np.linspace(0.0, 100.0, 401) if z_samples is None else np.asarray(z_samples, dtype=float)
    for n in range(max(1, int(math.floor(delta_hint)) + 1), max_abscissa + 1):
        worst = min(zeta_euler(n + 1j * t, spec, delta_hint, strict=False).value.real for t in z)
        if worst > 0.5:
            return HalfPlaneConstant(abscissa=n, min_real_part=float(worst), z_max=float(z.max()))
    return None
