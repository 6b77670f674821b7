from __future__ import annotations

import math

import numpy as np

from hyperbolic_scattering.errors import CoverageError
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum


def smooth_step(x: float | np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)}) between."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    inner = (flat > 0.0) & (flat < 1.0)
    out = np.where(flat >= 1.0, 1.0, 0.0)
    xi = flat[inner]
    # logistic form of the same ratio; overflow near x = 0 gives the limit 0
    with np.errstate(over="ignore", divide="ignore"):
        out[inner] = 1.0 / (1.0 + np.exp(1.0 / xi - 1.0 / (1.0 - xi)))
    return out.reshape(x.shape)


def bump(x: float | np.ndarray) -> np.ndarray:
    """phi_0: 1 on [-1/2, 1/2], supported in (-1, 1)."""
    return smooth_step(2.0 * (1.0 - np.abs(np.asarray(x, dtype=float))))


def _supported_terms(alpha: float, spec: LengthSpectrum) -> tuple[np.ndarray, np.ndarray]:
    if spec.cutoff < alpha + 1.0:
        raise CoverageError(
            f"probe sum at alpha = {alpha:g} needs lengths up to {alpha + 1.0:g}, spectrum stops at {spec.cutoff:g}"
        )
    lengths = spec.lengths
    lengths = lengths[lengths < alpha + 1.0]
    if lengths.size == 0:
        return np.zeros(0), np.zeros(0)
    ells, ks = [], []
    for k in range(1, int(math.floor((alpha + 1.0) / lengths[0])) + 1):
        kl = k * lengths
        sel = (kl > alpha - 1.0) & (kl < alpha + 1.0)
        ells.append(lengths[sel])
        ks.append(np.full(int(np.count_nonzero(sel)), k, dtype=float))
    if not ells:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(ells), np.concatenate(ks)


def probe_sum_S(alpha: float, t: float, spec: LengthSpectrum) -> complex:
    """sum_{k >= 1} sum_gamma l / (2 sinh(k l / 2)) e^{-i t k l} phi_0(k l - alpha)."""
    ells, ks = _supported_terms(alpha, spec)
    if ells.size == 0:
        return 0j
    kl = ks * ells
    terms = ells / (2.0 * np.sinh(0.5 * kl)) * np.exp(-1j * t * kl) * bump(kl - alpha)
    return complex(np.sum(terms))


def probe_majorant(alpha: float, spec: LengthSpectrum) -> float:
    """Triangle-inequality bound: sum of l / (2 sinh(k l / 2)) over terms in the bump's support."""
    ells, ks = _supported_terms(alpha, spec)
    if ells.size == 0:
        return 0.0
    return float(np.sum(ells / (2.0 * np.sinh(0.5 * ks * ells))))
