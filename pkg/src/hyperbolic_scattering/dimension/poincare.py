from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np
from scipy.optimize import bisect

from hyperbolic_scattering.errors import BracketingError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import iter_word_levels, letter_matrices
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.telemetry import get_logger, timed

logger = get_logger("dimension")

MAX_LEVEL_WORDS = 2_000_000
SLOPE_LEVELS = 4
SECOND_BASE_POINT = 0.5 + 2.0j


class DimensionMethod(str, Enum):
    POINCARE = "poincare_exponent"
    REFINEMENT = "refinement_eigenvalue"


@dataclass(frozen=True)
class DimensionEstimate:
    delta: float
    method: DimensionMethod
    uncertainty: float
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def agrees_with(self, other: "DimensionEstimate", slack: float = 0.0) -> bool:
        return abs(self.delta - other.delta) <= self.uncertainty + other.uncertainty + slack


def _base_point_conjugator(p: complex) -> np.ndarray:
    """Real affine map h with h(i) = p, as a unimodular matrix."""
    y = math.sqrt(p.imag)
    return np.array([[y, p.real / y], [0.0, 1.0 / y]])


def orbit_distances(s: SchottkySurface, max_length: int, base_point: complex = 1j) -> list[np.ndarray]:
    """d(p, w p) for every reduced word w, grouped by word length."""
    h = _base_point_conjugator(base_point)
    h_inv = np.linalg.inv(h)
    mats = np.einsum("ij,njk,kl->nil", h_inv, letter_matrices(s.generators), h)
    shells: list[np.ndarray] = []
    for _, _, level in iter_word_levels(mats, max_length):
        # cosh d(i, g i) = (a^2 + b^2 + c^2 + d^2) / 2 for unimodular g
        half_norm = 0.5 * np.einsum("nij,nij->n", level, level)
        shells.append(np.arccosh(np.maximum(half_norm, 1.0)))
    return shells


def _log_shell_sums(shells: Sequence[np.ndarray], exponent: float) -> np.ndarray:
    out = np.empty(len(shells))
    for k, d in enumerate(shells):
        # shift by the smallest distance so large exponents do not underflow
        d0 = float(d.min())
        out[k] = -exponent * d0 + math.log(float(np.sum(np.exp(-exponent * (d - d0)))))
    return out


def growth_rate(shells: Sequence[np.ndarray], exponent: float, levels: int = SLOPE_LEVELS) -> float:
    """Least-squares slope of log S_N(exponent) against N over the last `levels` shells."""
    logs = _log_shell_sums(shells, exponent)
    k = min(levels, len(logs))
    n = np.arange(len(logs) - k + 1, len(logs) + 1, dtype=float)
    return float(np.polyfit(n, logs[-k:], 1)[0])


def poincare_partial_sums(
    s: SchottkySurface, exponent: float, word_cutoff: int, base_point: complex = 1j
) -> np.ndarray:
    """Partial sums of the Poincare series over words of length <= N, for N = 0..word_cutoff."""
    shells = orbit_distances(s, word_cutoff, base_point)
    increments = np.exp(_log_shell_sums(shells, exponent))
    return np.concatenate([[1.0], 1.0 + np.cumsum(increments)])


def _capped_cutoff(rank: int, word_cutoff: int) -> int:
    n = word_cutoff
    while n > 1 and 2 * rank * (2 * rank - 1) ** (n - 1) > MAX_LEVEL_WORDS:
        n -= 1
    return n


def _critical_exponent(shells: Sequence[np.ndarray], s_grid: Sequence[float], tol: float) -> tuple[float, list[float]]:
    grid = sorted(float(x) for x in s_grid)
    rates = [growth_rate(shells, x) for x in grid]
    # a rate within tol of zero counts as non-negative (flat shells at delta = 0)
    sign = [r >= -tol for r in rates]
    for k in range(len(grid) - 1):
        if sign[k] and not sign[k + 1]:
            lo, hi = grid[k], grid[k + 1]
            break
    else:
        raise BracketingError(
            "Grid does not bracket the critical exponent; growth rates "
            + ", ".join(f"{x:.4g}:{r:.4g}" for x, r in zip(grid, rates))
        )
    if abs(rates[k]) <= tol:
        return lo, rates

    def f(x: float) -> float:
        return growth_rate(shells, x)

    return float(bisect(f, lo, hi, xtol=tol)), rates


def delta_poincare(
    s: SchottkySurface,
    word_cutoff: int | None = None,
    s_grid: Sequence[float] | None = None,
    tol: float | None = None,
    check_base_point: bool = True,
) -> DimensionEstimate:
    """
    Critical exponent of the Poincare series from shell growth rates.

    The shells S_N(s) = sum_{|w| = N} e^{-s d(o, w o)} grow in N for s < delta
    and decay for s > delta; delta is the zero of the growth rate.
    """
    settings = get_settings()
    cutoff = word_cutoff if word_cutoff is not None else settings.poincare_word_cutoff
    if cutoff < 8:
        raise ValueError(f"word_cutoff must be at least 8, got {cutoff}")
    tol = tol if tol is not None else settings.delta_bisection_tol
    grid = list(s_grid) if s_grid is not None else list(np.linspace(0.0, 1.0, 21))

    used = _capped_cutoff(s.rank, cutoff)
    if used < cutoff:
        logger.warning(
            "poincare_cutoff_capped", extra={"surface": s.name, "requested": cutoff, "used": used}
        )

    with timed(logger, "delta_poincare", surface=s.name, word_cutoff=used) as ev:
        shells = orbit_distances(s, used)
        delta, rates = _critical_exponent(shells, grid, tol)
        delta_short, _ = _critical_exponent(shells[:-1], grid, tol)
        uncertainty = abs(delta - delta_short) + tol
        diagnostics: dict[str, Any] = {
            "word_cutoff": used,
            "grid": grid,
            "growth_rates": rates,
            "delta_one_level_less": delta_short,
            "shell_sizes": [int(x.size) for x in shells],
        }
        if check_base_point:
            other, _ = _critical_exponent(orbit_distances(s, used, SECOND_BASE_POINT), grid, tol)
            diagnostics["delta_second_base_point"] = other
            diagnostics["second_base_point"] = [SECOND_BASE_POINT.real, SECOND_BASE_POINT.imag]
        ev.update(delta=delta, uncertainty=uncertainty)

    return DimensionEstimate(
        delta=min(max(delta, 0.0), math.nextafter(1.0, 0.0)),
        method=DimensionMethod.POINCARE,
        uncertainty=uncertainty,
        diagnostics=diagnostics,
    )

