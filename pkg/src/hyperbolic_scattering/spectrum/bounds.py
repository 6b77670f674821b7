"""Length lower bounds used to prune and certify geodesic enumeration.

For a cyclically reduced word w = x_1 ... x_n with attracting fixed point p,
e^{-l(w)} is the product of the letter derivatives along the orbit of p, and
each factor is evaluated inside a disk the letter is allowed to act on. Grouping
the factors into the n cyclic windows of length m gives

    m * l(w) >= sum over windows u of cost(u),   cost(u) = -log max |u'|,

with the maximum taken over the admissible disks of u. The smallest m for which
every block cost is positive is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from hyperbolic_scattering.errors import SurfaceError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import (
    Word,
    is_cyclically_reduced,
    letters,
    reduced_words,
    word_length,
    word_matrix,
)
from hyperbolic_scattering.linalg import perron_root

MAX_BLOCK_LENGTH = 6
MAX_BLOCKS = 200_000
DEFECT_WORD_LENGTH = 4


@dataclass(frozen=True)
class PruningBound:
    block_length: int
    costs: dict[Word, float]
    min_cost: float

    @property
    def per_letter_rate(self) -> float:
        return self.min_cost / self.block_length

    def cyclic_cost(self, word: Word) -> float:
        """Certified lower bound on the length of a cyclically reduced word."""
        m, n = self.block_length, len(word)
        ext = word * (1 + (m + n - 1) // n)
        return sum(self.costs[ext[j : j + m]] for j in range(n)) / m


def _block_costs(s: SchottkySurface, m: int) -> dict[Word, float]:
    costs: dict[Word, float] = {}
    alphabet = letters(s.rank)
    for u in reduced_words(s.rank, m):
        g = word_matrix(u, s.generators)
        worst = math.inf
        for y in alphabet:
            if y == -u[-1]:
                continue
            d = s.disks.for_letter(y)
            # |u'(t)| = |ct + d|^-2 is monotone on intervals avoiding the pole
            for t in (d.left, d.right):
                worst = min(worst, 2.0 * math.log(abs(g.c * t + g.d)))
        costs[u] = worst
    return costs


def pruning_bound(s: SchottkySurface) -> PruningBound:
    for m in range(1, MAX_BLOCK_LENGTH + 1):
        if 2 * s.rank * (2 * s.rank - 1) ** (m - 1) > MAX_BLOCKS:
            break
        costs = _block_costs(s, m)
        low = min(costs.values())
        if low > 0.0:
            return PruningBound(block_length=m, costs=costs, min_cost=low)
    raise SurfaceError(f"Surface {s.name!r}: no block length up to {MAX_BLOCK_LENGTH} contracts every disk")


def overlap_defect(s: SchottkySurface, bound: PruningBound, max_length: int = DEFECT_WORD_LENGTH) -> float:
    """Largest excess of the pruning bound over true lengths on short words (zero when the bound is sound)."""
    worst = 0.0
    for n in range(1, max_length + 1):
        for w in reduced_words(s.rank, n):
            if not is_cyclically_reduced(w):
                continue
            worst = max(worst, bound.cyclic_cost(w) - word_length(w, s.generators))
    return worst


def _transition_matrix(bound: PruningBound, s_value: float) -> sp.csr_matrix:
    blocks = list(bound.costs)
    index = {b: k for k, b in enumerate(blocks)}
    m = bound.block_length
    alphabet = sorted({x for blk in blocks for x in blk})
    rows, cols, vals = [], [], []
    for b in blocks:
        for y in alphabet:
            if y == -b[-1]:
                continue
            nxt = (b[1:] + (y,)) if m > 1 else (y,)
            if nxt not in index:
                continue
            rows.append(index[b])
            cols.append(index[nxt])
            vals.append(math.exp(-s_value * bound.costs[nxt] / m))
    n = len(blocks)
    return sp.csr_matrix((np.asarray(vals), (rows, cols)), shape=(n, n))


def exponent_bound(bound: PruningBound) -> float:
    """
    Growth exponent of the block-cost transition matrix.

    Dominates the number of words whose certified bound is below L, hence the
    critical exponent of the group.
    """

    def log_radius(x: float) -> float:
        rho, _ = perron_root(_transition_matrix(bound, x))
        return math.log(rho) if rho > 0.0 else -math.inf

    if log_radius(0.0) <= 1e-12:
        return 0.0
    hi = 1.0
    while log_radius(hi) > 0.0:
        hi *= 2.0
        if hi > 1e3:
            raise SurfaceError("Transition exponent does not converge")
    return float(brentq(log_radius, 0.0, hi, xtol=1e-10))
