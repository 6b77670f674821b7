from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.optimize import bisect

from hyperbolic_scattering.errors import MethodNotApplicableError, ResourceBudgetError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import letter_from_key, letter_key, letters
from hyperbolic_scattering.dimension.poincare import DimensionEstimate, DimensionMethod
from hyperbolic_scattering.linalg import perron_root
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.telemetry import get_logger, timed

logger = get_logger("dimension")

MIN_DEPTH = 3


@dataclass(frozen=True)
class DiskCover:
    """
    Image disks D_w for all reduced words of one length.

    Words are encoded base 2r in letter-key digits, most significant digit first;
    arrays are sorted by code.
    """

    depth: int
    codes: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def radii(self) -> np.ndarray:
        return 0.5 * (self.right - self.left)

    def __len__(self) -> int:
        return int(self.codes.size)


def _first_cover(s: SchottkySurface) -> DiskCover:
    n = 2 * s.rank
    left = np.empty(n)
    right = np.empty(n)
    for key in range(n):
        d = s.disks.for_letter(letter_from_key(key))
        left[key], right[key] = d.left, d.right
    return DiskCover(1, np.arange(n, dtype=np.int64), left, right)


def refine(s: SchottkySurface, cover: DiskCover) -> DiskCover:
    """Cover by the disks x(D_v) for every letter x that can precede the word v."""
    n = 2 * s.rank
    base = n ** (cover.depth - 1)
    first_keys = cover.codes // base
    codes, lefts, rights = [], [], []
    for x in letters(s.rank):
        key = letter_key(x)
        keep = first_keys != (key ^ 1)
        g = s.generators[abs(x) - 1]
        if x < 0:
            g = g.inverse()
        u = (g.a * cover.left[keep] + g.b) / (g.c * cover.left[keep] + g.d)
        v = (g.a * cover.right[keep] + g.b) / (g.c * cover.right[keep] + g.d)
        codes.append(key * base * n + cover.codes[keep])
        lefts.append(np.minimum(u, v))
        rights.append(np.maximum(u, v))
    all_codes = np.concatenate(codes)
    order = np.argsort(all_codes, kind="stable")
    return DiskCover(
        cover.depth + 1,
        all_codes[order],
        np.concatenate(lefts)[order],
        np.concatenate(rights)[order],
    )


def _transition_structure(cover: DiskCover, parent: DiskCover, n: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """
    Adjacency w -> sigma(w) y and the contraction ratios r(D_w) / r(D_sigma(w)).

    sigma drops the first letter; y ranges over letters reducible after w.
    """
    k = cover.depth
    tail = cover.codes % (n ** (k - 1))
    ratio = cover.radii / parent.radii[np.searchsorted(parent.codes, tail)]

    last = cover.codes % n
    rows, cols = [], []
    for y in range(n):
        ok = last != (y ^ 1)
        succ = tail[ok] * n + y
        rows.append(np.nonzero(ok)[0])
        cols.append(np.searchsorted(cover.codes, succ))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    adjacency = sp.csr_matrix((np.ones(r.size), (r, c)), shape=(len(cover), len(cover)))
    return adjacency, ratio


def _solve_depth(adjacency: sp.csr_matrix, ratio: np.ndarray, tol: float) -> tuple[float, int]:
    log_ratio = np.log(ratio)
    state: dict[str, Any] = {"vec": None, "calls": 0}

    def log_rho(delta: float) -> float:
        weighted = sp.diags(np.exp(delta * log_ratio)) @ adjacency
        rho, vec = perron_root(weighted, tol=1e-12, start=state["vec"])
        state["vec"] = vec
        state["calls"] += 1
        return math.log(rho)

    lo, hi = 0.0, 1.0
    if log_rho(lo) <= 0.0:
        return 0.0, state["calls"]
    if log_rho(hi) >= 0.0:
        return 1.0, state["calls"]
    return float(bisect(log_rho, lo, hi, xtol=tol)), state["calls"]


def _aitken(seq: list[float]) -> float:
    if len(seq) < 3:
        return seq[-1]
    a, b, c = seq[-3:]
    denom = (c - b) - (b - a)
    if abs(denom) < 1e-15 or abs(c - b) >= abs(b - a):
        return c
    return c - (c - b) ** 2 / denom


def delta_refinement(
    s: SchottkySurface,
    refinement_depth: int | None = None,
    tol: float | None = None,
    max_cells: int | None = None,
) -> DimensionEstimate:
    """
    Hausdorff dimension from the disk-refinement eigenvalue problem.

    At depth k the transition matrix has entries (r(D_w)/r(D_sigma(w)))^delta;
    delta is bisected so its Perron root is 1, then extrapolated over the
    last three depths.
    """
    if s.rank < 2:
        raise MethodNotApplicableError("disk refinement needs rank >= 2; use delta_poincare for a cylinder")
    settings = get_settings()
    depth = refinement_depth if refinement_depth is not None else settings.refinement_depth
    tol = tol if tol is not None else settings.delta_bisection_tol
    budget = max_cells if max_cells is not None else settings.max_refinement_cells
    n = 2 * s.rank

    used = depth
    while used > MIN_DEPTH and n * (n - 1) ** (used - 1) > budget:
        used -= 1
    if n * (n - 1) ** (used - 1) > budget:
        raise ResourceBudgetError(f"depth-{MIN_DEPTH} cover of rank {s.rank} already exceeds {budget} cells")
    if used < depth:
        logger.warning("refinement_depth_capped", extra={"surface": s.name, "requested": depth, "used": used})

    with timed(logger, "delta_refinement", surface=s.name, depth=used) as ev:
        covers = [_first_cover(s)]
        for _ in range(used - 1):
            covers.append(refine(s, covers[-1]))
        per_depth: list[float] = []
        calls: list[int] = []
        for k in range(max(2, used - 2), used + 1):
            adjacency, ratio = _transition_structure(covers[k - 1], covers[k - 2], n)
            d_k, c_k = _solve_depth(adjacency, ratio, tol)
            per_depth.append(d_k)
            calls.append(c_k)
        delta = _aitken(per_depth)
        last_step = abs(per_depth[-1] - per_depth[-2]) if len(per_depth) > 1 else 0.0
        uncertainty = last_step + tol
        ev.update(delta=delta, uncertainty=uncertainty, cells=len(covers[-1]))

    return DimensionEstimate(
        delta=min(max(delta, 0.0), math.nextafter(1.0, 0.0)),
        method=DimensionMethod.REFINEMENT,
        uncertainty=uncertainty,
        diagnostics={
            "depth": used,
            "depths": list(range(max(2, used - 2), used + 1)),
            "per_depth": per_depth,
            "eigen_solves": calls,
            "cells": len(covers[-1]),
            "min_radius": float(covers[-1].radii.min()),
        },
    )
