from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import newton

from hyperbolic_scattering.contour import ComplexBox, central_derivative, locate_zeros
from hyperbolic_scattering.continuation.transfer import TransferDiscretization
from hyperbolic_scattering.errors import ResolutionError
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.telemetry import get_logger, timed

logger = get_logger("continuation")

REAL_SNAP = 1e-9
DEDUPE_TOL = 1e-7


@dataclass(frozen=True)
class Resonance:
    """A zero of the continued zeta function; s is the spectral parameter lambda."""

    s: complex
    multiplicity: int
    residual: float
    scale: float = 1.0
    displacement: float = 0.0
    method: str = "determinant_zero"

    @property
    def z(self) -> complex:
        """Frequency-plane coordinate rho = (lambda - 1/2)/i."""
        return (self.s - 0.5) / 1j

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale if self.scale > 0.0 else math.inf

    def conjugate(self) -> "Resonance":
        return Resonance(self.s.conjugate(), self.multiplicity, self.residual, self.scale, self.displacement, self.method)


def _cell_union_covers(boxes: Sequence[ComplexBox], region: ComplexBox) -> bool:
    xs = sorted({region.re_min, region.re_max, *(x for b in boxes for x in (b.re_min, b.re_max))})
    ys = sorted({region.im_min, region.im_max, *(y for b in boxes for y in (b.im_min, b.im_max))})
    xs = [x for x in xs if region.re_min <= x <= region.re_max]
    ys = [y for y in ys if region.im_min <= y <= region.im_max]
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            mid = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            if not any(b.contains(mid) for b in boxes):
                return False
    return True


@dataclass
class ResonanceSet:
    resonances: list[Resonance]
    boxes: list[ComplexBox]
    surface_name: str = ""
    nodes_per_disk: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.resonances)

    def __iter__(self) -> Iterator[Resonance]:
        return iter(self.resonances)

    @property
    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.resonances)

    def covers(self, region: ComplexBox) -> bool:
        """Whether the searched boxes (lambda-plane) contain the whole region."""
        return _cell_union_covers(self.boxes, region)

    def in_box(self, box: ComplexBox) -> list[Resonance]:
        return [r for r in self.resonances if box.contains(r.s)]

    def merged(self, other: "ResonanceSet") -> "ResonanceSet":
        out = list(self.resonances)
        for r in other.resonances:
            if not any(abs(r.s - q.s) <= DEDUPE_TOL * max(1.0, abs(q.s)) for q in out):
                out.append(r)
        out.sort(key=lambda r: (r.s.real, r.s.imag))
        return ResonanceSet(out, self.boxes + other.boxes, self.surface_name, self.nodes_per_disk, dict(self.diagnostics))

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "Re_lambda": r.s.real,
                "Im_lambda": r.s.imag,
                "Re_z": r.z.real,
                "Im_z": r.z.imag,
                "multiplicity": r.multiplicity,
                "residual": r.residual,
            }
            for r in self.resonances
        ]
        return pd.DataFrame(rows, columns=["Re_lambda", "Im_lambda", "Re_z", "Im_z", "multiplicity", "residual"])


def _repolish(disc: TransferDiscretization, s0: complex, multiplicity: int) -> complex:
    def fprime(s: complex) -> complex:
        return central_derivative(disc, s) / multiplicity

    return complex(newton(disc, s0, fprime=fprime, tol=1e-14 * max(1.0, abs(s0)), maxiter=80))


def _stability(disc: TransferDiscretization, res: Resonance, tol: float) -> Resonance:
    finer = disc.refined()
    try:
        moved = _repolish(finer, res.s, res.multiplicity)
    except (RuntimeError, ZeroDivisionError, OverflowError) as exc:
        raise ResolutionError(f"zero at {res.s} not found again on the doubled mesh: {exc}") from exc
    displacement = abs(moved - res.s)
    # a zero of order m moves like tol^(1/m) under a perturbation of size tol
    allowed = tol ** (1.0 / res.multiplicity) * max(1.0, abs(res.s))
    if displacement > allowed:
        raise ResolutionError(
            f"zero at {res.s} moves by {displacement:.3g} under mesh doubling (allowed {allowed:.3g})"
        )
    return Resonance(res.s, res.multiplicity, res.residual, res.scale, displacement, res.method)


def _complete_conjugates(found: list[Resonance], box: ComplexBox) -> list[Resonance]:
    out: list[Resonance] = []
    for r in found:
        if abs(r.s.imag) <= REAL_SNAP * max(1.0, abs(r.s)):
            r = Resonance(complex(r.s.real, 0.0), r.multiplicity, r.residual, r.scale, r.displacement, r.method)
        out.append(r)
    if box.is_conjugation_symmetric:
        for r in list(out):
            if r.s.imag == 0.0:
                continue
            mirror = r.s.conjugate()
            if not any(abs(q.s - mirror) <= DEDUPE_TOL * max(1.0, abs(mirror)) for q in out):
                logger.warning("conjugate_completed", extra={"s": [r.s.real, r.s.imag]})
                out.append(r.conjugate())
    out.sort(key=lambda r: (r.s.real, r.s.imag))
    return out


def find_resonances(
    box: ComplexBox,
    disc: TransferDiscretization,
    verify: bool = True,
    stability_tol: float = 1e-8,
    max_subdivisions: int | None = None,
) -> ResonanceSet:
    """
    Zeros of the continued zeta function in a lambda-plane box.

    Counts zeros by the argument principle on the box boundary, subdivides,
    polishes each zero by Newton's method and, with verify, checks that every
    zero stays put when the collocation mesh is doubled.
    """
    depth = max_subdivisions if max_subdivisions is not None else get_settings().argument_max_depth
    with timed(logger, "resonances_located", surface=disc.surface_name, box=box.as_list()) as ev:
        search = locate_zeros(disc, box, max_subdivisions=depth)
        found = [Resonance(z.s, z.multiplicity, z.residual, z.scale) for z in search.zeros]
        if verify:
            found = [_stability(disc, r, stability_tol) for r in found]
        found = _complete_conjugates(found, box)
        ev.update(
            winding=search.winding,
            count=len(found),
            cells=search.cells_examined,
            nodes_per_disk=disc.nodes_per_disk,
        )
    return ResonanceSet(
        resonances=found,
        boxes=[search.box],
        surface_name=disc.surface_name,
        nodes_per_disk=disc.nodes_per_disk,
        diagnostics={"winding": search.winding, "cells_examined": search.cells_examined},
    )


def strip_boxes(box: ComplexBox, strips: int) -> list[ComplexBox]:
    """Horizontal strips of a box, for independent searches."""
    edges = np.linspace(box.im_min, box.im_max, strips + 1)
    # interior edges are nudged off the real axis and off symmetric lattice lines
    edges[1:-1] += 0.0137 * (box.im_max - box.im_min) / strips
    return [ComplexBox(box.re_min, box.re_max, float(lo), float(hi)) for lo, hi in zip(edges, edges[1:])]


def find_resonances_parallel(
    box: ComplexBox,
    disc: TransferDiscretization,
    strips: int,
    workers: int | None = None,
    verify: bool = True,
) -> ResonanceSet:
    """Search horizontal strips of the box independently and merge the zero lists."""
    n_jobs = workers if workers is not None else get_settings().workers
    parts = Parallel(n_jobs=n_jobs)(delayed(find_resonances)(b, disc, verify) for b in strip_boxes(box, strips))
    merged = parts[0]
    for part in parts[1:]:
        merged = merged.merged(part)
    merged.resonances = _complete_conjugates(merged.resonances, box)
    return merged
