from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from hyperbolic_scattering.errors import ResourceBudgetError
from hyperbolic_scattering.geometry.moebius import MoebiusMap, length_from_trace
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import (
    Word,
    canonical,
    is_cyclically_reduced,
    is_primitive,
    letter_key,
    letters,
    reduced_words,
    word_to_str,
    word_trace,
)
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.spectrum.bounds import PruningBound, exponent_bound, overlap_defect, pruning_bound
from hyperbolic_scattering.telemetry import get_logger, timed

logger = get_logger("spectrum")


class Orientation(str, Enum):
    ORIENTED = "oriented"
    UNORIENTED = "unoriented"


@dataclass(frozen=True)
class PrimitiveGeodesic:
    word: Word
    length: float
    trace: float

    @property
    def word_length(self) -> int:
        return len(self.word)

    @property
    def label(self) -> str:
        return word_to_str(self.word)


@dataclass(frozen=True)
class CompletenessCertificate:
    """Word-length bound W(L) and the constants it was derived from."""

    word_length_bound: int
    block_length: int
    per_letter_rate: float
    overlap_defect: float
    exponent_bound: float
    predicted_count: float


@dataclass(frozen=True)
class LengthSpectrum:
    cutoff: float
    entries: tuple[PrimitiveGeodesic, ...]
    orientation: Orientation
    rank: int
    certificate: CompletenessCertificate | None = None
    surface_name: str = ""
    surface_fingerprint: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([g.length for g in self.entries], dtype=float)

    @property
    def shortest(self) -> float:
        return float(self.lengths[0]) if self.entries else math.inf

    def counting_function(self, radius: float | np.ndarray) -> int | np.ndarray:
        """N(R) = #{l(gamma) <= R}."""
        out = np.searchsorted(self.lengths, radius, side="right")
        return int(out) if np.ndim(out) == 0 else out

    def truncate(self, cutoff: float) -> "LengthSpectrum":
        if cutoff > self.cutoff:
            raise ValueError(f"Cannot extend a spectrum cut at {self.cutoff} to {cutoff}")
        keep = tuple(g for g in self.entries if g.length <= cutoff)
        return LengthSpectrum(
            cutoff=cutoff,
            entries=keep,
            orientation=self.orientation,
            rank=self.rank,
            certificate=self.certificate,
            surface_name=self.surface_name,
            surface_fingerprint=self.surface_fingerprint,
        )

    def words(self) -> set[Word]:
        return {g.word for g in self.entries}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "canonical_word": [g.label for g in self.entries],
                "word_length": [g.word_length for g in self.entries],
                "trace": [g.trace for g in self.entries],
                "length": [g.length for g in self.entries],
            }
        )


def _sort_key(g: PrimitiveGeodesic) -> tuple[float, tuple[int, ...]]:
    return (g.length, tuple(letter_key(x) for x in g.word))


def _explore_subtree(
    first: int,
    generators: Sequence[MoebiusMap],
    bound: PruningBound,
    cutoff: float,
    oriented: bool,
    max_depth: int,
    extended_after: int,
) -> list[tuple[Word, float, float]]:
    """Canonical words starting with `first` whose length is at most `cutoff`."""
    rank = len(generators)
    mats: dict[int, tuple[float, float, float, float]] = {}
    for i, g in enumerate(generators, start=1):
        mats[i] = (g.a, g.b, g.c, g.d)
        mats[-i] = (g.d, -g.b, -g.c, g.a)
    # a canonical rotation starts with its smallest letter
    alphabet = [y for y in letters(rank) if letter_key(y) >= letter_key(first)]
    m = bound.block_length
    costs = bound.costs
    slack = 1e-9 * max(1.0, cutoff)

    found: list[tuple[Word, float, float]] = []
    stack: list[tuple[Word, tuple[float, float, float, float], float]] = [((first,), mats[first], 0.0)]
    while stack:
        word, (a, b, c, d), inside = stack.pop()
        n = len(word)
        if (n == 1 or word[0] != -word[-1]) and canonical(word, oriented) == word and is_primitive(word):
            tr = abs(a + d) if n <= extended_after else word_trace(word, generators, extended_after)
            if tr > 2.0:
                ell = length_from_trace(tr)
                if ell <= cutoff:
                    found.append((word, tr, ell))
        if n >= max_depth:
            continue
        for y in alphabet:
            if y == -word[-1]:
                continue
            child = word + (y,)
            k = n + 1
            child_inside = inside + (costs[child[-m:]] if k >= m else 0.0)
            known = max(0, k - m + 1)
            if (child_inside + (k - known) * bound.min_cost) / m > cutoff + slack:
                continue
            ya, yb, yc, yd = mats[y]
            stack.append(
                (child, (a * ya + b * yc, a * yb + b * yd, c * ya + d * yc, c * yb + d * yd), child_inside)
            )
    return found


def completeness_certificate(s: SchottkySurface, cutoff: float) -> tuple[PruningBound, CompletenessCertificate]:
    bound = pruning_bound(s)
    defect = overlap_defect(s, bound)
    rate = bound.per_letter_rate
    w_bound = int(math.floor((cutoff + 2.0 * defect) / rate))
    delta_hat = exponent_bound(bound)
    cert = CompletenessCertificate(
        word_length_bound=max(1, w_bound),
        block_length=bound.block_length,
        per_letter_rate=rate,
        overlap_defect=defect,
        exponent_bound=delta_hat,
        predicted_count=math.exp(min(delta_hat * cutoff, 700.0)),
    )
    return bound, cert


def enumerate_geodesics(
    s: SchottkySurface,
    cutoff: float,
    orientation: Orientation = Orientation.UNORIENTED,
    max_geodesics: int | None = None,
    workers: int | None = None,
    extended_after: int | None = None,
) -> LengthSpectrum:
    """
    Every primitive closed geodesic of length at most `cutoff`, once per class.

    The word tree is split by first letter and explored in parallel; the merge
    sorts by length with ties broken by canonical word.
    """
    if not cutoff > 0.0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    settings = get_settings()
    budget = max_geodesics if max_geodesics is not None else settings.max_geodesics
    n_jobs = workers if workers is not None else settings.workers
    ext = extended_after if extended_after is not None else settings.extended_precision_letters
    orientation = Orientation(orientation)

    bound, cert = completeness_certificate(s, cutoff)
    if cert.exponent_bound * cutoff > math.log(budget):
        raise ResourceBudgetError(
            f"Predicted geodesic count e^({cert.exponent_bound:.4f}*{cutoff:g}) exceeds the budget of {budget}"
        )

    with timed(
        logger,
        "enumeration_finished",
        surface=s.name,
        cutoff=cutoff,
        orientation=orientation.value,
        word_length_bound=cert.word_length_bound,
    ) as ev:
        jobs = Parallel(n_jobs=min(n_jobs, 2 * s.rank))(
            delayed(_explore_subtree)(
                x,
                s.generators,
                bound,
                cutoff,
                orientation is Orientation.ORIENTED,
                cert.word_length_bound,
                ext,
            )
            for x in letters(s.rank)
        )
        entries = sorted(
            (PrimitiveGeodesic(word=w, length=ell, trace=tr) for part in jobs for (w, tr, ell) in part),
            key=_sort_key,
        )
        ev["count"] = len(entries)

    return LengthSpectrum(
        cutoff=float(cutoff),
        entries=tuple(entries),
        orientation=orientation,
        rank=s.rank,
        certificate=cert,
        surface_name=s.name,
        surface_fingerprint=s.fingerprint(),
    )


def naive_enumeration(
    s: SchottkySurface,
    max_word_length: int,
    orientation: Orientation = Orientation.UNORIENTED,
) -> LengthSpectrum:
    """Exhaustive oracle: all primitive classes of word length up to `max_word_length`."""
    oriented = Orientation(orientation) is Orientation.ORIENTED
    seen: dict[Word, PrimitiveGeodesic] = {}
    for n in range(1, max_word_length + 1):
        for w in reduced_words(s.rank, n):
            if not is_cyclically_reduced(w):
                continue
            c = canonical(w, oriented)
            if c in seen or not is_primitive(c):
                continue
            tr = word_trace(c, s.generators)
            seen[c] = PrimitiveGeodesic(word=c, length=length_from_trace(tr), trace=tr)
    entries = sorted(seen.values(), key=_sort_key)
    return LengthSpectrum(
        cutoff=math.inf,
        entries=tuple(entries),
        orientation=Orientation(orientation),
        rank=s.rank,
        surface_name=s.name,
        surface_fingerprint=s.fingerprint(),
    )
