from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq

from hyperbolic_scattering.errors import ClassificationError, SurfaceError
from hyperbolic_scattering.geometry.moebius import MoebiusMap, compose, translation_length
from hyperbolic_scattering.geometry.words import (
    Word,
    cyclically_reduce,
    iter_word_levels,
    letter_key,
    letter_matrices,
    letters,
    word_matrix,
    word_to_str,
)

BOUNDARY_SAMPLES = 64
PAIRING_TOL = 1e-10
FUNNEL_TOL = 1e-10
PINGPONG_MAX_LENGTH = 6
INFINITY_TOL = 1e-12
GENERAL_POSITION_TRIES = 16


class Model(str, Enum):
    HALF_PLANE = "upper-half-plane"
    DISK = "disk"


@dataclass(frozen=True)
class Disk:
    """Euclidean disk centred on the real line; its trace on R is [center - radius, center + radius]."""

    center: float
    radius: float

    @property
    def left(self) -> float:
        return self.center - self.radius

    @property
    def right(self) -> float:
        return self.center + self.radius

    def contains(self, z: complex | np.ndarray) -> bool | np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def image(self, g: MoebiusMap) -> "Disk":
        """Image under g; the pole of g must lie outside the closed disk."""
        pole = math.inf if g.c == 0.0 else -g.d / g.c
        if self.left <= pole <= self.right:
            raise ValueError(f"Map has its pole {pole:.6g} inside disk {self}")
        u = g(complex(self.left)).real
        v = g(complex(self.right)).real
        lo, hi = min(u, v), max(u, v)
        return Disk(0.5 * (lo + hi), 0.5 * (hi - lo))


def _arc_to_interval(theta: float, half_width: float) -> Disk:
    # x = -cot(alpha / 2) sends the unit circle minus {1} onto R, increasing in alpha.
    lo = -1.0 / math.tan(0.5 * (theta - half_width))
    hi = -1.0 / math.tan(0.5 * (theta + half_width))
    return Disk(0.5 * (lo + hi), 0.5 * (hi - lo))


def _interval_to_arc(disk: Disk) -> tuple[float, float]:
    a0 = 2.0 * math.atan2(1.0, -disk.left)
    a1 = 2.0 * math.atan2(1.0, -disk.right)
    return 0.5 * (a0 + a1), 0.5 * (a1 - a0)


@dataclass(frozen=True)
class PairedDisks:
    """
    Pairing disks of a Schottky group, stored in half-plane coordinates.

    Generator g_i maps the exterior of source[i] onto the interior of target[i].
    """

    source: tuple[Disk, ...]
    target: tuple[Disk, ...]

    def for_letter(self, letter: int) -> Disk:
        """Disk containing the image of everything outside the disk of the inverse letter."""
        i = abs(letter) - 1
        return self.target[i] if letter > 0 else self.source[i]

    def all(self) -> list[Disk]:
        return list(self.source) + list(self.target)

    def letter_arrays(self, rank: int) -> tuple[np.ndarray, np.ndarray]:
        """Centers and radii indexed by letter key."""
        centers = np.empty(2 * rank)
        radii = np.empty(2 * rank)
        for x in letters(rank):
            d = self.for_letter(x)
            centers[letter_key(x)] = d.center
            radii[letter_key(x)] = d.radius
        return centers, radii

    def in_model(self, model: Model) -> list[dict[str, dict[str, float]]]:
        """Serializable disk description in the requested model (disk model: arc centre angle, half-width)."""
        out = []
        for s, t in zip(self.source, self.target):
            if model is Model.DISK:
                sa, sw = _interval_to_arc(s)
                ta, tw = _interval_to_arc(t)
                out.append({"source": {"center": sa, "radius": sw}, "target": {"center": ta, "radius": tw}})
            else:
                out.append(
                    {
                        "source": {"center": s.center, "radius": s.radius},
                        "target": {"center": t.center, "radius": t.radius},
                    }
                )
        return out

    @classmethod
    def from_model(
        cls, pairs: Sequence[tuple[Disk, Disk]], model: Model, rotation: float = 0.0
    ) -> "PairedDisks":
        """Disk-model pairs are (arc centre angle, half-width), turned by `rotation` before conversion."""
        if model is Model.DISK:
            pairs = [
                (_arc_to_interval(s.center + rotation, s.radius), _arc_to_interval(t.center + rotation, t.radius))
                for s, t in pairs
            ]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


@dataclass(frozen=True)
class SchottkySurface:
    name: str
    generators: tuple[MoebiusMap, ...]
    disks: PairedDisks
    funnel_lengths: tuple[float, ...]
    euler_characteristic: int
    boundary_words: tuple[Word, ...] = ()
    model: Model = Model.HALF_PLANE
    metadata: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def funnel_count(self) -> int:
        return len(self.boundary_words)

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic - self.funnel_count) // 2

    @property
    def volume(self) -> float:
        """Area of the convex core by Gauss-Bonnet."""
        return -2.0 * math.pi * self.euler_characteristic

    @property
    def base_point(self) -> complex:
        return 1j

    def letter_maps(self) -> dict[int, MoebiusMap]:
        out: dict[int, MoebiusMap] = {}
        for i, g in enumerate(self.generators, start=1):
            out[i] = g
            out[-i] = g.inverse()
        return out

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "model": self.model.value,
            "rank": self.rank,
            "euler_characteristic": self.euler_characteristic,
            "genus": self.genus,
            "volume": self.volume,
            "funnel_lengths": list(self.funnel_lengths),
            "boundary_words": [word_to_str(w) for w in self.boundary_words],
            "generators": [g.as_list() for g in self.generators],
            "disks": self.disks.in_model(self.model),
        }

    def fingerprint(self) -> str:
        payload = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    surface: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "surface": self.surface,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail} for c in self.checks
            ],
        }


def _disjointness_check(disks: PairedDisks) -> Check:
    all_disks = sorted(disks.all(), key=lambda d: d.left)
    gaps = [all_disks[k + 1].left - all_disks[k].right for k in range(len(all_disks) - 1)]
    min_gap = min(gaps) if gaps else math.inf
    passed = min_gap > 0.0
    return Check(
        "disks_disjoint",
        passed,
        float(min_gap),
        "" if passed else f"disks intersect (minimum gap {min_gap:.6g})",
    )


def _pairing_check(i: int, g: MoebiusMap, source: Disk, target: Disk) -> Check:
    theta = np.linspace(0.0, 2.0 * math.pi, BOUNDARY_SAMPLES, endpoint=False)
    pts = source.center + source.radius * np.exp(1j * theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        img = g.apply(pts)
    dev = np.abs(np.abs(img - target.center) - target.radius) / max(1.0, target.radius)
    boundary_err = float(np.max(dev)) if np.all(np.isfinite(dev)) else math.inf
    # The point at infinity lies outside the source disk; its image must land inside the target.
    inside = g.c != 0.0 and abs(g.a / g.c - target.center) < target.radius
    passed = boundary_err <= PAIRING_TOL and inside
    detail = ""
    if not passed:
        detail = f"generator {i} does not pair its disks (boundary error {boundary_err:.3g}, interior ok={inside})"
    return Check(f"pairing_g{i}", passed, boundary_err, detail)


def _pingpong_check(generators: Sequence[MoebiusMap], max_length: int) -> Check:
    min_excess = math.inf
    for _, _, mats in iter_word_levels(letter_matrices(generators), max_length):
        traces = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
        min_excess = min(min_excess, float(np.min(traces)) - 2.0)
    passed = min_excess > 0.0
    return Check(
        "pingpong_hyperbolic",
        passed,
        min_excess,
        "" if passed else f"a reduced word of length <= {max_length} is not hyperbolic",
    )


def validate_schottky(s: SchottkySurface) -> ValidationReport:
    """Run every structural check; never raises on a malformed surface."""
    checks: list[Check] = []
    try:
        det_err = max(abs(g.determinant - 1.0) for g in s.generators)
        checks.append(Check("unit_determinant", det_err <= 1e-12, det_err))
        min_trace = min(abs(g.trace) for g in s.generators)
        checks.append(Check("generators_hyperbolic", min_trace > 2.0, min_trace - 2.0))
        if len(s.disks.source) != s.rank or len(s.disks.target) != s.rank:
            checks.append(Check("disk_count", False, 0.0, "one disk pair per generator required"))
            return ValidationReport(s.name, tuple(checks))
        checks.append(_disjointness_check(s.disks))
        for i, (g, src, tgt) in enumerate(zip(s.generators, s.disks.source, s.disks.target), start=1):
            checks.append(_pairing_check(i, g, src, tgt))
        chi_ok = s.euler_characteristic == 1 - s.rank
        checks.append(
            Check("euler_characteristic", chi_ok, float(s.euler_characteristic - (1 - s.rank)))
        )
        checks.append(Check("core_volume", s.volume > 0.0 or s.rank == 1, s.volume))
        if s.boundary_words:
            if len(s.boundary_words) != len(s.funnel_lengths):
                checks.append(Check("funnel_lengths", False, 0.0, "one boundary word per funnel required"))
            else:
                worst = 0.0
                for w, ell in zip(s.boundary_words, s.funnel_lengths):
                    worst = max(worst, abs(translation_length(word_matrix(w, s.generators)) - ell) / max(1.0, ell))
                checks.append(
                    Check(
                        "funnel_lengths",
                        worst <= FUNNEL_TOL,
                        worst,
                        "" if worst <= FUNNEL_TOL else "funnel length differs from its boundary word",
                    )
                )
        checks.append(_pingpong_check(s.generators, PINGPONG_MAX_LENGTH))
    except (ValueError, ArithmeticError) as e:
        checks.append(Check("evaluation", False, math.nan, f"{type(e).__name__}: {e}"))
    return ValidationReport(s.name, tuple(checks))


def require_valid(s: SchottkySurface) -> ValidationReport:
    report = validate_schottky(s)
    if not report.ok:
        reasons = "; ".join(c.detail or c.name for c in report.failures())
        raise SurfaceError(f"Surface {s.name!r} failed validation: {reasons}", report=report)
    return report


# ---------------------------------------------------------------------------
# Constructions


def _reflection_matrix(disk: Disk) -> np.ndarray:
    # Inversion in the circle, written as a real matrix acting on conj(z).
    c, r = disk.center, disk.radius
    return np.array([[c, r * r - c * c], [1.0, -c]])


def _invert_disk(mirror: Disk, disk: Disk) -> Disk:
    u = mirror.center + mirror.radius**2 / (disk.left - mirror.center)
    v = mirror.center + mirror.radius**2 / (disk.right - mirror.center)
    lo, hi = min(u, v), max(u, v)
    return Disk(0.5 * (lo + hi), 0.5 * (hi - lo))


def _equal_width_arcs(funnel_lengths: Sequence[float]) -> tuple[float, list[float]]:
    """
    Half-width and angular separations of r+1 equal-width geodesic arcs in the disk model.

    Adjacent arcs k, k+1 sit at hyperbolic distance funnel_lengths[k] / 2.
    """
    q = [math.cosh(0.25 * ell) for ell in funnel_lengths]
    sep_max = math.asin(1.0 / max(q))

    def excess(phi: float) -> float:
        return sum(2.0 * math.asin(min(1.0, math.sin(phi) * qk)) for qk in q) - 2.0 * math.pi

    if excess(sep_max) < 0.0:
        raise SurfaceError(f"Funnel lengths {list(funnel_lengths)} cannot be realized by the equal-width recipe")
    if abs(excess(sep_max)) < 1e-15:
        phi = sep_max
    else:
        phi = brentq(excess, 1e-300, sep_max, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    seps = [2.0 * math.asin(min(1.0, math.sin(phi) * qk)) for qk in q]
    return phi, seps


def symmetric_surface(
    rank: int,
    funnel_lengths: float | Sequence[float],
    name: str | None = None,
    model: Model = Model.HALF_PLANE,
) -> SchottkySurface:
    """
    Genus-zero surface with rank+1 funnels from the reflection-pair recipe.

    rank+1 disjoint geodesics C_0..C_r are placed around the disk model with
    adjacent distances ell_k / 2; the generators are g_i = R_i R_0 (R_k the
    reflection in C_k). Funnel k is bounded by the axis of R_k R_{k+1}.
    """
    if rank < 1:
        raise SurfaceError("rank must be >= 1")
    if isinstance(funnel_lengths, (int, float)):
        lengths = [float(funnel_lengths)] * (rank + 1)
    else:
        lengths = [float(x) for x in funnel_lengths]
        if len(lengths) == 1:
            lengths = lengths * (rank + 1)
    if len(lengths) != rank + 1:
        raise SurfaceError(f"A rank-{rank} recipe has {rank + 1} funnels, got {len(lengths)} lengths")
    if any(not (x > 0.0) for x in lengths):
        raise SurfaceError("Funnel lengths must be positive")
    if rank == 1 and abs(lengths[0] - lengths[1]) > 1e-12 * max(lengths):
        raise SurfaceError("Both funnels of a hyperbolic cylinder have the same length")

    phi, seps = _equal_width_arcs(lengths)
    # Angle 0 (the point at infinity of the half-plane) sits in the middle of the last gap.
    thetas = [0.5 * seps[-1]]
    for k in range(rank):
        thetas.append(thetas[-1] + seps[k])
    circles = [_arc_to_interval(t, phi) for t in thetas]

    m0 = _reflection_matrix(circles[0])
    generators = []
    for i in range(1, rank + 1):
        m = _reflection_matrix(circles[i]) @ m0
        generators.append(MoebiusMap.from_matrix(m))
    sources = tuple(_invert_disk(circles[0], circles[i]) for i in range(1, rank + 1))
    targets = tuple(circles[1:])

    words: list[Word] = [(-1,)]
    for k in range(1, rank):
        words.append((k, -(k + 1)))
    words.append((rank,))
    funnels = tuple(translation_length(word_matrix(w, generators)) for w in words)

    return SchottkySurface(
        name=name or f"symmetric-r{rank}-" + "-".join(f"{x:g}" for x in lengths),
        generators=tuple(generators),
        disks=PairedDisks(sources, targets),
        funnel_lengths=funnels,
        euler_characteristic=1 - rank,
        boundary_words=tuple(words),
        model=model,
        metadata={"recipe": "symmetric", "requested_funnel_lengths": lengths, "arc_half_width": phi},
    )


def _fixes_infinity(g: MoebiusMap) -> bool:
    return abs(g.c) <= INFINITY_TOL * max(1.0, abs(g.a), abs(g.b), abs(g.d))


def _arc_covers_origin(arc: Disk) -> bool:
    return abs(math.remainder(arc.center, 2.0 * math.pi)) < arc.radius


def general_position_angle(generators: Sequence[MoebiusMap], arcs: Sequence[Disk] = ()) -> float:
    """
    Disk-model rotation that moves the point at infinity off every generator and arc.

    With arcs (centre angle, half-width) the middle of the widest free gap is
    turned onto angle 0. Without them, the first trial angle that leaves no
    generator fixing infinity is used. Returns 0.0 when nothing needs to move.
    """
    if not any(_fixes_infinity(g) for g in generators) and not any(_arc_covers_origin(a) for a in arcs):
        return 0.0
    if arcs:
        two_pi = 2.0 * math.pi
        spans = sorted(((a.center - a.radius) % two_pi, 2.0 * a.radius) for a in arcs)
        best_gap, best_mid = -math.inf, 0.0
        for k, (start, width) in enumerate(spans):
            following = spans[(k + 1) % len(spans)][0] + (two_pi if k == len(spans) - 1 else 0.0)
            gap = following - (start + width)
            if gap > best_gap:
                best_gap, best_mid = gap, start + width + 0.5 * gap
        return -best_mid
    for k in range(GENERAL_POSITION_TRIES):
        angle = 0.5 * math.pi + k * math.pi / GENERAL_POSITION_TRIES
        h = MoebiusMap.rotation(angle)
        if not any(_fixes_infinity(g.conjugate_by(h)) for g in generators):
            return angle
    raise SurfaceError("no rotation moves the generators off the point at infinity")


def isometric_disks(generators: Sequence[MoebiusMap]) -> PairedDisks:
    """Isometric circles: g maps the exterior of I(g) onto the interior of I(g^-1)."""
    sources, targets = [], []
    for g in generators:
        if _fixes_infinity(g):
            raise SurfaceError("A generator fixing infinity has no isometric circle; give its disks explicitly")
        r = 1.0 / abs(g.c)
        sources.append(Disk(-g.d / g.c, r))
        targets.append(Disk(g.a / g.c, r))
    return PairedDisks(tuple(sources), tuple(targets))


def boundary_words_from_disks(disks: PairedDisks) -> tuple[Word, ...]:
    """
    Funnel boundary words read off the cyclic order of the pairing disks.

    The free arcs between consecutive disks are chained by the side pairings:
    arriving at an endpoint of D(x), the map x^-1 carries it to the opposite
    endpoint of D(x^-1), and the walk continues across the arc adjacent to it.
    Each closed chain is one funnel; its letters multiply to the hyperbolic
    element whose axis bounds that funnel.
    """
    rank = len(disks.source)
    by_left = sorted(letters(rank), key=lambda x: disks.for_letter(x).left)
    position = {x: k for k, x in enumerate(by_left)}
    n = len(by_left)

    def gap_id(k: int, side: str) -> int:
        # arc k runs from the right end of disk k to the left end of disk k + 1
        return k % n if side == "R" else (k - 1) % n

    visited: set[int] = set()
    words: list[Word] = []
    for start in range(n):
        if start in visited:
            continue
        visited.add(start)
        k, side = (start + 1) % n, "L"
        chain: list[int] = []
        while True:
            x = by_left[k]
            chain.append(x)
            k, side = position[-x], ("R" if side == "L" else "L")
            gap = gap_id(k, side)
            if gap == start:
                break
            if gap in visited:
                raise SurfaceError("Side pairings do not close up into funnel cycles")
            visited.add(gap)
            k, side = ((k + 1) % n, "L") if side == "R" else ((k - 1) % n, "R")
        words.append(cyclically_reduce(chain))
    return tuple(words)


def surface_from_generators(
    generators: Sequence[MoebiusMap],
    disks: PairedDisks | None = None,
    boundary_words: Sequence[Word] = (),
    funnel_lengths: Sequence[float] | None = None,
    name: str = "explicit",
    model: Model = Model.HALF_PLANE,
    arcs: Sequence[tuple[Disk, Disk]] | None = None,
) -> SchottkySurface:
    """
    Surface from explicit generators and, optionally, their pairing disks.

    `arcs` gives the pairs in the disk model as (centre angle, half-width).
    When a generator fixes infinity, or an arc covers it, the whole group is
    conjugated by a rotation about i first; the rotation is kept in the metadata.
    """
    gens = tuple(generators)
    metadata: dict[str, Any] = {"recipe": "explicit"}
    if disks is None:
        flat = [d for pair in arcs for d in pair] if arcs is not None else []
        angle = general_position_angle(gens, flat)
        if angle != 0.0:
            h = MoebiusMap.rotation(angle)
            gens = tuple(g.conjugate_by(h) for g in gens)
            metadata["general_position_rotation"] = angle
        if arcs is not None:
            disks = PairedDisks.from_model(arcs, Model.DISK, rotation=angle)
    pairing = disks if disks is not None else isometric_disks(gens)
    words = tuple(tuple(w) for w in boundary_words)
    if not words:
        try:
            words = boundary_words_from_disks(pairing)
        except SurfaceError:
            # overlapping disks; validate_schottky reports it
            words = ()
    if funnel_lengths is None:
        try:
            lengths: tuple[float, ...] = tuple(translation_length(word_matrix(w, gens)) for w in words)
        except ClassificationError:
            lengths = ()
    else:
        lengths = tuple(float(x) for x in funnel_lengths)
    return SchottkySurface(
        name=name,
        generators=gens,
        disks=pairing,
        funnel_lengths=lengths,
        euler_characteristic=1 - len(gens),
        boundary_words=words,
        model=model,
        metadata=metadata,
    )


def conjugate_surface(s: SchottkySurface, h: MoebiusMap, name: str | None = None) -> SchottkySurface:
    """Surface of h Gamma h^-1; the pole of h must avoid every pairing disk."""
    gens = tuple(compose(compose(h, g), h.inverse()) for g in s.generators)
    disks = PairedDisks(
        tuple(d.image(h) for d in s.disks.source),
        tuple(d.image(h) for d in s.disks.target),
    )
    return SchottkySurface(
        name=name or f"{s.name}-conjugated",
        generators=gens,
        disks=disks,
        funnel_lengths=s.funnel_lengths,
        euler_characteristic=s.euler_characteristic,
        boundary_words=s.boundary_words,
        model=s.model,
        metadata={**s.metadata, "conjugated_by": h.as_list()},
    )
