"""
Convex core of a Schottky surface, Liouville sampling over it and closed-form
exit times of the geodesic flow.

For rank >= 2 the core is lifted to the fundamental domain F (outside every
pairing disk) as F minus the funnel half-planes: one per gap of the limit set
that contains a free arc of the real line. For rank 1 the core is a closed
geodesic and the region N is the collar of fixed width around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from hyperbolic_scattering.errors import GeometryError
from hyperbolic_scattering.geometry.moebius import MoebiusMap, translation_length
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import letter_from_key, letters
from hyperbolic_scattering.telemetry import get_logger, log_event

logger = get_logger("dynamics")

EXTREME_TOL = 1e-15
EXTREME_MAX_ITER = 10_000
CELL_LOG_HEIGHT = 0.1
CELL_WIDTH = 0.1
MAX_CELL_DEPTH = 40
CHUNK = 4096
MIN_EFFICIENCY = 0.01
MAX_SEGMENTS = 100_000


@dataclass(frozen=True)
class Frames:
    """Arrays of SL(2, R) frames (a, b, c, d)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __len__(self) -> int:
        return self.a.size

    @classmethod
    def from_points(cls, x: np.ndarray, y: np.ndarray, angle: np.ndarray) -> "Frames":
        """Frames at x + iy whose direction makes angle `angle` with the upward vertical."""
        sy = np.sqrt(y)
        phi = -0.5 * angle
        cphi, sphi = np.cos(phi), np.sin(phi)
        return cls(sy * cphi + x / sy * sphi, -sy * sphi + x / sy * cphi, sphi / sy, cphi / sy)

    @classmethod
    def concatenate(cls, parts: list["Frames"]) -> "Frames":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in "abcd"))

    def select(self, mask: np.ndarray) -> "Frames":
        return Frames(self.a[mask], self.b[mask], self.c[mask], self.d[mask])

    def direction_angle(self) -> np.ndarray:
        """Angle of each direction against the upward vertical (inverse of from_points)."""
        return -2.0 * np.arctan2(self.c, self.d)

    def position(self) -> np.ndarray:
        return (self.a * 1j + self.b) / (self.c * 1j + self.d)

    def frame(self, k: int) -> MoebiusMap:
        return MoebiusMap(float(self.a[k]), float(self.b[k]), float(self.c[k]), float(self.d[k]))


def circle_hit_time(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray, center: float, radius: float
) -> np.ndarray:
    """Time t >= 0 at which frame(e^t i) meets |w - center| = radius (clamped at 0)."""
    num = radius**2 * d**2 - (b - center * d) ** 2
    den = (a - center * c) ** 2 - radius**2 * c**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    return np.where(ratio > 1.0, 0.5 * np.log(np.where(ratio > 1.0, ratio, 1.0)), 0.0)


def limit_set_extremes(surface: SchottkySurface) -> dict[int, tuple[float, float]]:
    """
    Smallest and largest limit point inside each pairing disk, by fixed-point iteration.

    The generator x carries the arc of the real line running from the right end of
    D(x^-1) through infinity to its left end increasingly onto D(x), so the extremes
    in D(x) are the images of the first and last extremes met along that arc.
    """
    maps = surface.letter_maps()
    disks = {x: surface.disks.for_letter(x) for x in maps}
    ext = {x: (disks[x].left, disks[x].right) for x in maps}
    for _ in range(EXTREME_MAX_ITER):
        new = {}
        for x, g in maps.items():
            start = disks[-x].right
            lows = [(p <= start, p) for p in (ext[y][0] for y in maps if y != -x)]
            highs = [(p <= start, p) for p in (ext[y][1] for y in maps if y != -x)]
            first, last = min(lows)[1], max(highs)[1]
            new[x] = (g(complex(first)).real, g(complex(last)).real)
        change = max(abs(new[x][i] - ext[x][i]) for x in maps for i in (0, 1))
        ext = new
        if change <= EXTREME_TOL * max(1.0, max(abs(d.center) + d.radius for d in disks.values())):
            return ext
    raise GeometryError(f"limit-set extremes did not settle after {EXTREME_MAX_ITER} iterations")


@dataclass(frozen=True)
class Circle:
    center: float
    radius: float


@dataclass(frozen=True)
class Cell:
    """Rectangle [x0, x1] x [y0, y1] with its hyperbolic area (x1 - x0)(1/y0 - 1/y1)."""

    x0: float
    x1: float
    y0: float
    y1: float
    interior: bool

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (1.0 / self.y0 - 1.0 / self.y1)


def _intersection_height(p: Circle, q: Circle) -> float | None:
    if p.center == q.center:
        return None
    x = (p.radius**2 - q.radius**2 + q.center**2 - p.center**2) / (2.0 * (q.center - p.center))
    y2 = p.radius**2 - (x - p.center) ** 2
    return math.sqrt(y2) if y2 > 0.0 else None


@dataclass(frozen=True)
class ConvexCore:
    """
    Convex core lifted to the fundamental domain.

    Membership: inside `hull`, outside every circle in `excluded` (pairing disks and
    the funnel half-planes over finite gaps of the limit set).
    """

    surface: SchottkySurface
    hull: Circle
    gaps: tuple[Circle, ...]
    pairing: tuple[Circle, ...]
    keys: tuple[int, ...]
    cells: tuple[Cell, ...] = field(repr=False)

    @property
    def excluded(self) -> tuple[Circle, ...]:
        return self.pairing + self.gaps

    @property
    def area(self) -> float:
        return self.surface.volume

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = np.abs(z - self.hull.center) <= self.hull.radius
        for circ in self.excluded:
            ok &= np.abs(z - circ.center) >= circ.radius
        return ok & (z.imag > 0.0)

    def sample(self, n: int, rng: np.random.Generator) -> tuple[Frames, int, int]:
        """n Liouville-distributed frames over the core, with the accepted and drawn counts."""
        bounds = np.array([(c.x0, c.x1, 1.0 / c.y1, 1.0 / c.y0) for c in self.cells])
        weights = np.array([c.area for c in self.cells])
        cdf = np.cumsum(weights) / weights.sum()
        xs: list[np.ndarray] = []
        ys: list[np.ndarray] = []
        got, drawn = 0, 0
        while got < n and drawn < n / MIN_EFFICIENCY:
            m = max(2 * (n - got), 64)
            idx = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), len(self.cells) - 1)
            x0, x1, u0, u1 = bounds[idx].T
            # uniform in (x, 1/y) is uniform in hyperbolic area
            x = x0 + (x1 - x0) * rng.random(m)
            y = 1.0 / (u0 + (u1 - u0) * rng.random(m))
            keep = self.contains(x + 1j * y)
            drawn += m
            xs.append(x[keep])
            ys.append(y[keep])
            got += int(np.count_nonzero(keep))
        x = np.concatenate(xs)[:n]
        y = np.concatenate(ys)[:n]
        angle = 2.0 * math.pi * rng.random(n)
        return Frames.from_points(x, y, angle), got, drawn

    def exit_times(self, frames: Frames, horizon: float) -> np.ndarray:
        """
        First time each trajectory leaves the core; inf if it stays past `horizon`.

        Between disk crossings a segment heads to its forward endpoint: an endpoint
        in a funnel gap means the segment crosses that gap's geodesic and never
        returns; an endpoint in a pairing disk means the disk is entered and the
        frame is carried back into F by the inverse generator.
        """
        a, b, c, d = (np.array(getattr(frames, f), dtype=float) for f in "abcd")
        n = a.size
        elapsed = np.zeros(n)
        out = np.full(n, np.inf)
        active = np.ones(n, dtype=bool)
        maps = self.surface.letter_maps()
        inverse = [maps[-x] for x in self.keys]

        for _ in range(MAX_SEGMENTS):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            aa, bb, cc, dd = a[idx], b[idx], c[idx], d[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                xp = np.where(cc != 0.0, aa / np.where(cc != 0.0, cc, 1.0), np.inf)
            settled = np.zeros(idx.size, dtype=bool)

            h = self.hull
            escaping = ~(np.abs(xp - h.center) < h.radius)
            if escaping.any():
                t = circle_hit_time(aa, bb, cc, dd, h.center, h.radius)
                out[idx[escaping]] = elapsed[idx[escaping]] + t[escaping]
                settled |= escaping
            for g in self.gaps:
                hit = ~settled & (np.abs(xp - g.center) < g.radius)
                if hit.any():
                    t = circle_hit_time(aa[hit], bb[hit], cc[hit], dd[hit], g.center, g.radius)
                    out[idx[hit]] = elapsed[idx[hit]] + t
                    settled |= hit
            for k, circ in enumerate(self.pairing):
                enter = ~settled & (np.abs(xp - circ.center) < circ.radius)
                if not enter.any():
                    continue
                j = idx[enter]
                t = circle_hit_time(aa[enter], bb[enter], cc[enter], dd[enter], circ.center, circ.radius)
                e, f = np.exp(0.5 * t), np.exp(-0.5 * t)
                p, q, r, s = a[j] * e, b[j] * f, c[j] * e, d[j] * f
                gi = inverse[k]
                na, nb = gi.a * p + gi.b * r, gi.a * q + gi.b * s
                nc, nd = gi.c * p + gi.d * r, gi.c * q + gi.d * s
                det = np.sqrt(na * nd - nb * nc)
                a[j], b[j], c[j], d[j] = na / det, nb / det, nc / det, nd / det
                elapsed[j] += t
                settled |= enter
            # endpoint exactly on a circle: count as leaving where it stands
            stuck = ~settled
            out[idx[stuck]] = elapsed[idx[stuck]]
            active[idx[stuck]] = False
            active[idx[settled]] &= ~np.isfinite(out[idx[settled]])
            active &= elapsed <= horizon
        return out


@dataclass(frozen=True)
class CollarCore:
    """
    Collar of half-width `width` around the closed geodesic of a rank-1 surface.

    Frames are kept in axis coordinates, where the geodesic is the imaginary axis
    and the distance to it satisfies sinh(dist) = |x| / y.
    """

    surface: SchottkySurface
    width: float
    length: float
    to_axis: MoebiusMap

    @property
    def area(self) -> float:
        return 2.0 * self.length * math.sinh(self.width)

    def contains(self, z: np.ndarray) -> np.ndarray:
        w = np.asarray(z, dtype=complex)
        g = self.to_axis
        w = (g.a * w + g.b) / (g.c * w + g.d)
        return np.abs(w.real) <= math.sinh(self.width) * w.imag

    def sample(self, n: int, rng: np.random.Generator) -> tuple[Frames, int, int]:
        # Fermi coordinates: foot e^s i on the axis, signed distance r; dA = cosh r dr ds
        s = self.length * rng.random(n)
        r = np.arcsinh(math.sinh(self.width) * (2.0 * rng.random(n) - 1.0))
        x = np.exp(s) * np.tanh(r)
        y = np.exp(s) / np.cosh(r)
        angle = 2.0 * math.pi * rng.random(n)
        return Frames.from_points(x, y, angle), n, n

    def exit_times(self, frames: Frames, horizon: float) -> np.ndarray:
        """Roots of ac X + bd / X = +-sinh(width) with X = e^t > 1."""
        a, b, c, d = frames.a, frames.b, frames.c, frames.d
        p, q = a * c, b * d
        big_s = math.sinh(self.width)
        best = np.full(a.size, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            for sign in (1.0, -1.0):
                disc = big_s**2 - 4.0 * p * q
                root = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
                for branch in (1.0, -1.0):
                    xr = (sign * big_s + branch * root) / (2.0 * p)
                    ok = np.isfinite(xr) & (xr >= 1.0)
                    best = np.where(ok & (xr < best), xr, best)
        out = np.log(best)
        out[out > horizon] = np.inf
        return out


def _build_cells(hull: Circle, excluded: tuple[Circle, ...], y_lo: float) -> tuple[Cell, ...]:
    centers = np.array([c.center for c in excluded])
    radii = np.array([c.radius for c in excluded])

    def classify(x0: float, x1: float, y0: float, y1: float) -> str:
        near_x = np.maximum.reduce([x0 - centers, np.zeros_like(centers), centers - x1])
        far_x = np.maximum(np.abs(x0 - centers), np.abs(x1 - centers))
        if math.hypot(max(x0 - hull.center, 0.0, hull.center - x1), y0) > hull.radius:
            return "out"
        if np.any(np.hypot(far_x, y1) < radii):
            return "out"
        hull_far = max(abs(x0 - hull.center), abs(x1 - hull.center))
        if math.hypot(hull_far, y1) <= hull.radius and np.all(np.hypot(near_x, y0) >= radii):
            return "in"
        return "partial"

    cells: list[Cell] = []
    y_hi = hull.radius
    n_rows = max(1, math.ceil(math.log(y_hi / y_lo) / CELL_LOG_HEIGHT))
    heights = np.geomspace(y_lo, y_hi, n_rows + 1)
    x_lo, x_hi = hull.center - hull.radius, hull.center + hull.radius
    for y0, y1 in zip(heights[:-1], heights[1:]):
        stack = [(x_lo, x_hi, 0)]
        while stack:
            x0, x1, depth = stack.pop()
            kind = classify(x0, x1, y0, y1)
            if kind == "out":
                continue
            if kind == "in":
                cells.append(Cell(x0, x1, y0, y1, True))
            elif (x1 - x0) <= CELL_WIDTH * y0 or depth >= MAX_CELL_DEPTH:
                cells.append(Cell(x0, x1, y0, y1, False))
            else:
                mid = 0.5 * (x0 + x1)
                stack.append((mid, x1, depth + 1))
                stack.append((x0, mid, depth + 1))
    cells.sort(key=lambda c: (c.y0, c.x0))
    return tuple(cells)


def axis_coordinates(g: MoebiusMap) -> MoebiusMap:
    """Map sending the repelling fixed point of g to 0 and the attracting one to infinity."""
    p, q = g.fixed_points()
    if math.isinf(q):
        return MoebiusMap(1.0, -p, 0.0, 1.0)
    if math.isinf(p):
        return MoebiusMap(0.0, -1.0, 1.0, -q)
    sign = 1.0 if p > q else -1.0
    return MoebiusMap.from_matrix([[sign, -sign * p], [1.0, -q]])


def convex_core(surface: SchottkySurface, collar: float = 1.0) -> ConvexCore | CollarCore:
    if surface.rank == 1:
        g = surface.generators[0]
        core: ConvexCore | CollarCore = CollarCore(surface, collar, translation_length(g), axis_coordinates(g))
        log_event(logger, "core_built", surface=surface.name, kind="collar", width=collar)
        return core

    ext = limit_set_extremes(surface)
    keys = tuple(letter_from_key(k) for k in range(2 * surface.rank))
    by_left = sorted(letters(surface.rank), key=lambda x: surface.disks.for_letter(x).left)
    gaps = tuple(
        Circle(0.5 * (ext[u][1] + ext[v][0]), 0.5 * (ext[v][0] - ext[u][1])) for u, v in zip(by_left, by_left[1:])
    )
    lo, hi = ext[by_left[0]][0], ext[by_left[-1]][1]
    hull = Circle(0.5 * (lo + hi), 0.5 * (hi - lo))
    pairing = tuple(
        Circle(surface.disks.for_letter(x).center, surface.disks.for_letter(x).radius) for x in keys
    )
    heights = [
        h
        for p in pairing
        for q in (hull, *gaps)
        if (h := _intersection_height(p, q)) is not None
    ]
    if not heights:
        raise GeometryError(f"core of {surface.name} has no boundary corners; pairing disks look misplaced")
    cells = _build_cells(hull, pairing + gaps, 0.5 * min(heights))
    core = ConvexCore(surface, hull, gaps, pairing, keys, cells)
    log_event(
        logger,
        "core_built",
        surface=surface.name,
        kind="convex_core",
        cells=len(cells),
        cell_area=float(sum(c.area for c in cells)),
        core_area=surface.volume,
    )
    return core


def _philox(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, chunk]))


def _sample_chunk(core: ConvexCore | CollarCore, seed: int, chunk: int, n: int) -> tuple[Frames, int, int]:
    return core.sample(n, _philox(seed, chunk))


def sample_liouville(
    core: ConvexCore | CollarCore, n_samples: int, seed: int, workers: int = 1
) -> tuple[Frames, float]:
    """
    Liouville samples over the core, split into fixed chunks of CHUNK states.

    Chunk k draws from a Philox stream keyed by (seed, k), so the sample does not
    depend on the worker count.
    """
    sizes = [min(CHUNK, n_samples - start) for start in range(0, n_samples, CHUNK)]
    parts = Parallel(n_jobs=max(1, workers))(
        delayed(_sample_chunk)(core, seed, k, size) for k, size in enumerate(sizes)
    )
    accepted = sum(p[1] for p in parts)
    drawn = sum(p[2] for p in parts)
    efficiency = accepted / drawn if drawn else 0.0
    if efficiency < MIN_EFFICIENCY or accepted < n_samples:
        raise GeometryError(
            f"rejection sampling kept {efficiency:.2%} of draws (< {MIN_EFFICIENCY:.0%}); core region is misidentified"
        )
    return Frames.concatenate([p[0] for p in parts]), efficiency
