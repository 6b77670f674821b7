from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import newton

from hyperbolic_scattering.errors import LocalizationError, ZeroOnContourError

ComplexFunction = Callable[[complex], complex]

MAX_PHASE_STEP = math.pi / 4
# off-centre split points keep real zeros and lattice lines off cell edges
SPLIT_FRACTIONS = (0.4873, 0.5311, 0.4617)


@dataclass(frozen=True)
class ComplexBox:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self) -> None:
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate box {self}")

    @classmethod
    def around(cls, center: complex, half_width: float) -> "ComplexBox":
        return cls(center.real - half_width, center.real + half_width, center.imag - half_width, center.imag + half_width)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def is_conjugation_symmetric(self) -> bool:
        return abs(self.im_min + self.im_max) <= 1e-12 * max(1.0, abs(self.im_max))

    def corners(self) -> list[complex]:
        """Counterclockwise from the lower left corner."""
        return [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]

    def contains(self, s: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= s.real <= self.re_max + pad
            and self.im_min - pad <= s.imag <= self.im_max + pad
        )

    def contains_box(self, other: "ComplexBox") -> bool:
        return (
            self.re_min <= other.re_min
            and other.re_max <= self.re_max
            and self.im_min <= other.im_min
            and other.im_max <= self.im_max
        )

    def split(self, fraction: float = SPLIT_FRACTIONS[0]) -> list["ComplexBox"]:
        xm = self.re_min + fraction * (self.re_max - self.re_min)
        ym = self.im_min + fraction * (self.im_max - self.im_min)
        return [
            ComplexBox(self.re_min, xm, self.im_min, ym),
            ComplexBox(xm, self.re_max, self.im_min, ym),
            ComplexBox(xm, self.re_max, ym, self.im_max),
            ComplexBox(self.re_min, xm, ym, self.im_max),
        ]

    def shifted(self, eps: float) -> "ComplexBox":
        """Grow the box by eps on every side."""
        return ComplexBox(self.re_min - eps, self.re_max + eps, self.im_min - eps, self.im_max + eps)

    def as_list(self) -> list[float]:
        return [self.re_min, self.re_max, self.im_min, self.im_max]


def phase_change(
    f: ComplexFunction,
    a: complex,
    b: complex,
    n_initial: int = 16,
    max_depth: int = 12,
    floor: float = 1e-300,
) -> float:
    """
    Continuous change of arg f along the segment a -> b.

    Consecutive samples are bisected until their phase differs by less than pi/4.
    """

    def value(t: float) -> complex:
        v = complex(f(a + t * (b - a)))
        if not cmath.isfinite(v) or abs(v) <= floor:
            raise ZeroOnContourError(f"|f| = {abs(v):.3g} at {a + t * (b - a)} on the contour")
        return v

    def piece(t0: float, v0: complex, t1: float, v1: complex, depth: int) -> float:
        step = cmath.phase(v1 / v0)
        if abs(step) <= MAX_PHASE_STEP:
            return step
        if depth >= max_depth:
            raise ZeroOnContourError(
                f"phase jump {step:.3f} unresolved between {a + t0 * (b - a)} and {a + t1 * (b - a)}"
            )
        tm = 0.5 * (t0 + t1)
        vm = value(tm)
        return piece(t0, v0, tm, vm, depth + 1) + piece(tm, vm, t1, v1, depth + 1)

    ts = np.linspace(0.0, 1.0, n_initial + 1)
    vals = [value(float(t)) for t in ts]
    return float(sum(piece(float(ts[k]), vals[k], float(ts[k + 1]), vals[k + 1], 0) for k in range(n_initial)))


def winding_number(f: ComplexFunction, box: ComplexBox, max_depth: int = 12) -> int:
    """Number of zeros (with multiplicity) of a holomorphic f inside the box."""
    c = box.corners()
    total = sum(phase_change(f, c[k], c[(k + 1) % 4], max_depth=max_depth) for k in range(4))
    turns = total / (2.0 * math.pi)
    n = round(turns)
    if abs(turns - n) > 0.05:
        raise ZeroOnContourError(f"non-integer winding {turns:.4f} on {box.as_list()}")
    return int(n)


def central_derivative(f: ComplexFunction, s: complex, rel_step: float = 1e-6) -> complex:
    h = rel_step * max(1.0, abs(s))
    return (f(s + h) - f(s - h)) / (2.0 * h)


@dataclass(frozen=True)
class LocatedZero:
    s: complex
    multiplicity: int
    residual: float
    scale: float
    cell: ComplexBox


@dataclass
class ZeroSearch:
    box: ComplexBox
    winding: int
    zeros: list[LocatedZero]
    cells_examined: int


def _local_scale(f: ComplexFunction, s: complex, radius: float) -> float:
    pts = s + radius * np.exp(2j * np.pi * np.arange(8) / 8)
    return float(max(abs(f(complex(p))) for p in pts))


def _polish(f: ComplexFunction, cell: ComplexBox, multiplicity: int) -> LocatedZero | None:
    def fprime(s: complex) -> complex:
        return central_derivative(f, s) / multiplicity

    x0 = cell.center
    try:
        root = complex(newton(f, x0, fprime=fprime, tol=1e-14 * max(1.0, abs(x0)), maxiter=80))
    except (RuntimeError, ZeroDivisionError, OverflowError):
        return None
    if not cmath.isfinite(root) or not cell.contains(root, pad=1e-9 * max(1.0, cell.diameter)):
        return None
    scale = _local_scale(f, root, max(1e-3, 0.5 * cell.diameter))
    return LocatedZero(root, multiplicity, abs(f(root)), scale, cell)


def _children(f: ComplexFunction, cell: ComplexBox, max_depth: int) -> list[tuple[ComplexBox, int]]:
    last: Exception | None = None
    for fraction in SPLIT_FRACTIONS:
        try:
            return [(q, winding_number(f, q, max_depth)) for q in cell.split(fraction)]
        except ZeroOnContourError as exc:
            last = exc
    raise LocalizationError(f"every split of {cell.as_list()} puts a zero on a cell edge: {last}")


def locate_zeros(
    f: ComplexFunction,
    box: ComplexBox,
    max_subdivisions: int = 24,
    cluster_size: float = 1e-4,
    contour_depth: int = 12,
) -> ZeroSearch:
    """
    Zeros of a holomorphic function inside a box by the argument principle.

    Cells are split into quarters until each holds a single zero, which is then
    polished by Newton's method; a cell still holding several zeros below
    cluster_size is reported as one zero of that multiplicity.
    """
    try:
        total = winding_number(f, box, contour_depth)
    except ZeroOnContourError:
        box = box.shifted(1e-7 * max(1.0, box.diameter))
        total = winding_number(f, box, contour_depth)
    if total < 0:
        raise LocalizationError(f"negative winding {total} on {box.as_list()}: function has poles inside")

    zeros: list[LocatedZero] = []
    queue: deque[tuple[ComplexBox, int, int]] = deque([(box, total, 0)])
    examined = 0
    while queue:
        cell, count, depth = queue.popleft()
        examined += 1
        if count == 0:
            continue
        small = cell.diameter <= cluster_size
        if count == 1 or small:
            located = _polish(f, cell, count)
            if located is not None:
                zeros.append(located)
                continue
            if small:
                raise LocalizationError(f"Newton failed in cell {cell.as_list()} holding {count} zero(s)")
        if depth >= max_subdivisions and not small:
            raise LocalizationError(
                f"cell {cell.as_list()} still holds {count} zeros after {depth} subdivisions"
            )
        children = _children(f, cell, contour_depth)
        if sum(n for _, n in children) != count:
            raise LocalizationError(
                f"cell {cell.as_list()} winds {count} times but its quarters wind "
                f"{[n for _, n in children]}"
            )
        queue.extend((q, n, depth + 1) for q, n in children)

    found = sum(z.multiplicity for z in zeros)
    if found != total:
        raise LocalizationError(f"winding number {total} on {box.as_list()} but {found} zeros located")
    zeros.sort(key=lambda z: (z.s.real, z.s.imag))
    return ZeroSearch(box=box, winding=total, zeros=zeros, cells_examined=examined)
