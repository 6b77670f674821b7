from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hyperbolic_scattering.errors import ClassificationError

DET_TOL = 1e-12


@dataclass(frozen=True)
class MoebiusMap:
    """
    Real unimodular 2x2 matrix acting on the upper half-plane by z -> (az+b)/(cz+d).

    Instances are always normalized: determinant 1 and, for hyperbolic maps,
    positive trace (the PSL(2,R) representative).
    """

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence[float]] | np.ndarray) -> "MoebiusMap":
        arr = np.asarray(m, dtype=float)
        if arr.shape != (2, 2):
            raise ValueError(f"Expected a 2x2 matrix, got shape {arr.shape}")
        det = float(arr[0, 0] * arr[1, 1] - arr[0, 1] * arr[1, 0])
        if not det > 0.0 or not math.isfinite(det):
            raise ValueError(f"Matrix must have positive finite determinant, got {det}")
        arr = arr / math.sqrt(det)
        if arr[0, 0] + arr[1, 1] < 0.0:
            arr = -arr
        return cls(float(arr[0, 0]), float(arr[0, 1]), float(arr[1, 0]), float(arr[1, 1]))

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def dilation(cls, length: float) -> "MoebiusMap":
        """Hyperbolic map z -> e^length z (translation length `length` along the imaginary axis)."""
        h = 0.5 * length
        return cls(math.exp(h), 0.0, 0.0, math.exp(-h))

    @classmethod
    def rotation(cls, angle: float) -> "MoebiusMap":
        """Elliptic map fixing i; turns the boundary circle of the disk model by `angle`."""
        t = 0.5 * angle
        return cls(math.cos(t), math.sin(t), -math.sin(t), math.cos(t))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def determinant(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __call__(self, z: complex) -> complex:
        if math.isinf(abs(z)):
            return complex("inf") if self.c == 0.0 else complex(self.a / self.c)
        den = self.c * z + self.d
        if den == 0:
            return complex("inf")
        return (self.a * z + self.b) / den

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Vectorized action on finite points."""
        z = np.asarray(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z: np.ndarray | complex) -> np.ndarray | complex:
        return 1.0 / (self.c * np.asarray(z) + self.d) ** 2

    def fixed_points(self) -> tuple[float, float]:
        """
        Return (repelling, attracting) fixed points on the real line.

        A fixed point at infinity is reported as math.inf.
        """
        if not self.is_hyperbolic:
            raise ClassificationError(f"Map with trace {self.trace:.17g} has no real fixed-point pair")
        if self.c == 0.0:
            finite = self.b / (self.d - self.a)
            # z -> (a/d) z + b/d: finite point attracts when a < d
            return (math.inf, finite) if self.a < self.d else (finite, math.inf)
        disc = math.sqrt((self.a - self.d) ** 2 + 4.0 * self.b * self.c)
        p = ((self.a - self.d) - disc) / (2.0 * self.c)
        q = ((self.a - self.d) + disc) / (2.0 * self.c)
        if abs(self.c * q + self.d) > abs(self.c * p + self.d):
            return p, q
        return q, p

    def power(self, n: int) -> "MoebiusMap":
        if n < 0:
            return self.inverse().power(-n)
        out = MoebiusMap.identity()
        base = self
        while n:
            if n & 1:
                out = compose(out, base)
            base = compose(base, base)
            n >>= 1
        return out

    def conjugate_by(self, h: "MoebiusMap") -> "MoebiusMap":
        """Return h g h^-1."""
        return compose(compose(h, self), h.inverse())

    def as_list(self) -> list[list[float]]:
        return [[self.a, self.b], [self.c, self.d]]


def compose(f: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """Matrix product f*g (apply g first), renormalized to determinant 1."""
    a = f.a * g.a + f.b * g.c
    b = f.a * g.b + f.b * g.d
    c = f.c * g.a + f.d * g.c
    d = f.c * g.b + f.d * g.d
    det = a * d - b * c
    if abs(det - 1.0) > DET_TOL:
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
    if abs(a + d) > 2.0 and a + d < 0.0:
        a, b, c, d = -a, -b, -c, -d
    return MoebiusMap(a, b, c, d)


def translation_length(g: MoebiusMap) -> float:
    t = abs(g.trace)
    if t <= 2.0:
        raise ClassificationError(f"Not hyperbolic: |trace| = {t:.17g} <= 2")
    return 2.0 * math.acosh(0.5 * t)


def length_from_trace(trace: float) -> float:
    t = abs(trace)
    if t <= 2.0:
        raise ClassificationError(f"Not hyperbolic: |trace| = {t:.17g} <= 2")
    return 2.0 * math.acosh(0.5 * t)


def hyperbolic_distance(p: complex, q: complex) -> float:
    if p.imag <= 0.0 or q.imag <= 0.0:
        raise ValueError("Points must lie in the upper half-plane")
    return math.acosh(1.0 + abs(p - q) ** 2 / (2.0 * p.imag * q.imag))


def axis_point(g: MoebiusMap) -> complex:
    """Highest point of the axis of a hyperbolic map (any point works for displacement checks)."""
    p, q = g.fixed_points()
    if math.isinf(p):
        return complex(q, 1.0)
    if math.isinf(q):
        return complex(p, 1.0)
    return complex(0.5 * (p + q), 0.5 * abs(q - p))


def axis_point_displacement(g: MoebiusMap, t: float = 0.0) -> float:
    """Displacement d(m, g m) for the axis point at signed distance `t` from the axis top."""
    m = axis_point(g)
    p, q = g.fixed_points()
    if math.isinf(p) or math.isinf(q):
        m = complex(m.real, math.exp(t))
    else:
        c = 0.5 * (p + q)
        r = 0.5 * abs(q - p)
        # point on the semicircle at hyperbolic arclength t from the top
        phi = 2.0 * math.atan(math.tanh(0.5 * t)) + 0.5 * math.pi
        m = complex(c + r * math.cos(phi), r * math.sin(phi))
    return hyperbolic_distance(m, g(m))


def to_disk(w: complex | np.ndarray) -> complex | np.ndarray:
    """Cayley map from the upper half-plane to the unit disk (i -> 0)."""
    return (w - 1j) / (w + 1j)


def to_half_plane(z: complex | np.ndarray) -> complex | np.ndarray:
    """Inverse Cayley map from the unit disk to the upper half-plane (0 -> i)."""
    return 1j * (1.0 + z) / (1.0 - z)

