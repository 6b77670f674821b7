from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hyperbolic_scattering.geometry.moebius import MoebiusMap, compose
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.telemetry import get_logger

logger = get_logger("dynamics")

BOUNDARY_EPS = 1e-12
MAX_CROSSINGS = 1_000_000


@dataclass(frozen=True)
class FlowState:
    """
    Unit tangent vector on the surface, held as a frame g in SL(2, R).

    The base point is g(i) and the direction is the image of the upward unit
    vector at i. word_history is the deck transformation W with
    reduced frame = W^-1 * (frame in the universal cover).
    """

    frame: MoebiusMap
    word_history: MoebiusMap = MoebiusMap.identity()

    @property
    def position(self) -> complex:
        return self.frame(1j)

    @property
    def direction(self) -> complex:
        """Euclidean components of the tangent vector at position."""
        g = self.frame
        return 1j / (g.c * 1j + g.d) ** 2

    @property
    def direction_norm(self) -> float:
        """Hyperbolic length of the direction; 1 up to rounding."""
        return abs(self.direction) / self.position.imag

    @property
    def forward_endpoint(self) -> float:
        g = self.frame
        return math.inf if g.c == 0.0 else g.a / g.c

    @property
    def backward_endpoint(self) -> float:
        g = self.frame
        return math.inf if g.d == 0.0 else g.b / g.d


def frame_from(position: complex, direction: complex) -> MoebiusMap:
    """Frame based at `position` pointing along the Euclidean vector `direction`."""
    if position.imag <= 0.0:
        raise ValueError(f"position {position} is not in the upper half-plane")
    if direction == 0:
        raise ValueError("direction must be nonzero")
    x, y = position.real, position.imag
    sy = math.sqrt(y)
    # k(phi) rotates the upward vector at i by e^{-2i phi}
    phi = -0.5 * np.angle(direction / 1j)
    cphi, sphi = math.cos(phi), math.sin(phi)
    return MoebiusMap(
        sy * cphi + x / sy * sphi,
        -sy * sphi + x / sy * cphi,
        sphi / sy,
        cphi / sy,
    )


def geodesic_step(frame: MoebiusMap, t: float) -> MoebiusMap:
    """Right multiplication by diag(e^{t/2}, e^{-t/2})."""
    return compose(frame, MoebiusMap.dilation(t))


def reverse(state: FlowState) -> FlowState:
    g = state.frame
    return FlowState(MoebiusMap(g.b, -g.a, g.d, -g.c), state.word_history)


def crossing_time(frame: MoebiusMap, center: float, radius: float) -> float:
    """
    First t >= 0 at which frame(e^t i) meets the circle |w - center| = radius.

    Valid when the forward endpoint and the base point lie on opposite sides of the circle.
    """
    a, b, c, d = frame.a, frame.b, frame.c, frame.d
    num = radius**2 * d**2 - (b - center * d) ** 2
    den = (a - center * c) ** 2 - radius**2 * c**2
    if den == 0.0 or num / den <= 1.0:
        return 0.0
    return 0.5 * math.log(num / den)


def _disk_of(point: float, centers: np.ndarray, radii: np.ndarray) -> int | None:
    if math.isinf(point):
        return None
    hits = np.nonzero(np.abs(point - centers) < radii)[0]
    return int(hits[0]) if hits.size else None


def _nudge_off_boundary(state: FlowState, surface: SchottkySurface) -> FlowState:
    p = state.position
    for disk in surface.disks.all():
        gap = abs(p - disk.center) - disk.radius
        if abs(gap) <= BOUNDARY_EPS * max(1.0, disk.radius):
            outward = (p - disk.center) / abs(p - disk.center)
            moved = p + outward * (BOUNDARY_EPS * max(1.0, disk.radius) - gap)
            logger.warning(
                "flow_boundary_perturbed",
                extra={"center": disk.center, "radius": disk.radius, "offset": abs(moved - p)},
            )
            return FlowState(frame_from(moved, state.direction), state.word_history)
    return state


def flow(state: FlowState, t: float, surface: SchottkySurface) -> FlowState:
    """
    Geodesic flow for time t with reduction into the fundamental domain.

    Each time the geodesic enters the pairing disk D(x) the generator x^-1 is
    applied and x is appended to word_history. A geodesic meets a disk boundary
    at most once, so the only disk the current segment can enter is the one
    containing its forward endpoint.
    """
    if t < 0.0:
        return reverse(flow(reverse(state), -t, surface))
    if t == 0.0:
        return state
    state = _nudge_off_boundary(state, surface)
    maps = surface.letter_maps()
    keys = sorted(maps, key=lambda x: (abs(x), x < 0))
    centers = np.array([surface.disks.for_letter(x).center for x in keys])
    radii = np.array([surface.disks.for_letter(x).radius for x in keys])

    frame, word = state.frame, state.word_history
    remaining = t
    for _ in range(MAX_CROSSINGS):
        k = _disk_of(math.inf if frame.c == 0.0 else frame.a / frame.c, centers, radii)
        if k is None:
            return FlowState(geodesic_step(frame, remaining), word)
        tau = crossing_time(frame, centers[k], radii[k])
        if tau >= remaining:
            return FlowState(geodesic_step(frame, remaining), word)
        x = keys[k]
        frame = compose(maps[-x], geodesic_step(frame, tau))
        word = compose(word, maps[x])
        remaining -= tau
    raise RuntimeError(f"flow exceeded {MAX_CROSSINGS} disk crossings")


def universal_cover_flow(state: FlowState, t: float) -> FlowState:
    """Flow in H^2 without reduction; the frame is expressed in cover coordinates."""
    cover = compose(state.word_history, state.frame)
    return FlowState(geodesic_step(cover, t))


def _circle_parameter(frame: MoebiusMap, center: float, radius: float) -> float:
    """Signed time at which the full geodesic through frame meets the circle."""
    a, b, c, d = frame.a, frame.b, frame.c, frame.d
    num = radius**2 * d**2 - (b - center * d) ** 2
    den = (a - center * c) ** 2 - radius**2 * c**2
    return 0.5 * math.log(num / den)


def axis_state(g: MoebiusMap, surface: SchottkySurface) -> FlowState:
    """
    State on the axis of g pointing to its attracting fixed point, placed midway
    between the two pairing disks holding the fixed points.
    """
    p, q = g.fixed_points()
    if math.isinf(q):
        h = MoebiusMap.from_matrix([[1.0, p], [0.0, 1.0]])
    elif math.isinf(p):
        h = MoebiusMap.from_matrix([[q, -1.0], [1.0, 0.0]])
    elif q > p:
        h = MoebiusMap.from_matrix([[q, p], [1.0, 1.0]])
    else:
        h = MoebiusMap.from_matrix([[-q, p], [-1.0, 1.0]])
    # h sends 0 -> p and infinity -> q
    hits = [
        _circle_parameter(h, disk.center, disk.radius)
        for disk in surface.disks.all()
        if any(not math.isinf(e) and abs(e - disk.center) < disk.radius for e in (p, q))
    ]
    if len(hits) != 2:
        raise ValueError("axis does not run between two pairing disks")
    return FlowState(geodesic_step(h, 0.5 * (hits[0] + hits[1])))
