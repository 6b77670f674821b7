from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from hyperbolic_scattering.errors import LocalizationError, ResolutionError, SurfaceError
from hyperbolic_scattering.geometry.schottky import SchottkySurface
from hyperbolic_scattering.geometry.words import letter_from_key
from hyperbolic_scattering.settings import get_settings
from hyperbolic_scattering.spectrum.enumerate import LengthSpectrum
from hyperbolic_scattering.telemetry import get_logger, log_event
from hyperbolic_scattering.zeta.euler import zeta_euler

logger = get_logger("continuation")

MAX_NODES = 512


@dataclass(frozen=True, eq=False)
class Branch:
    """
    Block of the transfer operator from functions on D(source) to functions on D(target).

    log_factor[j] = log x'(z_j) on the target boundary nodes; powers[j, k] = u_j^k with
    u_j the image node x(z_j) in the scaled coordinate of D(source).
    """

    target: int
    source: int
    log_factor: np.ndarray
    powers: np.ndarray


@dataclass(frozen=True, eq=False)
class TransferDiscretization:
    """
    Taylor-coefficient collocation of the Bowen-Series transfer operator.

    Functions on each letter disk D(y) are expanded in ((z - c_y)/r_y)^k, k < nodes_per_disk;
    coefficients are read off by FFT on the boundary circle.
    """

    surface_name: str
    rank: int
    nodes_per_disk: int
    centers: np.ndarray
    radii: np.ndarray
    branches: tuple[Branch, ...]
    margin: float
    normalization: float = 1.0
    anchor: float | None = None
    resolution_tol: float = 1e-6
    surface: SchottkySurface | None = field(default=None, repr=False, compare=False)

    @property
    def mesh_size(self) -> int:
        return 2 * self.rank * self.nodes_per_disk

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.nodes_per_disk, 1.0 / self.nodes_per_disk)

    def nodes(self, key: int) -> np.ndarray:
        m = self.nodes_per_disk
        return self.centers[key] + self.radii[key] * np.exp(2j * np.pi * np.arange(m) / m)

    def matrix(self, s: complex) -> np.ndarray:
        m = self.nodes_per_disk
        a = np.zeros((self.mesh_size, self.mesh_size), dtype=complex)
        for br in self.branches:
            h = np.exp(s * br.log_factor)[:, None] * br.powers
            a[br.target * m : (br.target + 1) * m, br.source * m : (br.source + 1) * m] = (
                np.fft.fft(h, axis=0) / m
            )
        return a

    def raw_determinant(self, s: complex) -> complex:
        return complex(np.linalg.det(np.eye(self.mesh_size) - self.matrix(complex(s))))

    def __call__(self, s: complex) -> complex:
        return self.normalization * self.raw_determinant(s)

    def refined(self) -> "TransferDiscretization":
        return self._doubled

    @cached_property
    def _doubled(self) -> "TransferDiscretization":
        if self.surface is None:
            raise ResolutionError("discretization was built without its surface and cannot be refined")
        finer = build_discretization(self.surface, 2 * self.nodes_per_disk, resolution_tol=self.resolution_tol)
        return replace(finer, normalization=self.normalization, anchor=self.anchor)


def build_discretization(
    s: SchottkySurface,
    nodes: int | None = None,
    resolution_tol: float | None = None,
) -> TransferDiscretization:
    settings = get_settings()
    m = nodes if nodes is not None else settings.transfer_nodes
    if m < 4:
        raise ValueError(f"need at least 4 nodes per disk, got {m}")
    centers, radii = s.disks.letter_arrays(s.rank)
    maps = s.letter_maps()
    n = 2 * s.rank
    k = np.arange(m)
    theta = 2.0 * np.pi * k / m

    branches: list[Branch] = []
    margin = math.inf
    for y_key in range(n):
        z = centers[y_key] + radii[y_key] * np.exp(1j * theta)
        for x_key in range(n):
            if x_key == (y_key ^ 1):
                continue
            g = maps[letter_from_key(x_key)]
            # cz + d keeps one sign on the real diameter of D(y)
            sign = math.copysign(1.0, g.c * centers[y_key] + g.d)
            log_factor = -2.0 * np.log(sign * (g.c * z + g.d))
            u = (g.apply(z) - centers[x_key]) / radii[x_key]
            margin = min(margin, 1.0 - float(np.max(np.abs(u))))
            powers = u[:, None] ** k[None, :]
            branches.append(Branch(y_key, x_key, log_factor, powers))

    if margin <= 0.0:
        raise SurfaceError(f"branch images leave their target disks (margin {margin:.3g})")
    return TransferDiscretization(
        surface_name=s.name,
        rank=s.rank,
        nodes_per_disk=m,
        centers=centers,
        radii=radii,
        branches=tuple(branches),
        margin=margin,
        resolution_tol=resolution_tol if resolution_tol is not None else settings.resolution_tol,
        surface=s,
    )


def calibrate(
    disc: TransferDiscretization,
    spec: LengthSpectrum,
    delta_hint: float,
    anchor: float | None = None,
) -> TransferDiscretization:
    """Scale the determinant so that it equals the Euler product at a real anchor point."""
    s0 = anchor if anchor is not None else get_settings().anchor_point
    euler = zeta_euler(s0, spec, delta_hint, strict=False).value.real
    raw = disc.raw_determinant(s0).real
    norm = euler / raw
    log_event(logger, "determinant_calibrated", anchor=s0, normalization=norm, surface=disc.surface_name)
    return replace(disc, normalization=norm, anchor=s0)


def determinant(s: complex, disc: TransferDiscretization, verify: bool = True) -> complex:
    """
    Normalized Fredholm determinant det(1 - L_s).

    With verify, the doubled mesh is evaluated too and a change above the
    resolution tolerance raises.
    """
    value = disc(s)
    if verify:
        finer = disc.refined()(s)
        change = abs(finer - value)
        if change > disc.resolution_tol * max(1.0, abs(finer)):
            raise ResolutionError(
                f"mesh doubling {disc.nodes_per_disk} -> {2 * disc.nodes_per_disk} changes det({s}) "
                f"by {change:.3g}; increase transfer_nodes"
            )
        return finer
    return value


def converged_discretization(
    s: SchottkySurface,
    probe_points: Sequence[complex],
    nodes: int | None = None,
    resolution_tol: float | None = None,
    max_nodes: int = MAX_NODES,
) -> TransferDiscretization:
    """Double the mesh until every probe point passes the doubling check."""
    disc = build_discretization(s, nodes, resolution_tol)
    while True:
        try:
            for p in probe_points:
                determinant(p, disc, verify=True)
        except ResolutionError as exc:
            if 2 * disc.nodes_per_disk > max_nodes:
                raise ResolutionError(f"no converged mesh up to {max_nodes} nodes per disk: {exc}") from exc
            disc = build_discretization(s, 2 * disc.nodes_per_disk, disc.resolution_tol)
            continue
        log_event(
            logger,
            "mesh_converged",
            surface=s.name,
            nodes_per_disk=disc.nodes_per_disk,
            probes=len(probe_points),
            margin=disc.margin,
        )
        return disc


def leading_resonance(
    disc: TransferDiscretization,
    s_max: float = 1.0,
    s_min: float = -0.25,
    step: float = 0.01,
) -> float:
    """Largest real zero of the determinant in [s_min, s_max]."""
    grid = np.arange(s_max, s_min - 0.5 * step, -step)
    vals = np.array([disc.raw_determinant(x).real for x in grid])
    for k in range(len(grid) - 1):
        if vals[k] == 0.0:
            return float(grid[k])
        if vals[k] * vals[k + 1] < 0.0:
            return float(brentq(lambda x: disc.raw_determinant(x).real, grid[k + 1], grid[k], xtol=1e-12))
    # an even-order zero touches zero without a sign change
    k = int(np.argmin(np.abs(vals)))
    lo, hi = grid[min(k + 1, len(grid) - 1)], grid[max(k - 1, 0)]
    res = minimize_scalar(lambda x: abs(disc.raw_determinant(x).real), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    scale = float(np.max(np.abs(vals)))
    if res.fun > 1e-8 * max(1.0, scale):
        raise LocalizationError(f"no real zero of the determinant in [{s_min}, {s_max}]")
    return float(res.x)


@dataclass(frozen=True)
class OrientationCheck:
    convention: str
    spread_oriented: float
    spread_unoriented: float
    points: tuple[float, ...]


def orientation_check(
    disc: TransferDiscretization,
    oriented: LengthSpectrum,
    unoriented: LengthSpectrum,
    delta_hint: float,
    points: Sequence[float] = (1.5, 2.0, 2.5, 3.0),
) -> OrientationCheck:
    """Which counting convention of the Euler product the determinant reproduces."""

    def spread(spec: LengthSpectrum) -> float:
        ratios = [
            math.log(abs(disc.raw_determinant(p))) - zeta_euler(p, spec, delta_hint, strict=False).log_value.real
            for p in points
        ]
        return float(max(ratios) - min(ratios))

    so, su = spread(oriented), spread(unoriented)
    check = OrientationCheck("oriented" if so <= su else "unoriented", so, su, tuple(points))
    log_event(logger, "orientation_check", convention=check.convention, spread_oriented=so, spread_unoriented=su)
    return check


