from __future__ import annotations

import math

import pytest

from hyperbolic_scattering.contour import ComplexBox, central_derivative, locate_zeros, phase_change, winding_number
from hyperbolic_scattering.errors import ZeroOnContourError


def _poly(s: complex) -> complex:
    return (s - 0.3) * (s - (1.0 + 2.0j)) ** 2


def test_box_geometry():
    box = ComplexBox(-1.0, 1.0, -2.0, 2.0)
    assert box.center == 0.0
    assert box.contains(0.9 + 1.9j)
    assert not box.contains(1.5)
    assert box.contains_box(ComplexBox.around(0.1j, 0.5))
    parts = box.split()
    assert len(parts) == 4
    assert sum((p.re_max - p.re_min) * (p.im_max - p.im_min) for p in parts) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        ComplexBox(1.0, 1.0, 0.0, 1.0)


def test_phase_change_around_origin():
    turn = sum(phase_change(lambda s: s, a, b) for a, b in [(1 - 1j, 1 + 1j), (1 + 1j, -1 + 1j), (-1 + 1j, -1 - 1j), (-1 - 1j, 1 - 1j)])
    assert turn == pytest.approx(2.0 * math.pi, abs=1e-12)


def test_winding_counts_multiplicity():
    assert winding_number(_poly, ComplexBox(-1.0, 3.0, -1.0, 3.0)) == 3
    assert winding_number(_poly, ComplexBox(-1.0, 0.7, -1.0, 1.0)) == 1
    assert winding_number(_poly, ComplexBox(2.0, 3.0, -1.0, 1.0)) == 0


def test_zero_on_contour_is_reported():
    with pytest.raises(ZeroOnContourError):
        winding_number(lambda s: s - 1.0, ComplexBox(1.0, 2.0, -1.0, 1.0))


def test_locate_zeros_with_multiplicity():
    search = locate_zeros(_poly, ComplexBox(-1.0, 3.0, -1.0, 3.0))
    assert search.winding == 3
    by_mult = {z.multiplicity: z for z in search.zeros}
    assert set(by_mult) == {1, 2}
    assert by_mult[1].s == pytest.approx(0.3, abs=1e-10)
    assert by_mult[2].s == pytest.approx(1.0 + 2.0j, abs=1e-6)


def test_central_derivative():
    assert central_derivative(lambda s: s**3, 2.0 + 1.0j) == pytest.approx(3.0 * (2.0 + 1.0j) ** 2, rel=1e-8)
