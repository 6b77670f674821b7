from __future__ import annotations

import math

import numpy as np
import pytest

from hyperbolic_scattering.errors import DivergenceRegionError, EstimationError, RouteError, TailTooLargeError
from hyperbolic_scattering.fitting import envelope_exponent
from hyperbolic_scattering.zeta import (
    ZetaRoute,
    arg_zeta,
    argument_curve_euler,
    find_zeta_half_plane_constant,
    funnel_phase,
    funnel_zero_lattice,
    zeta_euler,
    zeta_funnel,
    zeta_logderiv,
    zeta_table,
)


@pytest.fixture()
def delta_hint(three_funnel_delta):
    return three_funnel_delta.delta + three_funnel_delta.uncertainty


def test_euler_product_tends_to_one(oriented_spectrum, delta_hint):
    zv = zeta_euler(10.0 + 3.0j, oriented_spectrum, delta_hint)
    assert abs(zv.value - 1.0) < 1e-30
    assert zv.tail_bound < 1e-6


def test_euler_product_is_real_on_the_real_axis(oriented_spectrum, delta_hint):
    zv = zeta_euler(1.0, oriented_spectrum, delta_hint)
    assert zv.log_value.imag == 0.0
    assert 0.0 < zv.value.real < 1.0


def test_log_derivative_matches_finite_difference(oriented_spectrum, delta_hint):
    s, h = 1.5 + 2.0j, 1e-5
    fd = (
        zeta_euler(s + h, oriented_spectrum, delta_hint).log_value
        - zeta_euler(s - h, oriented_spectrum, delta_hint).log_value
    ) / (2.0 * h)
    assert zeta_logderiv(s, oriented_spectrum, delta_hint).value == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_divergence_region(oriented_spectrum, delta_hint):
    with pytest.raises(DivergenceRegionError):
        zeta_euler(delta_hint - 0.01, oriented_spectrum, delta_hint)
    with pytest.raises(DivergenceRegionError):
        zeta_logderiv(delta_hint, oriented_spectrum, delta_hint)


def test_strict_tail_reports_needed_cutoff(oriented_spectrum, delta_hint):
    with pytest.raises(TailTooLargeError) as exc:
        zeta_euler(0.5 + 1.0j, oriented_spectrum, delta_hint, tolerance=1e-30)
    assert exc.value.needed_cutoff > oriented_spectrum.cutoff
    relaxed = zeta_euler(0.5 + 1.0j, oriented_spectrum, delta_hint, tolerance=1e-30, strict=False)
    assert relaxed.tail_bound > 1e-30


def test_argument_routes_through_euler_sum(oriented_spectrum, delta_hint):
    z = np.array([0.5, 1.5, 3.0])
    curve = argument_curve_euler(z, oriented_spectrum, delta_hint)
    integrated = [arg_zeta(t, ZetaRoute.EULER, oriented_spectrum, delta_hint).value for t in z]
    assert integrated == pytest.approx(curve, abs=1e-4)


def test_euler_route_refused_for_thick_surfaces(oriented_spectrum):
    with pytest.raises(RouteError):
        argument_curve_euler(np.array([1.0]), oriented_spectrum, 0.6)
    with pytest.raises(RouteError):
        arg_zeta(1.0, "determinant")


def test_zeta_table_columns(oriented_spectrum, delta_hint):
    frame = zeta_table(oriented_spectrum, [1.0, 2.0 + 1.0j], delta_hint)
    assert list(frame.columns) == ["re_s", "im_s", "re_log_z", "im_log_z", "tail_bound"]
    assert frame["im_s"].tolist() == [0.0, 1.0]


def test_half_plane_constant(oriented_spectrum, delta_hint):
    hp = find_zeta_half_plane_constant(oriented_spectrum, delta_hint, z_samples=np.linspace(0.0, 20.0, 21))
    assert hp is not None
    assert hp.abscissa == 1
    assert hp.min_real_part > 0.5


def test_funnel_zeros_are_double():
    zeros = funnel_zero_lattice(3.0, k_max=1, m_max=3)
    assert len(zeros) == 2 * 7
    for fz in zeros:
        assert fz.order == 2
        assert fz.modulus < 1e-8


def test_funnel_zeta_prefactor_and_phase():
    ell = 4.0
    zv = zeta_funnel(0.5 + 2.0j, ell)
    assert zv.log_value.imag == pytest.approx(-2.0 * ell / 4.0 + float(funnel_phase(2.0, ell)[0]), abs=1e-12)
    with pytest.raises(ValueError):
        zeta_funnel(1.0, 0.0)


def test_envelope_exponent_of_power_law():
    z = np.linspace(1.0, 100.0, 400)
    fit = envelope_exponent(z, 3.0 * z**1.5 * np.cos(z) ** 2)
    assert fit.exponent == pytest.approx(1.5, abs=0.05)
    clean = envelope_exponent(z, 3.0 * z**1.5)
    assert clean.exponent == pytest.approx(1.5, abs=1e-10)
    assert clean.constant == pytest.approx(3.0, rel=1e-8)


def test_envelope_exponent_floor_and_guards():
    z = np.linspace(1.0, 10.0, 50)
    flat = envelope_exponent(z, np.zeros_like(z))
    assert flat.at_floor
    assert flat.exponent == -math.inf
    with pytest.raises(EstimationError):
        envelope_exponent(z[:10], z[:10])
    with pytest.raises(EstimationError):
        envelope_exponent(np.linspace(0.0, 1.0, 50), z)
