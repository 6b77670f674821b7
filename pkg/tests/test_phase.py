from __future__ import annotations

import math

import numpy as np
import pytest

from hyperbolic_scattering.contour import ComplexBox
from hyperbolic_scattering.continuation import Resonance, ResonanceSet
from hyperbolic_scattering.errors import CoverageError, EstimationError, MethodNotApplicableError, RouteError
from hyperbolic_scattering.phase import (
    PhaseRoute,
    PhaseSample,
    breit_wigner_check,
    bump,
    exponent_chain_residual,
    gamma_ratio,
    probe_majorant,
    probe_sum_S,
    scattering_phase,
    weyl_fit,
    weyl_primitive,
    xi_exact_series,
)
from hyperbolic_scattering.phase.krein import gamma_ratio_reference
from hyperbolic_scattering.phase.probe import smooth_step
from hyperbolic_scattering.phase.scattering import functional_equation_residual, series_derivative_check
from hyperbolic_scattering.zeta import zeta_euler


@pytest.mark.parametrize("t", [0.05, 0.7, 3.0, 12.5])
def test_gamma_ratio_matches_gamma_functions(t):
    assert gamma_ratio(t) == pytest.approx(gamma_ratio_reference(t), rel=1e-12)


def test_gamma_ratio_is_for_surfaces_only():
    with pytest.raises(MethodNotApplicableError):
        gamma_ratio(1.0, n=2)


def test_weyl_primitive_asymptotics():
    assert weyl_primitive(10.0) == pytest.approx(-(50.0 - 1.0 / 24.0), abs=1e-9)
    both = weyl_primitive(np.array([-2.0, 2.0, 0.0]))
    assert both[0] == pytest.approx(-both[1])
    assert both[2] == 0.0


def test_bump_profile():
    assert smooth_step(0.5) == pytest.approx(0.5)
    vals = bump(np.array([0.0, 0.5, -0.5, 0.75, 1.0, -1.2]))
    assert vals[:3] == pytest.approx([1.0, 1.0, 1.0])
    assert 0.0 < vals[3] < 1.0
    assert vals[4] == 0.0 and vals[5] == 0.0


def test_probe_sum_is_dominated(unoriented_spectrum):
    bound = probe_majorant(20.0, unoriented_spectrum)
    assert bound > 0.0
    for t in (0.0, 1.3, 7.0, 40.0):
        assert abs(probe_sum_S(20.0, t, unoriented_spectrum)) <= bound * (1.0 + 1e-12)
    assert probe_sum_S(20.0, 0.0, unoriented_spectrum).real > 0.0
    with pytest.raises(CoverageError):
        probe_sum_S(40.0, 0.0, unoriented_spectrum)


def test_exact_series_satisfies_functional_equation(three_funnel, oriented_spectrum, three_funnel_delta):
    delta = three_funnel_delta.delta
    chi = three_funnel.euler_characteristic

    def zeta_at(s):
        return zeta_euler(s, oriented_spectrum, delta, strict=False).value

    for z in (0.7, 3.1, 9.4):
        xi = float(xi_exact_series(z, oriented_spectrum, chi, delta).xi[0])
        assert functional_equation_residual(z, xi, chi, zeta_at) < 1e-4


def test_exact_series_refused_above_half(oriented_spectrum):
    with pytest.raises(RouteError):
        xi_exact_series(1.0, oriented_spectrum, -1, 0.6)


def test_series_derivative_is_consistent(three_funnel, oriented_spectrum, three_funnel_delta):
    z = np.linspace(0.5, 10.0, 20)
    gap = series_derivative_check(z, oriented_spectrum, three_funnel.euler_characteristic, three_funnel_delta.delta)
    assert gap < 1e-6


def test_phase_routes_agree(three_funnel, oriented_spectrum, three_funnel_delta, three_funnel_disc):
    z = np.linspace(0.0, 5.0, 11)
    series = scattering_phase(z, three_funnel, PhaseRoute.EXACT_SERIES, spec=oriented_spectrum,
                              delta=three_funnel_delta.delta)
    contour = scattering_phase(z, three_funnel, PhaseRoute.ARGUMENT_INTEGRAL, disc=three_funnel_disc)
    assert contour.critical.multiplicity == 0
    assert series.s[0] == 0.0
    assert contour.s == pytest.approx(series.s, abs=1e-3)
    assert list(series.to_frame().columns) == ["z", "xi", "xi_F", "s", "ds_dz"]


def test_phase_grid_and_route_guards(three_funnel):
    with pytest.raises(ValueError):
        scattering_phase([2.0, 1.0], three_funnel, PhaseRoute.EXACT_SERIES)
    with pytest.raises(RouteError):
        scattering_phase([1.0], three_funnel, PhaseRoute.EXACT_SERIES)
    with pytest.raises(RouteError):
        scattering_phase([1.0], three_funnel, "argument_integral")


def _samples(z, s):
    return [PhaseSample(float(a), 0.0, 0.0, 0.0, float(b), 0.0, PhaseRoute.EXACT_SERIES) for a, b in zip(z, s)]


def test_weyl_fit_recovers_quadratic():
    z = np.linspace(0.0, 50.0, 1001)
    fit = weyl_fit(_samples(z, 0.5 * z**2 - 0.3), delta=0.1, volume=2.0 * math.pi)
    assert fit.leading_coefficient == pytest.approx(0.5, rel=1e-10)
    assert fit.constant == pytest.approx(-0.3, abs=1e-8)
    summary = fit.summary()
    assert summary["relative_error"] < 1e-10
    assert summary["remainder_at_floor"] is True


def test_weyl_fit_guards():
    z = np.linspace(0.1, 5.0, 50)
    with pytest.raises(EstimationError):
        weyl_fit(_samples(z, z**2), delta=0.1)
    z = np.linspace(5.0, 20.0, 200)
    with pytest.raises(EstimationError):
        weyl_fit(_samples(z, z**2), delta=0.1)


def test_exponent_chain_residual():
    assert exponent_chain_residual(0.8, -0.2, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert exponent_chain_residual(1.5, -0.5, 1.0) == pytest.approx(1.0)


def _bw_set(boxes):
    rho = 7.0 + 0.4j
    return ResonanceSet([Resonance(0.5 + 1j * rho, 1, 0.0)], boxes, "synthetic")


def test_breit_wigner_linear_reading_on_synthetic_data():
    volume = 2.0 * math.pi
    rho = 7.0 + 0.4j
    z = np.linspace(5.0, 9.0, 121)
    ds = volume * z / (2.0 * math.pi) + rho.imag / (math.pi * np.abs(z - rho) ** 2)
    report = breit_wigner_check((6.0, 8.0), _bw_set([ComplexBox(-2.0, 1.0, -10.0, 10.0)]), 1.0, z, ds, volume)
    assert report.resonance_count == 1
    assert report.linear_fit.at_floor
    assert np.max(np.abs(report.quadratic_residual)) > 1.0
    out = report.to_dict()
    assert out["linear_reading"]["max_abs_residual"] < 1e-12
    assert "log_derivative_check" not in out


def test_breit_wigner_needs_complete_resonance_list():
    z = np.linspace(5.0, 9.0, 121)
    with pytest.raises(CoverageError):
        breit_wigner_check((6.0, 8.0), _bw_set([ComplexBox(-0.5, 1.0, -10.0, 10.0)]), 1.0, z, z, 2.0 * math.pi)
