from __future__ import annotations

import pytest

from hyperbolic_scattering.contour import ComplexBox
from hyperbolic_scattering.continuation import (
    Resonance,
    ResonanceSet,
    build_discretization,
    count_hypothesis_window,
    count_log_window,
    determinant,
    find_resonances,
    find_resonances_parallel,
    fit_window_exponent,
    leading_resonance,
    orientation_check,
)
from hyperbolic_scattering.errors import CoverageError, EstimationError, ResolutionError
from hyperbolic_scattering.zeta import zeta_euler


def _hint(est):
    return est.delta + est.uncertainty


def test_determinant_matches_euler_product(three_funnel_disc, oriented_spectrum, three_funnel_delta):
    for s in (1.0 + 0.0j, 1.0 + 2.0j, 1.2 - 7.0j):
        euler = zeta_euler(s, oriented_spectrum, _hint(three_funnel_delta), strict=False).value
        assert determinant(s, three_funnel_disc) == pytest.approx(euler, rel=1e-6)


def test_leading_zero_is_the_dimension(three_funnel_disc, three_funnel_delta):
    assert leading_resonance(three_funnel_disc) == pytest.approx(three_funnel_delta.delta, abs=1e-3)


def test_determinant_counts_oriented_geodesics(
    three_funnel_disc, oriented_spectrum, unoriented_spectrum, three_funnel_delta
):
    check = orientation_check(three_funnel_disc, oriented_spectrum, unoriented_spectrum, _hint(three_funnel_delta))
    assert check.convention == "oriented"
    assert check.spread_oriented < check.spread_unoriented


def test_resonance_search_finds_the_leading_zero(three_funnel_disc, three_funnel_delta):
    d = three_funnel_delta.delta
    box = ComplexBox(d - 0.05, d + 0.05, -0.05, 0.0613)
    found = find_resonances(box, three_funnel_disc)
    assert len(found) == 1
    (res,) = found.resonances
    assert res.multiplicity == 1
    assert res.s.real == pytest.approx(d, abs=1e-3)
    assert abs(res.s.imag) < 1e-8
    assert found.covers(box)


def test_parallel_strips_agree(three_funnel_disc, three_funnel_delta):
    d = three_funnel_delta.delta
    box = ComplexBox(d - 0.05, d + 0.05, -0.05, 0.0613)
    merged = find_resonances_parallel(box, three_funnel_disc, strips=2, workers=1)
    assert merged.total_multiplicity == 1
    assert merged.resonances[0].s == pytest.approx(find_resonances(box, three_funnel_disc).resonances[0].s, abs=1e-9)


def test_mesh_doubling_guard(three_funnel):
    with pytest.raises(ValueError):
        build_discretization(three_funnel, 3)
    coarse = build_discretization(three_funnel, 4, resolution_tol=1e-15)
    with pytest.raises(ResolutionError):
        determinant(-1.0 + 5.0j, coarse)


def test_resonance_frequency_coordinate():
    r = Resonance(0.5 + 3.0j, 1, 0.0)
    assert r.z == pytest.approx(3.0)
    assert r.conjugate().s == 0.5 - 3.0j


def _synthetic(boxes):
    rhos = [10.0 + 0.5j, 10.0 + 5.0j, 20.0 + 0.2j]
    res = [Resonance(0.5 + 1j * rho, 2 if k == 0 else 1, 0.0) for k, rho in enumerate(rhos)]
    return ResonanceSet(res, boxes, "synthetic")


def test_window_counts_on_synthetic_set():
    rs = _synthetic([ComplexBox(-6.0, 4.0, -30.0, 30.0)])
    assert count_log_window(rs, 10.0, 1.0) == 2
    assert count_hypothesis_window(rs, 10.0, 1.0) == 2
    assert count_hypothesis_window(rs, 20.0, 1.0) == 1
    frame = rs.to_frame()
    assert list(frame.columns) == ["Re_lambda", "Im_lambda", "Re_z", "Im_z", "multiplicity", "residual"]


def test_window_counts_refuse_uncovered_regions():
    rs = _synthetic([ComplexBox(-1.0, 0.5, -5.0, 5.0)])
    with pytest.raises(CoverageError):
        count_log_window(rs, 10.0, 1.0)
    with pytest.raises(ValueError):
        count_hypothesis_window(rs, 1.0, 1.0)


def test_window_exponent_fit():
    z = [10.0, 20.0, 40.0, 80.0]
    fit = fit_window_exponent(z, [30, 60, 120, 240])
    assert fit.alpha == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 4
    with pytest.raises(EstimationError):
        fit_window_exponent(z, [0, 0, 5, 7])
