from __future__ import annotations

import math

import numpy as np
import pytest

from hyperbolic_scattering.dynamics import (
    EscapeEstimate,
    FlowState,
    axis_state,
    convex_core,
    exponent_chain,
    flow,
    frame_from,
    lambda_max_estimate,
    pressure_from_escape,
    reverse,
    sample_liouville,
    trapped_fraction,
    universal_cover_flow,
)
from hyperbolic_scattering.dynamics.core import Frames
from hyperbolic_scattering.dynamics.escape import fit_escape_rate, jacobi_growth, jacobi_propagator, survival_curve
from hyperbolic_scattering.errors import EstimationError, PrecisionError
from hyperbolic_scattering.geometry import compose, translation_length

TIMES = np.arange(0.0, 12.0 + 1e-9, 0.25)


@pytest.fixture(scope="module")
def thick_escape(thick):
    return trapped_fraction(thick, TIMES, n_samples=10_000, seed=11, workers=1)


def test_frame_from_places_position_and_direction():
    st = FlowState(frame_from(0.3 + 2.0j, 1.0 + 1.0j))
    assert st.position == pytest.approx(0.3 + 2.0j, abs=1e-12)
    assert np.angle(st.direction) == pytest.approx(np.angle(1.0 + 1.0j), abs=1e-12)
    assert st.direction_norm == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        frame_from(-1.0j, 1.0)


def test_closed_geodesic_returns_after_one_period(three_funnel):
    g = three_funnel.generators[0]
    st = axis_state(g, three_funnel)
    back = flow(st, translation_length(g), three_funnel)
    assert back.position == pytest.approx(st.position, abs=1e-8)
    assert back.direction == pytest.approx(st.direction, abs=1e-8)


def test_flow_is_reversible(three_funnel):
    st = FlowState(frame_from(three_funnel.base_point, 1.0 + 0.3j))
    there = flow(st, 7.5, three_funnel)
    assert there.direction_norm == pytest.approx(1.0, rel=1e-9)
    again = flow(there, -7.5, three_funnel)
    assert again.position == pytest.approx(st.position, abs=1e-8)
    twice = reverse(reverse(there))
    assert twice.position == pytest.approx(there.position)


def test_reduced_flow_lifts_to_the_cover(three_funnel):
    st = FlowState(frame_from(three_funnel.base_point, -0.4 + 1.0j))
    for t in (0.5, 3.0, 9.0):
        reduced = flow(st, t, three_funnel)
        lifted = FlowState(compose(reduced.word_history, reduced.frame))
        cover = universal_cover_flow(st, t)
        assert lifted.position == pytest.approx(cover.position, rel=1e-8)
        assert lifted.direction == pytest.approx(cover.direction, rel=1e-8)


def test_liouville_sample_is_reproducible(thick):
    core = convex_core(thick)
    one, eff = sample_liouville(core, 10_000, seed=5, workers=1)
    two, _ = sample_liouville(core, 10_000, seed=5, workers=2)
    other, _ = sample_liouville(core, 10_000, seed=6, workers=1)
    assert len(one) == 10_000
    assert 0.0 < eff <= 1.0
    assert np.array_equal(one.a, two.a) and np.array_equal(one.d, two.d)
    assert not np.array_equal(one.a, other.a)
    assert np.all(core.contains(one.position()))
    assert core.area == pytest.approx(thick.volume)


def test_collar_core_for_a_cylinder(cylinder):
    core = convex_core(cylinder, collar=1.0)
    assert core.area == pytest.approx(2.0 * 3.0 * math.sinh(1.0), rel=1e-12)
    frames, eff = sample_liouville(core, 10_000, seed=1)
    assert eff == 1.0
    # samples are drawn in axis coordinates
    w = frames.position()
    assert np.all(np.abs(w.real) <= math.sinh(1.0) * w.imag * (1.0 + 1e-12))
    exits = core.exit_times(frames, 50.0)
    assert np.all(exits >= 0.0)


def test_survival_counts_exit_at_or_after_t():
    frac, err = survival_curve(np.array([0.5, 1.0, 2.0, np.inf]), np.array([0.0, 1.0, 3.0]))
    assert frac.tolist() == [1.0, 0.75, 0.25]
    assert err[0] == 0.0


def test_escape_rate_fit_on_exact_exponential():
    t = np.linspace(0.0, 20.0, 81)
    rate, (lo, hi), used = fit_escape_rate(t, 0.5 * np.exp(-0.4 * t), 1_000_000)
    assert rate == pytest.approx(-0.4, abs=1e-10)
    assert lo <= -0.4 <= hi
    assert used >= 3
    with pytest.raises(EstimationError):
        fit_escape_rate(t, np.ones_like(t), 1_000_000)


def test_trapped_fraction_on_thick_surface(thick_escape):
    frac = thick_escape.trapped_fractions
    assert frac[0] == 1.0
    assert np.all(np.diff(frac) <= 0.0)
    assert thick_escape.fitted_rate < 0.0
    assert thick_escape.sample_count == 10_000
    assert list(thick_escape.to_frame().columns) == ["t", "fraction", "stderr"]
    assert set(thick_escape.summary()) >= {"fitted_rate", "confidence_interval", "sampling_efficiency"}


def test_trapped_fraction_guards(thick):
    with pytest.raises(ValueError):
        trapped_fraction(thick, TIMES, n_samples=500, seed=1)
    with pytest.raises(ValueError):
        trapped_fraction(thick, [0.0, 2.0, 1.0], n_samples=10_000, seed=1)


def test_pressure_needs_a_tight_interval():
    est = EscapeEstimate(TIMES, np.ones_like(TIMES), np.zeros_like(TIMES), 10_000, -0.4, (-0.5, -0.3))
    with pytest.raises(PrecisionError):
        pressure_from_escape(est)
    tight = EscapeEstimate(TIMES, np.ones_like(TIMES), np.zeros_like(TIMES), 10_000, -0.4, (-0.42, -0.38))
    assert pressure_from_escape(tight) == -0.4


def test_jacobi_propagator_norm_is_exp_t():
    for t in (0.5, 4.0, 15.0):
        assert np.linalg.norm(jacobi_propagator(t), ord=2) == pytest.approx(math.exp(t), rel=1e-12)


def test_direction_angle_inverts_from_points():
    angle = np.linspace(-3.0, 3.0, 13)
    frames = Frames.from_points(np.full(13, 0.3), np.full(13, 2.0), angle)
    assert np.allclose(frames.direction_angle(), angle, atol=1e-12)


def test_jacobi_growth_depends_on_the_frame(thick):
    frames, _ = sample_liouville(convex_core(thick), 10_000, seed=2, workers=1)
    growth = jacobi_growth(frames, 10.0)
    assert np.all(growth <= math.exp(10.0) * (1.0 + 1e-12))
    assert np.all(growth >= math.exp(-10.0) * (1.0 - 1e-12))
    assert np.ptp(growth) > 1.0


def test_lambda_max_estimate_is_one_and_stable_in_t(thick):
    short = lambda_max_estimate(thick, 10.0, 20_000, seed=3, workers=1)
    assert 0.95 <= short <= 1.0 + 1e-12
    long = lambda_max_estimate(thick, 20.0, 20_000, seed=3, workers=1)
    assert 0.95 <= long <= 1.0 + 1e-12
    assert abs(long - short) / short < 0.02
    with pytest.raises(ValueError):
        lambda_max_estimate(thick, 5.0, 20_000, seed=3)


def test_exponent_chain():
    assert exponent_chain(-0.3, 1.0) == pytest.approx(0.7)
    assert exponent_chain(-0.6, 2.0) == pytest.approx(0.7)
