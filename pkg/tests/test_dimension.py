from __future__ import annotations

import numpy as np
import pytest

from hyperbolic_scattering.dimension import DimensionMethod, delta_poincare, delta_refinement
from hyperbolic_scattering.errors import MethodNotApplicableError, ResourceBudgetError
from hyperbolic_scattering.linalg import perron_root


def test_perron_root_of_small_matrices():
    rho, vec = perron_root(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert rho == pytest.approx(3.0, rel=1e-10)
    assert vec == pytest.approx([0.5, 0.5], rel=1e-8)
    # imprimitive: eigenvalues +1 and -1
    rho, _ = perron_root(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert rho == pytest.approx(1.0, rel=1e-10)


def test_refinement_on_thin_surface(three_funnel_delta):
    assert three_funnel_delta.method is DimensionMethod.REFINEMENT
    assert 0.0 < three_funnel_delta.delta < 0.5
    assert three_funnel_delta.uncertainty < 1e-3


def test_refinement_on_thick_surface(thick):
    est = delta_refinement(thick, refinement_depth=8)
    assert 0.5 < est.delta < 1.0


def test_methods_agree(three_funnel, three_funnel_delta):
    est = delta_poincare(three_funnel, word_cutoff=10)
    assert est.method is DimensionMethod.POINCARE
    assert abs(est.delta - three_funnel_delta.delta) < 0.05
    assert abs(est.diagnostics["delta_second_base_point"] - est.delta) < 0.05


def test_dimension_decreases_with_funnel_length(three_funnel_delta, thick):
    assert delta_refinement(thick, refinement_depth=8).delta > three_funnel_delta.delta


def test_poincare_rejects_short_cutoff(three_funnel):
    with pytest.raises(ValueError):
        delta_poincare(three_funnel, word_cutoff=5)


def test_refinement_needs_two_generators(cylinder):
    with pytest.raises(MethodNotApplicableError):
        delta_refinement(cylinder)


def test_refinement_budget(three_funnel):
    with pytest.raises(ResourceBudgetError):
        delta_refinement(three_funnel, max_cells=10)
    capped = delta_refinement(three_funnel, refinement_depth=12, max_cells=4 * 3**5)
    assert capped.diagnostics["depth"] == 6
