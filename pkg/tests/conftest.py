from __future__ import annotations

import pytest

from hyperbolic_scattering.geometry import bundled_surface
from hyperbolic_scattering.spectrum import Orientation, enumerate_geodesics

SPECTRUM_CUTOFF = 35.0


@pytest.fixture(autouse=True)
def _isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setenv("HSP_SPECTRUM_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setenv("HSP_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("HSP_WORKERS", "1")


@pytest.fixture(scope="session")
def three_funnel():
    return bundled_surface("three_funnel")


@pytest.fixture(scope="session")
def thick():
    return bundled_surface("three_funnel_thick")


@pytest.fixture(scope="session")
def cylinder():
    return bundled_surface("cylinder")


@pytest.fixture(scope="session")
def oriented_spectrum(three_funnel):
    return enumerate_geodesics(three_funnel, SPECTRUM_CUTOFF, Orientation.ORIENTED, workers=1)


@pytest.fixture(scope="session")
def unoriented_spectrum(three_funnel):
    return enumerate_geodesics(three_funnel, SPECTRUM_CUTOFF, Orientation.UNORIENTED, workers=1)


@pytest.fixture(scope="session")
def three_funnel_delta(three_funnel):
    from hyperbolic_scattering.dimension import delta_refinement

    return delta_refinement(three_funnel)


@pytest.fixture(scope="session")
def three_funnel_disc(three_funnel, oriented_spectrum, three_funnel_delta):
    from hyperbolic_scattering.continuation import build_discretization, calibrate

    disc = build_discretization(three_funnel, 24)
    return calibrate(disc, oriented_spectrum, three_funnel_delta.delta + three_funnel_delta.uncertainty)
