from __future__ import annotations

import numpy as np
import pytest

from hyperbolic_scattering.errors import EstimationError, ResourceBudgetError
from hyperbolic_scattering.spectrum import (
    Orientation,
    counting_exponent,
    enumerate_geodesics,
    naive_enumeration,
)
from hyperbolic_scattering.spectrum.store import find_cached, list_spectra, load_spectrum, save_spectrum, spectrum_key


def test_pruned_enumeration_matches_exhaustive_oracle(three_funnel, unoriented_spectrum):
    naive = naive_enumeration(three_funnel, 6)
    cutoff = unoriented_spectrum.cutoff
    expected = {g.word for g in naive.entries if g.length <= cutoff}
    got = {g.word for g in unoriented_spectrum.entries if g.word_length <= 6}
    assert got == expected


def test_spectrum_sorted_and_within_cutoff(unoriented_spectrum):
    lengths = unoriented_spectrum.lengths
    assert np.all(np.diff(lengths) >= 0.0)
    assert lengths[-1] <= unoriented_spectrum.cutoff
    assert unoriented_spectrum.certificate is not None
    assert unoriented_spectrum.certificate.word_length_bound >= max(g.word_length for g in unoriented_spectrum.entries)


def test_funnel_boundaries_are_the_shortest_geodesics(three_funnel, unoriented_spectrum):
    assert unoriented_spectrum.shortest == pytest.approx(min(three_funnel.funnel_lengths), rel=1e-10)
    # three boundary classes, all of length 10
    assert unoriented_spectrum.counting_function(10.0 + 1e-6) == 3


def test_oriented_count_doubles_reversible_classes(oriented_spectrum, unoriented_spectrum):
    n_u, n_o = len(unoriented_spectrum), len(oriented_spectrum)
    assert n_u <= n_o <= 2 * n_u
    assert oriented_spectrum.counting_function(10.0 + 1e-6) == 6


def test_workers_do_not_change_the_spectrum(three_funnel):
    one = enumerate_geodesics(three_funnel, 25.0, workers=1)
    two = enumerate_geodesics(three_funnel, 25.0, workers=2)
    assert [g.word for g in one.entries] == [g.word for g in two.entries]
    assert np.array_equal(one.lengths, two.lengths)


def test_truncate_keeps_prefix(unoriented_spectrum):
    short = unoriented_spectrum.truncate(20.0)
    assert short.cutoff == 20.0
    assert len(short) == unoriented_spectrum.counting_function(20.0)
    with pytest.raises(ValueError):
        short.truncate(30.0)


def test_budget_gate_fires_before_enumeration(three_funnel):
    with pytest.raises(ResourceBudgetError):
        enumerate_geodesics(three_funnel, 1e4)


def test_cylinder_has_a_single_class(cylinder):
    spec = enumerate_geodesics(cylinder, 10.0)
    assert len(spec) == 1
    assert spec.shortest == pytest.approx(3.0, rel=1e-12)
    assert len(enumerate_geodesics(cylinder, 10.0, Orientation.ORIENTED)) == 2
    assert counting_exponent(spec).exponent == 0.0


def test_counting_exponent_needs_enough_entries(unoriented_spectrum):
    with pytest.raises(EstimationError):
        counting_exponent(unoriented_spectrum, min_entries=len(unoriented_spectrum) + 1)


def test_to_frame_columns(unoriented_spectrum):
    frame = unoriented_spectrum.to_frame()
    assert list(frame.columns) == ["canonical_word", "word_length", "trace", "length"]
    assert len(frame) == len(unoriented_spectrum)


def test_store_roundtrip_and_lookup(tmp_path, unoriented_spectrum):
    cache = tmp_path / "spectra"
    save_spectrum(unoriented_spectrum, cache)
    key = spectrum_key(unoriented_spectrum.surface_fingerprint, unoriented_spectrum.cutoff, "unoriented")
    assert [i.key for i in list_spectra(cache)] == [key]

    loaded = load_spectrum(cache, key)
    assert loaded.words() == unoriented_spectrum.words()

    shorter = find_cached(cache, unoriented_spectrum.surface_fingerprint, 20.0, Orientation.UNORIENTED)
    assert shorter is not None and shorter.cutoff == 20.0
    assert find_cached(cache, unoriented_spectrum.surface_fingerprint, 50.0, Orientation.UNORIENTED) is None
    assert find_cached(cache, unoriented_spectrum.surface_fingerprint, 20.0, Orientation.ORIENTED) is None


def test_load_missing_spectrum(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_spectrum(tmp_path, "nothing_here")
