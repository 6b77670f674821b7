from __future__ import annotations

import math

import numpy as np
import orjson
import pytest

from hyperbolic_scattering.errors import ClassificationError, SurfaceError
from hyperbolic_scattering.geometry import (
    MoebiusMap,
    PairedDisks,
    bundled_surface,
    compose,
    conjugate_surface,
    hyperbolic_distance,
    list_bundled,
    resolve_surface,
    surface_from_generators,
    symmetric_surface,
    translation_length,
    validate_schottky,
)
from hyperbolic_scattering.geometry.moebius import to_disk, to_half_plane
from hyperbolic_scattering.geometry.surface_io import parse_surface
from hyperbolic_scattering.geometry.words import (
    canonical,
    cyclically_reduce,
    is_primitive,
    parse_word,
    reduce_word,
    reduced_words,
    word_length,
    word_matrix,
    word_to_str,
)


def test_from_matrix_normalizes_to_unit_determinant_and_positive_trace():
    g = MoebiusMap.from_matrix([[-4.0, 0.0], [0.0, -1.0]])
    assert g.determinant == pytest.approx(1.0)
    assert g.trace > 0.0
    assert g(1j) == pytest.approx(4j)


def test_compose_with_inverse_is_identity():
    g = MoebiusMap.from_matrix([[2.0, 1.0], [1.0, 1.0]])
    e = compose(g, g.inverse())
    assert [e.a, e.b, e.c, e.d] == pytest.approx([1.0, 0.0, 0.0, 1.0], abs=1e-14)


def test_dilation_fixed_points_and_length():
    g = MoebiusMap.dilation(3.0)
    assert g.fixed_points() == (0.0, math.inf)
    assert translation_length(g) == pytest.approx(3.0, rel=1e-14)


def test_elliptic_map_has_no_length():
    rot = MoebiusMap(0.0, -1.0, 1.0, 0.0)
    with pytest.raises(ClassificationError):
        translation_length(rot)
    with pytest.raises(ClassificationError):
        rot.fixed_points()


def test_distance_along_imaginary_axis():
    assert hyperbolic_distance(1j, math.exp(2.0) * 1j) == pytest.approx(2.0, rel=1e-14)


def test_cayley_maps_are_inverse():
    w = 0.3 + 2.0j
    assert to_disk(1j) == pytest.approx(0.0)
    assert to_half_plane(to_disk(w)) == pytest.approx(w)


def test_word_reduction_and_names():
    assert reduce_word((1, -1, 2, 2, -2)) == (2,)
    assert cyclically_reduce((1, 2, -1)) == (2,)
    assert word_to_str((1, -2)) == "aB"
    assert parse_word("aB", 2) == (1, -2)
    with pytest.raises(ValueError):
        parse_word("ac", 2)


def test_reduced_word_count():
    for n in (1, 2, 3, 4):
        assert sum(1 for _ in reduced_words(2, n)) == 4 * 3 ** (n - 1)


def test_canonical_identifies_rotations_and_reversal():
    assert canonical((2, 1)) == canonical((1, 2))
    assert canonical((1, 2)) == canonical((-2, -1))
    assert canonical((1, 2), oriented=True) != canonical((-2, -1), oriented=True)
    assert not is_primitive((1, 2, 1, 2))
    assert is_primitive((1, 1, 2))


def test_symmetric_surface_realizes_funnel_lengths():
    s = symmetric_surface(2, [9.0, 10.0, 10.0])
    assert validate_schottky(s).ok
    assert s.funnel_lengths == pytest.approx((9.0, 10.0, 10.0), rel=1e-9)
    assert s.euler_characteristic == -1
    assert s.volume == pytest.approx(2.0 * math.pi)


def test_boundary_words_have_funnel_lengths(three_funnel):
    for w, ell in zip(three_funnel.boundary_words, three_funnel.funnel_lengths):
        assert translation_length(word_matrix(w, three_funnel.generators)) == pytest.approx(ell, rel=1e-12)


def test_extended_precision_agrees_on_long_words(three_funnel):
    w = (1, 2) * 6
    fast = word_length(w, three_funnel.generators, extended_after=100)
    slow = word_length(w, three_funnel.generators, extended_after=2)
    assert fast == pytest.approx(slow, rel=1e-10)


def test_bundled_examples_are_valid():
    names = list_bundled()
    assert {"cylinder", "three_funnel", "three_funnel_thick", "four_funnel", "translated_pair"} <= set(names)
    for name in names:
        s = bundled_surface(name)
        assert validate_schottky(s).ok, name


def test_rank_one_recipe_has_one_geodesic(cylinder):
    assert cylinder.rank == 1
    assert translation_length(cylinder.generators[0]) == pytest.approx(3.0, rel=1e-12)


def test_conjugation_preserves_lengths(three_funnel):
    h = MoebiusMap.from_matrix([[1.0, 0.25], [0.0, 1.0]])
    c = conjugate_surface(three_funnel, h)
    assert validate_schottky(c).ok
    for g0, g1 in zip(three_funnel.generators, c.generators):
        assert translation_length(g1) == pytest.approx(translation_length(g0), rel=1e-12)


def test_elliptic_generator_fails_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_bytes(orjson.dumps({"name": "bad", "generators": [[[0.0, -1.0], [1.0, 0.0]]]}))
    with pytest.raises(SurfaceError) as exc:
        resolve_surface(path)
    assert exc.value.report is not None
    assert not exc.value.report.ok


def test_schema_violation_is_surface_error(tmp_path):
    path = tmp_path / "both.toml"
    path.write_text(
        'generators = [[[2.0, 0.0], [0.0, 0.5]]]\n[recipe]\nrank = 1\nfunnel_lengths = 3.0\n', encoding="utf-8"
    )
    with pytest.raises(SurfaceError):
        resolve_surface(path)


def test_unknown_bundled_name():
    with pytest.raises(SurfaceError):
        resolve_surface("no_such_surface")


def test_fingerprint_is_stable(three_funnel):
    again = bundled_surface("three_funnel")
    assert again.fingerprint() == three_funnel.fingerprint()
    assert symmetric_surface(2, 9.0).fingerprint() != three_funnel.fingerprint()


def _random_map(rng: np.random.Generator) -> MoebiusMap:
    while True:
        m = rng.uniform(-2.0, 2.0, size=(2, 2))
        det = np.linalg.det(m)
        if abs(det) > 0.5:
            break
    if det < 0.0:
        m[:, 0] = -m[:, 0]
    return MoebiusMap.from_matrix(m)


def _projective_gap(f: MoebiusMap, g: MoebiusMap) -> float:
    return float(min(np.max(np.abs(f.matrix - g.matrix)), np.max(np.abs(f.matrix + g.matrix))))


def test_compose_is_associative():
    rng = np.random.default_rng(11)
    for _ in range(200):
        f, g, h = _random_map(rng), _random_map(rng), _random_map(rng)
        left = compose(compose(f, g), h)
        right = compose(f, compose(g, h))
        scale = max(1.0, float(np.max(np.abs(left.matrix))))
        assert _projective_gap(left, right) <= 1e-12 * scale


def test_compose_acts_as_g_then_f():
    rng = np.random.default_rng(12)
    for _ in range(200):
        f, g = _random_map(rng), _random_map(rng)
        p = complex(rng.uniform(-3.0, 3.0), rng.uniform(0.1, 3.0))
        assert compose(f, g)(p) == pytest.approx(f(g(p)), rel=1e-12, abs=1e-12)


def test_trace_is_invariant_under_inverse_and_conjugation():
    rng = np.random.default_rng(13)
    for _ in range(200):
        g, h = _random_map(rng), _random_map(rng)
        assert abs(g.inverse().trace) == pytest.approx(abs(g.trace), rel=1e-12, abs=1e-12)
        assert abs(g.conjugate_by(h).trace) == pytest.approx(abs(g.trace), rel=1e-12, abs=1e-12)


def test_translation_length_is_additive_over_powers():
    rng = np.random.default_rng(14)
    for _ in range(50):
        shift = MoebiusMap(1.0, rng.uniform(-0.5, 0.5), 0.0, 1.0)
        h = compose(MoebiusMap.rotation(rng.uniform(0.0, 2.0 * math.pi)), shift)
        g = MoebiusMap.dilation(rng.uniform(0.3, 0.8)).conjugate_by(h)
        ell = translation_length(g)
        for n in range(1, 9):
            assert translation_length(g.power(n)) == pytest.approx(n * ell, rel=1e-10)
            assert translation_length(g.power(-n)) == pytest.approx(n * ell, rel=1e-10)


def test_canonical_is_idempotent_and_rotation_invariant():
    rng = np.random.default_rng(15)
    for length in range(1, 9):
        words = list(reduced_words(2, length))
        for k in rng.choice(len(words), size=min(40, len(words)), replace=False):
            w = cyclically_reduce(words[int(k)])
            if not w:
                continue
            for oriented in (False, True):
                c = canonical(w, oriented=oriented)
                assert canonical(c, oriented=oriented) == c
                turned = w[1:] + w[:1]
                assert canonical(turned, oriented=oriented) == c


def test_overlapping_disks_fail_validation(three_funnel):
    disks = three_funnel.disks
    clash = PairedDisks((disks.target[0],) + disks.source[1:], disks.target)
    s = surface_from_generators(three_funnel.generators, disks=clash, name="overlap")
    report = validate_schottky(s)
    assert not report.ok
    check = next(c for c in report.checks if c.name == "disks_disjoint")
    assert not check.passed
    assert "disks intersect" in check.detail


def test_dilation_rank_one_validates():
    s = surface_from_generators([MoebiusMap.dilation(3.0)], name="dilation")
    assert validate_schottky(s).ok
    assert s.rank == 1
    assert s.funnel_lengths == pytest.approx((3.0, 3.0), rel=1e-12)
    assert "general_position_rotation" in s.metadata

    w = 2.0 * math.atan(math.exp(-1.5))
    data = {
        "name": "dilation-disk",
        "model": "disk",
        "generators": [[[math.exp(1.5), 0.0], [0.0, math.exp(-1.5)]]],
        "disks": [{"source": {"center": math.pi, "radius": w}, "target": {"center": 0.0, "radius": w}}],
    }
    s = parse_surface(data)
    assert validate_schottky(s).ok
    assert s.funnel_lengths == pytest.approx((3.0, 3.0), rel=1e-12)
    assert translation_length(s.generators[0]) == pytest.approx(3.0, rel=1e-12)


def test_general_position_is_skipped_when_infinity_is_free(three_funnel):
    s = surface_from_generators(three_funnel.generators, name="isometric")
    assert "general_position_rotation" not in s.metadata
    assert s.generators == three_funnel.generators
