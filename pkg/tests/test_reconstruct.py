import pytest

from twistcorr import gallery
from twistcorr.bundle import coverings_isomorphic
from twistcorr.correspondence import correspondences_isomorphic
from twistcorr.errors import NotConstantRank
from twistcorr.reconstruct import (constant_rank_iso_check, double_commutant_spectrum, generated_subalgebra_spectrum,
                                   locally_conjugate, reconstruct_from_spectrum, spectra_iso_iota_phi,
                                   spectrum_covering)


@pytest.mark.parametrize("name", ["circle-two-points", "example-different-ranges/r1", "example-different-ranges/r2"])
def test_unbranched_spectrum_reconstructs(name):
    c = gallery.load(name).correspondence
    s = double_commutant_spectrum(c)
    assert s.is_constant() and s.branch_set() == frozenset()
    assert coverings_isomorphic(spectrum_covering(s), c.covering) is not None
    assert correspondences_isomorphic(c, reconstruct_from_spectrum(c, s)) is not None


def test_point_target_glues_all_sheets():
    c = gallery.load("circle-covers/3/2+1").correspondence
    s = double_commutant_spectrum(c)
    assert set(s.fiber_counts().values()) == {1}
    assert all(s.multiplicity[v] == 3 for v in s.vertices)


def test_generated_spectrum_glues_equal_ranges():
    c = gallery.load("trivial-covering-ranks/r1").correspondence
    s = generated_subalgebra_spectrum(c)
    assert sum(s.multiplicity[v] for v in s.fibers[c.source.vertices[0]]) == c.degree


def test_different_range_maps_give_different_spectra():
    a = double_commutant_spectrum(gallery.load("example-different-ranges/r1").correspondence)
    b = double_commutant_spectrum(gallery.load("example-different-ranges/r2").correspondence)
    assert spectra_iso_iota_phi(a, a) is not None
    assert spectra_iso_iota_phi(a, b) is None


def test_constant_rank_check_on_circle_covers():
    a = gallery.load("circle-covers/2/2").correspondence
    verdict = constant_rank_iso_check(a, a)
    assert verdict.isomorphic and verdict.label == "isomorphic"
    b = gallery.load("circle-covers/2/1+1").correspondence
    assert locally_conjugate(a, b)[0]


def test_constant_rank_check_refuses_branching():
    a = gallery.load("plateau-example/r1").correspondence
    b = gallery.load("plateau-example/r2").correspondence
    with pytest.raises(NotConstantRank):
        constant_rank_iso_check(a, b)
    with pytest.raises(ValueError):
        constant_rank_iso_check(a, b, algebra="other")
