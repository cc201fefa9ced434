import numpy as np
import pytest

from twistcorr import gallery
from twistcorr.atlas import (AtlasData, apply_atlas_gauge, atlas_from_correspondence, atlases_equivalent,
                             chart_labels, derived_cocycle, is_diagonalizing, is_normalizing, perturb_atlas,
                             range_map_from_atlas, unitarity_report)
from twistcorr.bundle import reassemble
from twistcorr.cartan import (cartan_from_atlas, cartan_from_twisted, cartan_report, check_containment,
                              diagram_roundtrip_check, twisted_from_cartan)
from twistcorr.correspondence import correspondences_isomorphic, left_action_of, module_of
from twistcorr.errors import AmbiguousRange, ShapeMismatch

NAMES = ["circle-covers/2/2", "circle-covers/3/3", "circle-phases", "circle-two-points",
         "example-different-ranges/r1", "rp2-antipodal"]


@pytest.mark.parametrize("name", NAMES)
def test_atlas_of_correspondence_is_normalizing_and_diagonalizing(name):
    c = gallery.load(name).correspondence
    a = atlas_from_correspondence(c)
    assert unitarity_report(a)
    assert is_normalizing(a)
    assert is_diagonalizing(a, left_action_of(c))
    assert derived_cocycle(a).close_to(reassemble(c.covering, c.line), 1e-12)


@pytest.mark.parametrize("name", NAMES[:4])
def test_range_map_recovered_from_atlas(name):
    c = gallery.load(name).correspondence
    back = range_map_from_atlas(atlas_from_correspondence(c), left_action_of(c))
    assert correspondences_isomorphic(c, back) is not None


def test_perturbed_atlas_is_equivalent():
    c = gallery.load("circle-covers/3/2+1").correspondence
    phi = left_action_of(c)
    a = atlas_from_correspondence(c)
    b, r = perturb_atlas(a, np.random.default_rng(2))
    assert is_normalizing(b) and is_diagonalizing(b, phi)
    assert atlases_equivalent(a, b, phi, phi) is not None
    assert atlases_equivalent(a, apply_atlas_gauge(a, r), phi, phi) is not None


def test_rotated_frame_is_not_normalizing():
    c = gallery.load("circle-covers/2/1+1").correspondence
    a = atlas_from_correspondence(c)
    rot = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
    x = next(iter(a.base.overlap(0, 1)))
    frames = {i: dict(f) for i, f in a.frames.items()}
    frames[0][x] = frames[0][x] @ rot
    bad = AtlasData(a.base, a.degree, frames)
    assert unitarity_report(bad)
    assert not is_normalizing(bad)


def test_atlas_shape_checks():
    a = atlas_from_correspondence(gallery.load("circle-covers/2/2").correspondence)
    frames = {i: dict(f) for i, f in a.frames.items()}
    x = next(iter(frames[0]))
    frames[0][x] = np.eye(3)
    with pytest.raises(ShapeMismatch):
        AtlasData(a.base, a.degree, frames)


def test_ambiguous_range_threshold():
    c = gallery.load("circle-two-points").correspondence
    a = atlas_from_correspondence(c)
    with pytest.raises(AmbiguousRange):
        chart_labels(a, left_action_of(c), tau=1.5)


@pytest.mark.parametrize("name", NAMES[:4])
def test_cartan_round_trip(name):
    c = gallery.load(name).correspondence
    phi, module = left_action_of(c), module_of(c)
    direct = cartan_from_twisted(c)
    ok, res, _ = cartan_report(direct, module)
    assert ok and res < 1e-9
    assert check_containment(direct, phi) < 1e-9
    assert cartan_report(cartan_from_atlas(atlas_from_correspondence(c)), module)[0]
    assert correspondences_isomorphic(c, twisted_from_cartan(direct, module, phi)) is not None


@pytest.mark.parametrize("name", ["circle-covers/2/2", "circle-two-points"])
def test_diagram_commutes(name):
    report = diagram_roundtrip_check(gallery.load(name).correspondence)
    assert report.passed, report.render()
    assert len(report.legs) == 7
