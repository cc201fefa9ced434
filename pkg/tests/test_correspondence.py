import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcorr import gallery
from twistcorr.correspondence import (check_partition, correspondences_isomorphic, cstar_correspondences_isomorphic,
                                      default_partition, frame_sections, inner_product, left_action_of,
                                      reconstruct_section, right_multiply, transports, unitary_field_report)
from twistcorr.cartan import perturb_correspondence
from twistcorr.errors import BadPartition, ShapeMismatch

NAMES = ["circle-covers/2/2", "circle-covers/3/2+1", "circle-phases", "circle-two-points"]


@pytest.mark.parametrize("name", NAMES)
def test_left_action_is_partition_of_unity(name):
    assert left_action_of(gallery.load(name).correspondence).check() == []


@pytest.mark.parametrize("name", NAMES)
def test_transports_are_unitary_and_reverse(name):
    for (a, b), p in transports(gallery.load(name).correspondence).items():
        assert np.allclose(p.conj().T @ p, np.eye(len(p)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(NAMES))
def test_frame_reconstructs_every_section(seed, name):
    c = gallery.load(name).correspondence
    rng = np.random.default_rng(seed)
    eta = rng.normal(size=len(c.order)) + 1j * rng.normal(size=len(c.order))
    assert np.allclose(reconstruct_section(c, frame_sections(c), eta), eta)


def test_inner_product_is_module_linear():
    c = gallery.load("circle-covers/2/2").correspondence
    rng = np.random.default_rng(1)
    xi, eta = rng.normal(size=(2, len(c.order))) + 0j
    f = rng.normal(size=len(c.source.vertices))
    assert np.allclose(inner_product(c, xi, right_multiply(c, eta, f)), inner_product(c, xi, eta) * f)
    with pytest.raises(ShapeMismatch):
        inner_product(c, xi[:-1], eta)


def test_partition_validation():
    base = gallery.load("circle-covers/1/1").source
    w = default_partition(base)
    check_partition(base, w)
    w[0] = w[0] * 2
    with pytest.raises(BadPartition):
        check_partition(base, w)


def test_perturbed_copy_is_isomorphic_both_ways():
    c = gallery.load("circle-covers/3/2+1").correspondence
    p = perturb_correspondence(c, np.random.default_rng(4))
    assert correspondences_isomorphic(c, p) is not None
    field_ = cstar_correspondences_isomorphic(c, p)
    assert field_ is not None
    report = unitary_field_report(c, p, field_)
    assert report["max_jump"] <= 0.5


def test_different_covers_are_not_isomorphic():
    a = gallery.load("circle-covers/2/2").correspondence
    b = gallery.load("circle-covers/2/1+1").correspondence
    assert correspondences_isomorphic(a, b) is None


def test_range_map_must_respect_edges():
    c = gallery.load("circle-two-points").correspondence
    bad = dict(c.range)
    z = c.covering.fibers[0][0]
    bad[z] = (c.range[z] + 6) % 12
    with pytest.raises(ShapeMismatch):
        type(c)(c.covering, c.line, c.target, bad)
    with pytest.raises(ShapeMismatch):
        type(c)(c.covering, c.line, c.target, {**c.range, z: "nowhere"})
