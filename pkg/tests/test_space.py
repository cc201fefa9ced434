import pytest

from twistcorr import models
from twistcorr.errors import NotGoodCover, UnknownVertex
from twistcorr.space import (CechSpace, closed_star, connected_components, nerve, require_good_cover, spanning_tree,
                             validate_good_cover)


def test_validation_errors():
    with pytest.raises(ValueError):
        CechSpace("x", (0, 0), (), (frozenset({0}),))
    with pytest.raises(UnknownVertex):
        CechSpace("x", (0,), ((0, 1),), (frozenset({0}),))
    with pytest.raises(ValueError, match="no charts"):
        CechSpace("x", (0,), (), ())
    with pytest.raises(ValueError, match="cover"):
        CechSpace("x", (0, 1), (), (frozenset({0}),))


def test_models_are_good_covers():
    for space in (models.circle(), models.interval(), models.square(), models.sphere()[0],
                  models.projective_plane()[0]):
        require_good_cover(space)
        assert validate_good_cover(space).good


def test_two_arc_circle_is_not_good():
    with pytest.raises(NotGoodCover):
        require_good_cover(models.circle_two_arcs())


def test_nerve_of_circle_has_no_triangles():
    nv = nerve(models.circle())
    assert len(nv.dim(0)) == 3 and len(nv.dim(1)) == 3 and nv.dim(2) == ()


def test_components_and_trees():
    circle = models.circle()
    comps = connected_components(circle, [0, 1, 5, 6])
    assert comps == [frozenset({0, 1}), frozenset({5, 6})]
    tree = spanning_tree(circle, circle.charts[0])
    assert tree[0][0] is None and len(tree) == len(circle.charts[0])
    assert closed_star(circle, 0) == frozenset({11, 0, 1})


def test_induced_keeps_chart_order():
    sq = models.square()
    sub = sq.induced(range(5))
    assert sub.vertices == (0, 1, 2, 3, 4)
