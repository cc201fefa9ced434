import numpy as np
import pytest

from twistcorr import gallery, models
from twistcorr.bundle import (build_covering, build_twisted_covering, coverings_isomorphic, extract_cocycle, monodromy,
                              perm_cocycles_equivalent, reassemble)
from twistcorr.cocycle import (Gauge, apply_gauge, conjugate, constant_perm_system, from_pairs, identity_gauge,
                               phase_system, pushforward, require_cocycle, tensor, verify_cocycle)
from twistcorr.errors import DegreeMismatch, InvalidCocycle, NotGoodCover, UnknownHom
from twistcorr.group import DiagPermUnitary, Permutation

SWAP = Permutation((1, 0))


def _random_gauge(t, rng):
    maps = {}
    for i, chart in enumerate(t.base.charts):
        maps[i] = {x: DiagPermUnitary(Permutation(tuple(int(v) for v in rng.permutation(t.degree))),
                                      tuple(np.exp(1j * rng.uniform(-np.pi, np.pi, t.degree)))) for x in chart}
    return Gauge(t.degree, maps)


def test_from_pairs_fills_inverses():
    t = constant_perm_system(models.circle(), 2, {(0, 1): SWAP})
    x = next(iter(t.data[(0, 1)]))
    assert t(1, 0, x).close_to(t(0, 1, x).inverse())
    assert verify_cocycle(t).valid


def test_verify_cocycle_flags_violation():
    t = constant_perm_system(models.circle(), 2, {(0, 1): SWAP})
    x = next(iter(t.data[(0, 1)]))
    t.data[(1, 0)][x] = DiagPermUnitary(SWAP, (1j, 1))
    report = verify_cocycle(t)
    assert not report.valid
    with pytest.raises(InvalidCocycle):
        require_cocycle(t)


def test_gauge_keeps_cocycle_and_inverts():
    rng = np.random.default_rng(3)
    t = gallery.circle_cover_cocycle(3, (2, 1))
    r = _random_gauge(t, rng)
    moved = apply_gauge(t, r)
    assert verify_cocycle(moved).valid
    assert apply_gauge(moved, r.inverse()).close_to(t)
    assert apply_gauge(t, identity_gauge(t.base, 3)).close_to(t)
    with pytest.raises(DegreeMismatch):
        apply_gauge(t, identity_gauge(t.base, 2))


def test_pushforwards():
    t = gallery.circle_cover_cocycle(2, (2,))
    det = pushforward("det", t)
    assert det.degree == 1 and verify_cocycle(det).valid
    assert verify_cocycle(pushforward("perm", t)).valid
    with pytest.raises(UnknownHom):
        pushforward("phase:0", t)
    with pytest.raises(UnknownHom):
        pushforward("trace", t)


def test_tensor_and_conjugate_cancel():
    l = gallery.s2_clutching_cocycle(1)
    prod = tensor(l, conjugate(l))
    assert all(abs(g.phases[0] - 1) < 1e-12 for vals in prod.data.values() for g in vals.values())


@pytest.mark.parametrize("parts", [(1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1)])
def test_covering_components_match_cycle_type(parts):
    t = gallery.circle_cover_cocycle(sum(parts), parts)
    cov = build_covering(t)
    sizes = sorted((len(c) // len(t.base.vertices) for c in cov.components()), reverse=True)
    assert tuple(sizes) == tuple(sorted(parts, reverse=True))
    assert extract_cocycle(cov).close_to(t)
    assert sorted(p.cycle_type() for _, p in monodromy(cov)) == [tuple(sorted(parts, reverse=True))]


def test_twisted_covering_reassembles_exactly():
    for name in ("circle-covers/2/2", "circle-phases", "rp2-antipodal", "s2-line-bundle/1"):
        t = gallery.load(name).cocycle
        cov, line = build_twisted_covering(t)
        assert reassemble(cov, line).close_to(t, 1e-12)


def test_gauge_equivalent_coverings_are_isomorphic():
    rng = np.random.default_rng(0)
    t = gallery.circle_cover_cocycle(3, (2, 1))
    moved = apply_gauge(pushforward("perm", t), _random_gauge(pushforward("perm", t), rng))
    moved = pushforward("perm", moved)
    assert coverings_isomorphic(build_covering(t), build_covering(moved)) is not None
    assert perm_cocycles_equivalent(pushforward("perm", t), moved) is not None
    other = build_covering(gallery.circle_cover_cocycle(3, (3,)))
    assert coverings_isomorphic(build_covering(t), other) is None


def test_edge_outside_every_chart_cannot_be_lifted():
    from twistcorr.space import CechSpace
    space = CechSpace("gap", (0, 1), ((0, 1),), (frozenset({0}), frozenset({1})))
    with pytest.raises(NotGoodCover):
        build_covering(constant_perm_system(space, 2, {}))


def test_phase_system_round_trip():
    circle = models.circle()
    upper = {(0, 1): {x: 1j for x in circle.overlap(0, 1)}}
    t = phase_system(circle, upper)
    assert verify_cocycle(t).valid
    assert from_pairs(circle, 1, {}).degree == 1
