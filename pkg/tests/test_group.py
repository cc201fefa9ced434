import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcorr.errors import DegreeMismatch
from twistcorr.group import (DiagPermUnitary, Permutation, all_permutations, compose, conjugacy_classes_sn,
                             cycle_type_representative, determinant, format_phase, from_matrix, matrix_form,
                             partitions)


@st.composite
def elements(draw, n=None):
    n = draw(st.integers(1, 5)) if n is None else n
    perm = draw(st.permutations(list(range(n))))
    angles = draw(st.lists(st.floats(-np.pi, np.pi), min_size=n, max_size=n))
    return DiagPermUnitary(Permutation(tuple(perm)), tuple(np.exp(1j * np.array(angles))))


@st.composite
def pairs(draw):
    n = draw(st.integers(1, 5))
    return draw(elements(n)), draw(elements(n))


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((0, 0))


def test_permutation_cycles_and_render():
    p = Permutation.from_cycles(4, [[0, 1], [2, 3]])
    assert p.render() == "(1 2)(3 4)"
    assert p.cycle_type() == (2, 2)
    assert p.sign() == 1
    assert Permutation.identity(3).render() == "id"


def test_matrix_model_convention():
    swap = Permutation((1, 0))
    g = DiagPermUnitary(swap, (1j, -1))
    h = DiagPermUnitary(swap, (1, 1))
    assert (g * h).perm.is_identity()
    assert np.allclose(matrix_form(g * h), matrix_form(g) @ matrix_form(h))
    # e_k ↦ λ_{σ(k)} e_{σ(k)}
    m = matrix_form(g)
    assert m[1, 0] == -1 and m[0, 1] == 1j


def test_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        compose(DiagPermUnitary.identity(2), DiagPermUnitary.identity(3))


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_matrix_form_is_homomorphism(gh):
    g, h = gh
    assert np.max(np.abs(matrix_form(g * h) - matrix_form(g) @ matrix_form(h))) < 1e-12


@settings(max_examples=100, deadline=None)
@given(elements())
def test_inverse_and_from_matrix(g):
    assert (g * g.inverse()).close_to(DiagPermUnitary.identity(g.n))
    back = from_matrix(matrix_form(g))
    assert back is not None and back.close_to(g)
    assert abs(determinant(g) - np.linalg.det(matrix_form(g))) < 1e-12


def test_from_matrix_rejects_non_monomial():
    assert from_matrix(np.ones((2, 2)) / np.sqrt(2)) is None


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 3), (4, 5), (5, 7), (6, 11)])
def test_partition_counts(n, count):
    parts = list(partitions(n))
    assert len(parts) == count
    assert all(sum(p) == n for p in parts)
    reps = conjugacy_classes_sn(n)
    assert sorted(r.cycle_type() for r in reps) == sorted(tuple(sorted(p, reverse=True)) for p in parts)


def test_cycle_type_representative_is_in_class():
    for parts in partitions(5):
        p = cycle_type_representative(sorted(parts, reverse=True))
        assert p.cycle_type() == tuple(sorted(parts, reverse=True))
    assert len(all_permutations(4)) == 24


def test_format_phase_round_trips():
    for p in (1, -1, 1j, -1j, np.exp(0.3j)):
        assert complex(format_phase(p)) == complex(p)
