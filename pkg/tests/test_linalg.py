import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistcorr.errors import NotCommuting, NotHermitian
from twistcorr.linalg import (eig_hermitian, group_values, int_matmul, nearest_unitary, simultaneous_diagonalize,
                              smith_normal_form, smith_normal_form_full, unitary_residual)


def test_eig_hermitian_groups_degenerate_values():
    a = np.diag([1.0, 1.0, 3.0])
    d = eig_hermitian(a)
    assert d.blocks == ((0, 1), (2,))
    assert np.allclose(d.unitary @ np.diag(d.eigenvalues) @ d.unitary.conj().T, a)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_group_values():
    assert group_values([0.0, 1e-9, 1.0]) == ((0, 1), (2,))
    assert group_values([]) == ()


def test_simultaneous_diagonalize_rejects_non_commuting():
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    with pytest.raises(NotCommuting):
        simultaneous_diagonalize([x, z])


def test_simultaneous_diagonalize_splits_shared_eigenspaces():
    a = np.diag([1, 1, 2, 2]).astype(complex)
    b = np.diag([5, 6, 5, 6]).astype(complex)
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)))
    u, tuples = simultaneous_diagonalize([q @ a @ q.T, q @ b @ q.T])
    assert sorted((round(t[0].real), round(t[1].real)) for t in tuples) == [(1, 5), (1, 6), (2, 5), (2, 6)]
    assert unitary_residual(u) < 1e-12


def test_nearest_unitary():
    m = np.array([[2.0, 0.1], [0.0, 0.5]])
    assert unitary_residual(nearest_unitary(m)) < 1e-12


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_smith_normal_form_identities(m):
    left, diag, right, left_inv, right_inv = smith_normal_form_full(m)
    rows, cols = len(m), len(m[0])
    d = int_matmul(int_matmul(left, m), right)
    assert d == [[diag[i] if i == j and i < len(diag) else 0 for j in range(cols)] for i in range(rows)]
    assert int_matmul(left, left_inv) == [[int(i == j) for j in range(rows)] for i in range(rows)]
    assert int_matmul(right, right_inv) == [[int(i == j) for j in range(cols)] for i in range(cols)]
    assert all(v > 0 for v in diag)
    assert all(diag[i + 1] % diag[i] == 0 for i in range(len(diag) - 1))
    assert len(diag) == np.linalg.matrix_rank(np.array(m, dtype=float))


def test_smith_normal_form_known_case():
    _, diag, _ = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert diag == [2, 6, 12]
