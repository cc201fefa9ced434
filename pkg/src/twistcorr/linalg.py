"""Numeric kernel: Hermitian eigenstructure, commuting families, integer Smith normal form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCommuting, NotHermitian

TOL_NUM = 1e-9
TOL_EIG = 1e-6
TOL_MATCH = 0.5


@dataclass(frozen=True)
class EigenDecomposition:
    unitary: np.ndarray
    eigenvalues: np.ndarray
    blocks: tuple[tuple[int, ...], ...]


def group_values(values, tol: float = TOL_EIG) -> tuple[tuple[int, ...], ...]:
    """Group consecutive indices of a sorted value list whose gaps are within `tol`."""
    if len(values) == 0:
        return ()
    blocks = [[0]]
    for k in range(1, len(values)):
        if abs(values[k] - values[k - 1]) <= tol:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return tuple(tuple(b) for b in blocks)


def eig_hermitian(a, tol: float = TOL_NUM, eig_tol: float = TOL_EIG) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Raises NotHermitian if ``|A - A*| > tol``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    asym = np.linalg.norm(a - a.conj().T, 2) if a.size else 0.0
    if asym > tol:
        raise NotHermitian(f"|A - A*| = {asym:.3e} exceeds {tol:.1e}")
    w, u = np.linalg.eigh((a + a.conj().T) / 2)
    return EigenDecomposition(u, w.astype(float), group_values(w, eig_tol))


def _hermitian_parts(a: np.ndarray) -> list[np.ndarray]:
    re = (a + a.conj().T) / 2
    im = (a - a.conj().T) / 2j
    return [m for m in (re, im) if np.linalg.norm(m) > 0]


def _split(basis: np.ndarray, h: np.ndarray, eig_tol: float) -> list[np.ndarray]:
    """Split the span of `basis` into eigenspaces of the compression of `h`."""
    w, v = np.linalg.eigh(basis.conj().T @ h @ basis)
    return [basis @ v[:, list(b)] for b in group_values(w, eig_tol)]


def simultaneous_diagonalize(family, tol: float = TOL_NUM, eig_tol: float = TOL_EIG, rng=None):
    """Diagonalize a commuting family of normal matrices by one unitary.

    Returns ``(U, tuples)`` where ``tuples[k]`` holds the joint eigenvalues of column k,
    one entry per family member.
    """
    mats = [np.asarray(m, dtype=complex) for m in family]
    if not mats:
        raise ValueError("empty family")
    n = mats[0].shape[0]
    for j, m in enumerate(mats):
        if m.shape != (n, n):
            raise ValueError(f"member {j} has shape {m.shape}, expected {(n, n)}")
        if np.linalg.norm(m @ m.conj().T - m.conj().T @ m, 2) > tol * max(1.0, np.linalg.norm(m, 2) ** 2):
            raise NotCommuting(j, j, float(np.linalg.norm(m @ m.conj().T - m.conj().T @ m, 2)))
    for j1 in range(len(mats)):
        for j2 in range(j1 + 1, len(mats)):
            c = np.linalg.norm(mats[j1] @ mats[j2] - mats[j2] @ mats[j1], 2)
            if c > tol * max(1.0, np.linalg.norm(mats[j1], 2) * np.linalg.norm(mats[j2], 2)):
                raise NotCommuting(j1, j2, float(c))
    herm = [h for m in mats for h in _hermitian_parts(m)]
    rng = np.random.default_rng(0) if rng is None else rng
    blocks = [np.eye(n, dtype=complex)]
    if herm:
        coeffs = rng.uniform(0.5, 1.5, size=len(herm))
        blocks = _split(blocks[0], sum(c * h for c, h in zip(coeffs, herm)), eig_tol)
        # refine member by member in case the random combination merged eigenspaces
        for h in herm:
            blocks = [part for b in blocks for part in (_split(b, h, eig_tol) if b.shape[1] > 1 else [b])]
    u = np.hstack(blocks)
    diag = np.array([np.diag(u.conj().T @ m @ u) for m in mats])
    tuples = [tuple(diag[:, k]) for k in range(n)]
    return u, tuples


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Closest unitary in Frobenius norm (polar factor)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def unitary_residual(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]), 2))


# ---------------------------------------------------------------- Smith normal form

def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form_full(m):
    """Smith normal form with transforms and their inverses.

    Returns ``(left, diag, right, left_inv, right_inv)`` as lists of Python ints with
    ``left @ m @ right`` equal to the diagonal embedding of `diag` (nonzero entries only).
    """
    a = [[int(v) for v in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    left, left_inv = _identity(rows), _identity(rows)
    right, right_inv = _identity(cols), _identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]
        for row in left_inv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]
        right_inv[i], right_inv[j] = right_inv[j], right_inv[i]

    def add_row(src, dst, q):
        # row_dst += q * row_src
        if q == 0:
            return
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        left[dst] = [x + q * y for x, y in zip(left[dst], left[src])]
        for row in left_inv:
            row[src] -= q * row[dst]

    def add_col(src, dst, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in a:
            row[dst] += q * row[src]
        for row in right:
            row[dst] += q * row[src]
        right_inv[src] = [x - q * y for x, y in zip(right_inv[src], right_inv[dst])]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        left[i] = [-x for x in left[i]]
        for row in left_inv:
            row[i] = -row[i]

    diag = []
    t = 0
    while t < min(rows, cols):
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % a[t][t] != 0), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if a[t][t] < 0:
            negate_row(t)
        diag.append(a[t][t])
        t += 1
    return left, diag, right, left_inv, right_inv


def smith_normal_form(m):
    """Return ``(left, diag, right)`` with ``left @ m @ right`` diagonal, ``d1 | d2 | ...``."""
    left, diag, right, _, _ = smith_normal_form_full(m)
    return left, diag, right


def int_matmul(a, b):
    """Exact product of integer matrices given as nested lists."""
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if inner else 0
    return [[sum(row[k] * b[k][j] for k in range(inner)) for j in range(ncols)] for row in a]
