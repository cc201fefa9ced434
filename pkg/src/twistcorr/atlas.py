"""Normalizing and diagonalizing atlases, and the passage between atlases and correspondences."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bundle import build_twisted_covering, perm_cocycles_equivalent
from .cocycle import Gauge, TransitionSystem, from_pairs, pushforward
from .correspondence import (KAPPA, LeftAction, TwistedCorrespondence, make_correspondence, pattern_blocks,
                             unitary_field_search)
from .errors import AmbiguousRange, InvalidCocycle, NoRange, RangeNotWellDefined, ShapeMismatch
from .group import DiagPermUnitary, Permutation, from_matrix, matrix_form
from .linalg import TOL_MATCH, TOL_NUM
from .space import CechSpace


@dataclass(frozen=True, eq=False)
class AtlasData:
    """``frames[i][x]`` is the unitary H_i(x) whose columns are the chart-i basis of ℰ_x in canonical coordinates."""

    base: CechSpace
    degree: int
    frames: dict = field(repr=False)

    def __post_init__(self):
        for i, chart in enumerate(self.base.charts):
            got = self.frames.get(i, {})
            if set(got) != set(chart):
                raise ShapeMismatch(f"frames of chart {i} do not match the chart")
            for x, h in got.items():
                if np.shape(h) != (self.degree, self.degree):
                    raise ShapeMismatch(f"frame at chart {i}, vertex {x} has shape {np.shape(h)}")

    def transition(self, i: int, j: int, x) -> np.ndarray:
        """g_ij(x) = H_i(x)* H_j(x)."""
        return self.frames[i][x].conj().T @ self.frames[j][x]

    def transports(self) -> dict:
        """P = H_i(x') H_i(x)* in the least chart i containing the edge, for each directed edge."""
        out = {}
        for u, v in self.base.edges:
            i = next(i for i in self.base.charts_at[u] if v in self.base.charts[i])
            out[(u, v)] = self.frames[i][v] @ self.frames[i][u].conj().T
            out[(v, u)] = out[(u, v)].conj().T
        return out

    def home_frame(self, x) -> np.ndarray:
        return self.frames[self.base.charts_at[x][0]][x]


@dataclass(frozen=True)
class AtlasReport:
    passed: bool
    residual: float
    failures: tuple  # (chart indices, vertex, residual)

    def __bool__(self):
        return self.passed


def unitarity_report(a: AtlasData, tol: float = TOL_NUM) -> AtlasReport:
    eye = np.eye(a.degree)
    fails, worst = [], 0.0
    for i, frames in a.frames.items():
        for x, h in frames.items():
            res = float(np.max(np.abs(h.conj().T @ h - eye), initial=0.0))
            worst = max(worst, res)
            if res > tol:
                fails.append(((i,), x, res))
    return AtlasReport(not fails, worst, tuple(fails))


def is_normalizing(a: AtlasData, tol: float = TOL_NUM) -> AtlasReport:
    """Whether every g_ij(x) is a permutation matrix times a unitary diagonal."""
    fails, worst = [], 0.0
    nch = len(a.base.charts)
    for i in range(nch):
        for j in range(i + 1, nch):
            for x in a.base.sorted_vertices(a.base.overlap(i, j)):
                g = a.transition(i, j, x)
                mag = np.abs(g)
                big = mag > 0.5
                pattern_ok = np.all(big.sum(axis=0) == 1) and np.all(big.sum(axis=1) == 1)
                res = float(np.max(np.where(big, np.abs(mag - 1), mag)))
                worst = max(worst, res)
                if not pattern_ok or res > tol:
                    fails.append(((i, j), x, res))
    return AtlasReport(not fails, worst, tuple(fails))


def is_diagonalizing(a: AtlasData, phi: LeftAction, tol: float = TOL_NUM) -> AtlasReport:
    """Whether each chart basis vector is an eigenvector of every φ(δ_y)_x."""
    if phi.degree != a.degree or phi.source != a.base:
        raise ShapeMismatch("left action and atlas live on different modules")
    fails, worst = [], 0.0
    for i, frames in a.frames.items():
        for x, h in frames.items():
            b = a.base.index[x]
            for y, img in phi.active[b]:
                m = img @ h
                coeff = np.einsum("ik,ik->k", h.conj(), m)
                res = float(np.max(np.linalg.norm(m - h * coeff, axis=0), initial=0.0))
                worst = max(worst, res)
                if res > tol:
                    fails.append(((i,), x, res))
    return AtlasReport(not fails, worst, tuple(fails))


def atlas_from_correspondence(c: TwistedCorrespondence) -> AtlasData:
    """Chart-i basis at x: the unit sheet sections of the sheets (i, k), in canonical coordinates."""
    cov, n = c.covering, c.degree
    frames = {}
    for i, chart in enumerate(c.source.charts):
        frames[i] = {}
        for x in chart:
            h = np.zeros((n, n), dtype=complex)
            for k in range(n):
                z = cov.coords[(i, x, k)]
                h[cov.fiber_position[z], k] = c.line.phase(cov.canonical_chart(z), cov.sheet_chart_index(i, k), z)
            frames[i][x] = h
    return AtlasData(c.source, n, frames)


def derived_cocycle(a: AtlasData, tol: float = TOL_NUM) -> TransitionSystem:
    """The 𝕋ⁿ⋊Sₙ-valued system g_ij = H_i* H_j of a normalizing atlas."""
    upper = {}
    nch = len(a.base.charts)
    for i in range(nch):
        for j in range(i + 1, nch):
            ov = a.base.overlap(i, j)
            if not ov:
                continue
            vals = {}
            for x in ov:
                g = from_matrix(a.transition(i, j, x), tol)
                if g is None:
                    raise InvalidCocycle(f"atlas is not normalizing at charts ({i},{j}), vertex {x}")
                vals[x] = g
            upper[(i, j)] = vals
    return from_pairs(a.base, a.degree, upper)


def eigenvalue_table(a: AtlasData, phi: LeftAction) -> dict:
    """μ_ik(δ_y)(x) = ⟨e_k, H_i(x)* φ(δ_y)_x H_i(x) e_k⟩ as ``table[(i, x)][y]`` (array over k).

    Points y with φ(δ_y)_x = 0 are omitted.
    """
    out = {}
    for i, frames in a.frames.items():
        for x, h in frames.items():
            b = a.base.index[x]
            out[(i, x)] = {y: np.real(np.einsum("ik,ij,jk->k", h.conj(), img, h)) for y, img in phi.active[b]}
    return out


def chart_labels(a: AtlasData, phi: LeftAction, tau: float = TOL_MATCH) -> dict:
    """``labels[(i, x)][k]`` = the unique y with μ_ik(δ_y)(x) > 1 − τ."""
    out = {}
    for (i, x), mus in eigenvalue_table(a, phi).items():
        labels = []
        for k in range(a.degree):
            hits = [y for y, mu in mus.items() if mu[k] > 1 - tau]
            if not hits:
                raise NoRange(f"no point of the target carries sheet {k} of chart {i} at {x}")
            if len(hits) > 1:
                raise AmbiguousRange(f"sheet {k} of chart {i} at {x} matches {hits}")
            labels.append(hits[0])
        out[(i, x)] = tuple(labels)
    return out


def range_map_from_atlas(a: AtlasData, phi: LeftAction, tau: float = TOL_MATCH, tol: float = TOL_NUM,
                         name: str = "E") -> TwistedCorrespondence:
    """Twisted covering from the derived cocycle, range map from the eigenvalue functions μ_ik."""
    cov, line = build_twisted_covering(derived_cocycle(a, tol))
    mus = eigenvalue_table(a, phi)
    labels = chart_labels(a, phi, tau)
    rng, seen = {}, {}
    for (i, x), lab in labels.items():
        for k, y in enumerate(lab):
            z = cov.coords[(i, x, k)]
            mu = {w: m[k] for w, m in mus[(i, x)].items()}
            if z in rng:
                keys = set(mu) | set(seen[z])
                if rng[z] != y or max(abs(mu.get(w, 0.0) - seen[z].get(w, 0.0)) for w in keys) > tol:
                    raise RangeNotWellDefined(f"charts disagree on the eigenvalues of {z}")
            else:
                rng[z], seen[z] = y, mu
    return make_correspondence(cov, line, phi.target, rng, name)


def apply_atlas_gauge(a: AtlasData, r: Gauge) -> AtlasData:
    """H_i ↦ H_i r_i, so g_ij ↦ r_i⁻¹ g_ij r_j."""
    frames = {i: {x: h @ matrix_form(r.maps[i][x]) for x, h in fr.items()} for i, fr in a.frames.items()}
    return AtlasData(a.base, a.degree, frames)


def atlases_equivalent(a: AtlasData, b: AtlasData, phi_a: LeftAction, phi_b: LeftAction,
                       kappa: float = KAPPA, seed: int = 0) -> Gauge | None:
    """Normalizer-valued gauge r with g^b_ij = r_i⁻¹ g^a_ij r_j intertwining the left actions, or None.

    Permutation parts come from a constraint search over chart components; phases from the unitary
    field search in the home-chart bases, which rejects gauges that are not edge-coherent.
    """
    if a.base != b.base or a.degree != b.degree:
        return None
    ga, gb = derived_cocycle(a), derived_cocycle(b)
    la, lb = chart_labels(a, phi_a), chart_labels(b, phi_b)

    def accept(i, comp, perm):
        return all(lb[(i, x)][k] == la[(i, x)][perm(k)] for x in comp for k in range(a.degree))

    perms = perm_cocycles_equivalent(pushforward("perm", ga), pushforward("perm", gb), accept)
    if perms is None:
        return None
    base = a.base
    home = {x: base.charts_at[x][0] for x in base.vertices}
    # T(x) sends a's home basis to b's home basis: column π(k) lands in row k
    patterns = {x: [0] * a.degree for x in base.vertices}
    for x in base.vertices:
        pi = perms.maps[home[x]][x].perm
        for k in range(a.degree):
            patterns[x][pi(k)] = k
    pa, pb = a.transports(), b.transports()
    qa = {(u, v): a.home_frame(v).conj().T @ p @ a.home_frame(u) for (u, v), p in pa.items()}
    qb = {(u, v): b.home_frame(v).conj().T @ p @ b.home_frame(u) for (u, v), p in pb.items()}
    found = unitary_field_search(base, pattern_blocks(patterns), qa, qb, kappa=kappa, seed=seed)
    if found is None:
        return None
    maps = {}
    for i, chart in enumerate(base.charts):
        maps[i] = {}
        for x in chart:
            r = a.transition(i, home[x], x) @ found[x].conj().T @ b.transition(home[x], i, x)
            g = from_matrix(r, 1e-8)
            if g is None:
                return None
            maps[i][x] = g
    return Gauge(a.degree, maps)


def perturb_atlas(a: AtlasData, rng: np.random.Generator, jitter: float = 0.2) -> tuple[AtlasData, Gauge]:
    """Random gauge: one permutation per chart, phases constant per chart plus small per-vertex jitter."""
    maps = {}
    for i, chart in enumerate(a.base.charts):
        perm = tuple(int(v) for v in rng.permutation(a.degree))
        base_phase = rng.uniform(-np.pi, np.pi, a.degree)
        maps[i] = {}
        for x in chart:
            theta = base_phase + rng.uniform(-jitter, jitter, a.degree)
            maps[i][x] = DiagPermUnitary(Permutation(perm), tuple(np.exp(1j * theta)))
    r = Gauge(a.degree, maps)
    return apply_atlas_gauge(a, r), r
