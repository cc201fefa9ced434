"""Twisted topological correspondences (Z, r, s, ℒ) and their fiberwise C*-correspondences."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np

from .bundle import CoveringSpace, LineBundle, iter_covering_isomorphisms, line_bundles_isomorphic_over
from .cocycle import TransitionSystem
from .errors import BadPartition, CoverMismatch, ShapeMismatch
from .linalg import TOL_NUM
from .space import CechSpace, connected_components, spanning_tree

KAPPA = 0.5  # largest accepted edge jump ‖T(x') − P T(x) P*‖ for a unitary field
ISOMORPHISM_SEARCH_LIMIT = 5000
STAGNATION_SWEEPS = 40  # relaxation sweeps without improvement before a restart
CHECK_EVERY = 5  # relaxation sweeps between evaluations of the edge jumps


@dataclass(frozen=True, eq=False)
class TwistedCorrespondence:
    covering: CoveringSpace
    line: LineBundle
    target: CechSpace
    range: dict = field(repr=False)
    name: str = "E"

    def __post_init__(self):
        if self.line.covering is not self.covering:
            raise CoverMismatch("line bundle lives on a different covering")
        if set(self.range) != set(self.covering.vertices):
            raise ShapeMismatch("range map must be defined on every total vertex")
        ys = self.target.index
        for z, y in self.range.items():
            if y not in ys:
                raise ShapeMismatch(f"range value {y!r} of {z!r} is not a vertex of {self.target.name}")
        yedges = {frozenset(e) for e in self.target.edges}
        for u, v in self.covering.edges:
            a, b = self.range[u], self.range[v]
            if a != b and frozenset((a, b)) not in yedges:
                raise ShapeMismatch(f"range map sends the edge {u}-{v} to the non-edge {a}-{b}")

    @property
    def source(self) -> CechSpace:
        return self.covering.base

    @property
    def degree(self) -> int:
        return self.covering.degree

    @cached_property
    def order(self) -> tuple:
        """Total vertices in canonical order: base order, then fiber order."""
        return self.covering.total.vertices

    @cached_property
    def position(self) -> dict:
        return {z: k for k, z in enumerate(self.order)}

    @cached_property
    def fiber_labels(self) -> dict:
        """Base vertex -> range values of its fiber in canonical order."""
        return {x: [self.range[z] for z in f] for x, f in self.covering.fibers.items()}

    def restrict(self, subset, name: str | None = None) -> "TwistedCorrespondence":
        """Correspondence over the induced subspace of the base on `subset`."""
        cov = self.covering.restrict(subset)
        old, n = self.covering, self.degree
        keep = [i for i, c in enumerate(old.base.charts) if c & frozenset(subset)]
        renum = {i: k for k, i in enumerate(keep)}

        def new_index(a):
            i, k = old.sheet_charts[a]
            return renum[i] * n + k if i in renum else None

        data = {}
        for (a, b), vals in self.line.phases.data.items():
            na, nb = new_index(a), new_index(b)
            if na is None or nb is None:
                continue
            kept = {z: g for z, g in vals.items() if cov.sheet.get(z) is not None}
            if kept:
                data[(na, nb)] = kept
        line = LineBundle(cov, TransitionSystem(cov.total, 1, data))
        rng = {z: self.range[z] for z in cov.vertices}
        return TwistedCorrespondence(cov, line, self.target, rng, name or f"{self.name}|sub")


def make_correspondence(covering: CoveringSpace, line: LineBundle, target: CechSpace, range_map,
                        name: str = "E") -> TwistedCorrespondence:
    """Accepts the range map as a dict or as a callable on total vertices."""
    if callable(range_map):
        range_map = {z: range_map(z) for z in covering.vertices}
    return TwistedCorrespondence(covering, line, target, dict(range_map), name)


# ---------------------------------------------------------------- sections and inner products

def _check_section(c: TwistedCorrespondence, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (len(c.order),):
        raise ShapeMismatch(f"section has shape {xi.shape}, expected {(len(c.order),)}")
    return xi


def inner_product(c: TwistedCorrespondence, xi, eta) -> np.ndarray:
    """⟨ξ, η⟩(x) = Σ_{s(z)=x} conj(ξ(z)) η(z), returned in base vertex order."""
    xi, eta = _check_section(c, xi), _check_section(c, eta)
    return (xi.conj() * eta).reshape(len(c.source.vertices), c.degree).sum(axis=1)


def right_multiply(c: TwistedCorrespondence, xi, f) -> np.ndarray:
    """(ξ·f)(z) = ξ(z) f(s(z)) for f given in base vertex order."""
    return _check_section(c, xi) * np.repeat(np.asarray(f, dtype=complex), c.degree)


def multiply(c: TwistedCorrespondence, g, xi) -> np.ndarray:
    """Θ_g ξ for a function g on Z given in canonical order."""
    return np.asarray(g, dtype=complex) * _check_section(c, xi)


# ---------------------------------------------------------------- left action

@dataclass(frozen=True, eq=False)
class LeftAction:
    """φ(δ_y) as operator fields: ``images[y]`` has shape (|X|, n, n) in canonical fiber bases."""

    source: CechSpace
    target: CechSpace
    degree: int
    images: dict

    @cached_property
    def active(self) -> list[list]:
        """``active[b]`` lists the (y, φ(δ_y)_x) with nonzero image at the b-th base vertex."""
        out = [[] for _ in self.source.vertices]
        for y, img in self.images.items():
            for b in np.flatnonzero(np.abs(img).reshape(len(out), -1).max(axis=1) > 0):
                out[b].append((y, img[b]))
        return out

    def image(self, y) -> np.ndarray:
        if y in self.images:
            return self.images[y]
        if y not in self.target.index:
            raise ShapeMismatch(f"{y!r} is not a vertex of {self.target.name}")
        return np.zeros((len(self.source.vertices), self.degree, self.degree), dtype=complex)

    def assemble(self, f) -> np.ndarray:
        """φ(f) for f given as a dict or callable on target vertices."""
        get = f if callable(f) else f.__getitem__
        out = np.zeros((len(self.source.vertices), self.degree, self.degree), dtype=complex)
        for y, img in self.images.items():
            out += get(y) * img
        return out

    def check(self, tol: float = TOL_NUM) -> list[str]:
        """Violations of positivity, orthogonality and Σ φ(δ_y) = 1."""
        problems = []
        total = sum(self.images.values())
        eye = np.eye(self.degree)
        if np.max(np.abs(total - eye), initial=0.0) > tol:
            problems.append("images do not sum to the identity field")
        ys = list(self.images)
        for a in range(len(ys)):
            p = self.images[ys[a]]
            if np.max(np.abs(p - p.conj().transpose(0, 2, 1)), initial=0.0) > tol:
                problems.append(f"image of {ys[a]!r} is not self-adjoint")
            if np.max(np.abs(p @ p - p), initial=0.0) > tol:
                problems.append(f"image of {ys[a]!r} is not a projection")
            for b in range(a + 1, len(ys)):
                if np.max(np.abs(p @ self.images[ys[b]]), initial=0.0) > tol:
                    problems.append(f"images of {ys[a]!r} and {ys[b]!r} are not orthogonal")
        return problems


def left_action_of(c: TwistedCorrespondence) -> LeftAction:
    """φ(δ_y)_x = diagonal projection onto the sheets over x with range y."""
    nx_, n = len(c.source.vertices), c.degree
    images = {}
    for b, x in enumerate(c.source.vertices):
        for k, y in enumerate(c.fiber_labels[x]):
            if y not in images:
                images[y] = np.zeros((nx_, n, n), dtype=complex)
            images[y][b, k, k] = 1.0
    ordered = {y: images[y] for y in c.target.vertices if y in images}
    return LeftAction(c.source, c.target, n, ordered)


# ---------------------------------------------------------------- frames

def default_partition(base: CechSpace) -> dict:
    """γ_i = 1/sqrt(#charts at x) on U_i, zero elsewhere, so Σ γ_i² = 1."""
    out = {}
    for i, chart in enumerate(base.charts):
        out[i] = np.array([1 / np.sqrt(len(base.charts_at[x])) if x in chart else 0.0 for x in base.vertices])
    return out


def check_partition(base: CechSpace, weights: dict, tol: float = 1e-12) -> None:
    total = np.zeros(len(base.vertices))
    for i, chart in enumerate(base.charts):
        g = np.asarray(weights.get(i, np.zeros(len(base.vertices))), dtype=float)
        if g.shape != (len(base.vertices),):
            raise BadPartition(f"weight {i} has shape {g.shape}")
        if np.any(g < 0):
            raise BadPartition(f"weight {i} is negative somewhere")
        outside = [b for b, x in enumerate(base.vertices) if x not in chart]
        if np.any(g[outside] != 0):
            raise BadPartition(f"weight {i} is supported outside its chart")
        total += g ** 2
    if np.max(np.abs(total - 1)) > tol:
        raise BadPartition("squared weights do not sum to one")


def frame_sections(c: TwistedCorrespondence, weights: dict | None = None) -> dict:
    """ξ_ik = γ_i times the unit section of sheet k over chart i, in canonical trivializations."""
    base, cov = c.source, c.covering
    weights = default_partition(base) if weights is None else weights
    check_partition(base, weights)
    out = {}
    for i, chart in enumerate(base.charts):
        for k in range(c.degree):
            alpha = cov.sheet_chart_index(i, k)
            xi = np.zeros(len(c.order), dtype=complex)
            for x in chart:
                z = cov.coords[(i, x, k)]
                canon = cov.canonical_chart(z)
                xi[c.position[z]] = weights[i][base.index[x]] * c.line.phase(canon, alpha, z)
            out[(i, k)] = xi
    return out


def reconstruct_section(c: TwistedCorrespondence, frame: dict, eta) -> np.ndarray:
    """Σ ξ_ik ⟨ξ_ik, η⟩."""
    out = np.zeros(len(c.order), dtype=complex)
    for xi in frame.values():
        out += right_multiply(c, xi, inner_product(c, xi, eta))
    return out


# ---------------------------------------------------------------- transports

def transports(c: TwistedCorrespondence) -> dict:
    """Unitary P with P[z', z] = t_{c(z'),α}(z') t_{α,c(z)}(z) for each directed base edge (x, x')."""
    cov, base, n = c.covering, c.source, c.degree
    out = {}
    for u, v in base.edges:
        for a, b in ((u, v), (v, u)):
            p = np.zeros((n, n), dtype=complex)
            for z in cov.fibers[a]:
                z2 = cov.lift(z, b)
                common = [i for i in base.charts_at[a] if b in base.charts[i]]
                i = common[0]
                alpha = cov.sheet_chart_index(i, cov.chart_coord[(z, i)])
                phase = c.line.phase(cov.canonical_chart(z2), alpha, z2) * c.line.phase(alpha, cov.canonical_chart(z), z)
                p[cov.fiber_position[z2], cov.fiber_position[z]] = phase
            out[(a, b)] = p
    return out


@dataclass(frozen=True, eq=False)
class HilbertModule:
    """Fiber dimensions and parallel transports of ℰ in canonical fiber bases."""

    base: CechSpace
    degree: int
    transports: dict


def module_of(c: TwistedCorrespondence) -> HilbertModule:
    return HilbertModule(c.source, c.degree, transports(c))


# ---------------------------------------------------------------- isomorphism searches

def correspondences_isomorphic(a: TwistedCorrespondence, b: TwistedCorrespondence,
                               limit: int = ISOMORPHISM_SEARCH_LIMIT) -> dict | None:
    """Base-preserving covering isomorphism with r_b∘φ = r_a and φ*ℒ_b ≅ ℒ_a, or None."""
    if a.source != b.source or a.target != b.target:
        raise CoverMismatch("correspondences have different base or target spaces")
    if a.degree != b.degree:
        return None
    for count, phi in enumerate(iter_covering_isomorphisms(a.covering, b.covering, a.range, b.range)):
        if count >= limit:
            break
        if line_bundles_isomorphic_over(phi, a.line, b.line):
            return phi
    return None


def _label_blocks(labels_a: list, labels_b: list) -> list[tuple[list, list]]:
    blocks = []
    for y in dict.fromkeys(labels_a):
        blocks.append(([k for k, v in enumerate(labels_b) if v == y], [k for k, v in enumerate(labels_a) if v == y]))
    return blocks


def _project(m: np.ndarray, blocks) -> np.ndarray:
    out = np.zeros_like(m)
    for rows, cols in blocks:
        if len(rows) == 1:
            v = m[rows[0], cols[0]]
            out[rows[0], cols[0]] = v / abs(v) if abs(v) > 1e-300 else 1.0
            continue
        u, _, vh = np.linalg.svd(m[np.ix_(rows, cols)])
        out[np.ix_(rows, cols)] = u @ vh
    return out


def field_residuals(base: CechSpace, field_: dict, trans_a: dict, trans_b: dict) -> dict:
    """Edge jumps ‖T(x') − P_b T(x) P_a*‖₂ for each directed base edge."""
    return {(u, v): float(np.linalg.norm(field_[v] - trans_b[(u, v)] @ field_[u] @ trans_a[(u, v)].conj().T, 2))
            for u, v in trans_a}


def label_blocks(base: CechSpace, labels_a: dict, labels_b: dict) -> dict | None:
    """Per-vertex (rows, cols) blocks pairing equal labels, or None if some fiber multisets differ."""
    out = {}
    for x in base.vertices:
        if sorted(map(repr, labels_a[x])) != sorted(map(repr, labels_b[x])):
            return None
        out[x] = _label_blocks(labels_a[x], labels_b[x])
    return out


def pattern_blocks(perms: dict) -> dict:
    """1×1 blocks for monomial fields: ``perms[x][k]`` is the row receiving column k."""
    return {x: [([int(p[k])], [k]) for k in range(len(p))] for x, p in perms.items()}


class _BatchProjector:
    """Blockwise polar projection of the fiber matrices at a list of vertices, grouped by block structure."""

    def __init__(self, vertices: list, blocks: dict):
        groups: dict = {}
        for b, x in enumerate(vertices):
            key = tuple((tuple(r), tuple(c)) for r, c in blocks[x])
            groups.setdefault(key, []).append(b)
        self.groups = [(np.array(idx), key) for key, idx in groups.items()]

    def __call__(self, m: np.ndarray) -> np.ndarray:
        out = np.zeros_like(m)
        for idx, key in self.groups:
            for rows, cols in key:
                sub = m[np.ix_(idx, rows, cols)]
                if len(rows) == 1:
                    mag = np.abs(sub)
                    out[np.ix_(idx, rows, cols)] = np.where(mag > 1e-300, sub / np.maximum(mag, 1e-300), 1.0)
                else:
                    u, _, vh = np.linalg.svd(sub)
                    out[np.ix_(idx, rows, cols)] = u @ vh
        return out


def unitary_field_search(base: CechSpace, blocks: dict, trans_a: dict, trans_b: dict,
                         kappa: float = KAPPA, seed: int = 0, restarts: int = 4, max_sweeps: int = 600):
    """Unitary field T, block-structured by ``blocks[x]``, with every edge jump at most `kappa`.

    Spanning-tree propagation of the blockwise polar projection, then Gauss-Seidel relaxation
    T(x) ← Π_x(Σ_{x'~x} P_b T(x') P_a*), one greedy colour class at a time.
    Returns None when no restart reaches the threshold.
    """
    if not base.vertices:
        return {}
    n = sum(len(cols) for _, cols in blocks[base.vertices[0]])
    rng = np.random.default_rng(seed)
    trees = [spanning_tree(base, comp) for comp in connected_components(base)]
    keys = list(trans_a)
    src = np.array([base.index[u] for u, _ in keys], dtype=int)
    dst = np.array([base.index[v] for _, v in keys], dtype=int)
    pb = np.array([trans_b[e] for e in keys]).reshape(len(keys), n, n)
    pah = np.array([trans_a[e].conj().T for e in keys]).reshape(len(keys), n, n)
    colour = nx.coloring.greedy_color(base.graph, strategy="largest_first")
    classes = []
    for c in sorted(set(colour.values())):
        members = [x for x in base.vertices if colour[x] == c and base.adjacency[x]]
        if not members:
            continue
        local = {base.index[x]: k for k, x in enumerate(members)}
        edges = np.array([e for e in range(len(keys)) if int(dst[e]) in local], dtype=int)
        classes.append((np.array([base.index[x] for x in members]), edges,
                        np.array([local[int(dst[e])] for e in edges], dtype=int), _BatchProjector(members, blocks)))

    def jumps(f):
        if not keys:
            return 0.0
        d = f[dst] - pb @ f[src] @ pah
        return float(np.sqrt(max(np.max(np.linalg.eigvalsh(d.conj().transpose(0, 2, 1) @ d)), 0.0)))

    for attempt in range(restarts + 1):
        field_ = {}
        for tree in trees:
            for parent, child in tree:
                if parent is None:
                    if attempt == 0:
                        start = np.eye(n, dtype=complex)
                    else:
                        start, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
                    field_[child] = _project(start, blocks[child])
                else:
                    m = trans_b[(parent, child)] @ field_[parent] @ trans_a[(parent, child)].conj().T
                    field_[child] = _project(m, blocks[child])
        f = np.array([field_[x] for x in base.vertices])
        worst = jumps(f)
        best, best_sweep, best_f = worst, 0, f.copy()
        for sweep in range(1, max_sweeps + 1):
            if best <= TOL_NUM:
                break
            for idx, edges, slot, project in classes:
                m = np.zeros((len(idx), n, n), dtype=complex)
                np.add.at(m, slot, pb[edges] @ f[src[edges]] @ pah[edges])
                f[idx] = project(m)
            if sweep % CHECK_EVERY:
                continue
            worst = jumps(f)
            if worst < best - 1e-4:
                best, best_sweep, best_f = worst, sweep, f.copy()
            elif sweep - best_sweep >= STAGNATION_SWEEPS:
                break
        if best <= kappa:
            return {x: best_f[b] for b, x in enumerate(base.vertices)}
    return None


def cstar_correspondences_isomorphic(a: TwistedCorrespondence, b: TwistedCorrespondence,
                                     kappa: float = KAPPA, seed: int = 0) -> dict | None:
    """Unitary field T: ℰ_a → ℰ_b intertwining the left actions and edge-coherent, or None."""
    if a.source != b.source or a.target != b.target:
        raise CoverMismatch("correspondences have different base or target spaces")
    if a.degree != b.degree:
        return None
    blocks = label_blocks(a.source, a.fiber_labels, b.fiber_labels)
    if blocks is None:
        return None
    return unitary_field_search(a.source, blocks, transports(a), transports(b), kappa=kappa, seed=seed)


def unitary_field_report(a: TwistedCorrespondence, b: TwistedCorrespondence, field_: dict) -> dict:
    """Unitarity, intertwining and continuity residuals of a candidate field."""
    phi_a, phi_b = left_action_of(a), left_action_of(b)
    unit = max(float(np.linalg.norm(t.conj().T @ t - np.eye(len(t)), 2)) for t in field_.values())
    inter = 0.0
    for y in set(phi_a.images) | set(phi_b.images):
        pa, pb = phi_a.image(y), phi_b.image(y)
        for k, x in enumerate(a.source.vertices):
            inter = max(inter, float(np.linalg.norm(field_[x] @ pa[k] - pb[k] @ field_[x], 2)))
    jumps = field_residuals(a.source, field_, transports(a), transports(b))
    return {"unitarity": unit, "intertwining": inter, "max_jump": max(jumps.values(), default=0.0)}
