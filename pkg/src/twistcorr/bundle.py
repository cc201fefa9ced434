"""Coverings and twisted coverings assembled from cocycles, and their comparison."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
from networkx.utils import UnionFind

from .cocycle import Gauge, TransitionSystem, from_pairs, pushforward, require_cocycle
from .errors import CoverMismatch, NotGoodCover, ShapeMismatch
from .group import DiagPermUnitary, Permutation, all_permutations
from .space import CechSpace, connected_components


@dataclass(frozen=True, eq=False)
class CoveringSpace:
    """Finite graph covering s: Z → X with chart coordinates.

    ``coords[(i, x, k)]`` is the total vertex over x whose sheet index in chart i is k.
    """

    base: CechSpace
    degree: int
    vertices: tuple
    edges: tuple
    sheet: dict = field(repr=False)
    coords: dict = field(repr=False)
    name: str = "Z"

    def __post_init__(self):
        fibers = {x: [] for x in self.base.vertices}
        for z in self.vertices:
            x = self.sheet.get(z)
            if x not in fibers:
                raise ShapeMismatch(f"total vertex {z} lies over unknown base vertex {x}")
            fibers[x].append(z)
        for x, f in fibers.items():
            if len(f) != self.degree:
                raise ShapeMismatch(f"fiber over {x} has {len(f)} points, expected {self.degree}")
        base_edges = {frozenset(e) for e in self.base.edges}
        for u, v in self.edges:
            if frozenset((self.sheet[u], self.sheet[v])) not in base_edges:
                raise ShapeMismatch(f"edge {u}-{v} does not lie over a base edge")

    def __eq__(self, other):
        if not isinstance(other, CoveringSpace):
            return NotImplemented
        return (self.base == other.base and self.degree == other.degree and self.vertices == other.vertices
                and set(map(frozenset, self.edges)) == set(map(frozenset, other.edges))
                and self.sheet == other.sheet and self.coords == other.coords)

    __hash__ = None

    @cached_property
    def chart_coord(self) -> dict:
        """(z, i) -> sheet index of z in chart i."""
        return {(z, i): k for (i, x, k), z in self.coords.items()}

    @cached_property
    def fibers(self) -> dict:
        """Base vertex -> total vertices in canonical order (sheet index in the least chart)."""
        out = {}
        for x in self.base.vertices:
            i0 = self.base.charts_at[x][0]
            out[x] = [self.coords[(i0, x, k)] for k in range(self.degree)]
        return out

    @cached_property
    def index(self) -> dict:
        return {z: k for k, z in enumerate(self.vertices)}

    @cached_property
    def fiber_position(self) -> dict:
        return {z: k for f in self.fibers.values() for k, z in enumerate(f)}

    @cached_property
    def sheet_charts(self) -> tuple:
        """Labels (i, k) of the sheet charts h_i(U_i × {k}), in order."""
        return tuple((i, k) for i in range(len(self.base.charts)) for k in range(self.degree))

    @cached_property
    def total(self) -> CechSpace:
        """Z as a Čech space covered by its sheet charts."""
        charts = [frozenset(self.coords[(i, x, k)] for x in self.base.charts[i]) for i, k in self.sheet_charts]
        order = [z for x in self.base.vertices for z in self.fibers[x]]
        return CechSpace(self.name, tuple(order), self.edges, tuple(charts))

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def adjacency(self) -> dict:
        return {z: list(self.graph.adj[z]) for z in self.vertices}

    def sheet_chart_index(self, i: int, k: int) -> int:
        return i * self.degree + k

    def canonical_chart(self, z) -> int:
        """Index of the least sheet chart containing z."""
        i0 = self.base.charts_at[self.sheet[z]][0]
        return self.sheet_chart_index(i0, self.chart_coord[(z, i0)])

    def lift(self, z, x2):
        """Unique neighbour of z over the base vertex x2."""
        hits = [w for w in self.adjacency[z] if self.sheet[w] == x2]
        if len(hits) != 1:
            raise ShapeMismatch(f"{len(hits)} lifts of the edge {self.sheet[z]}-{x2} at {z}")
        return hits[0]

    def components(self) -> list[frozenset]:
        return sorted((frozenset(c) for c in nx.connected_components(self.graph)),
                      key=lambda c: min(self.total.index[z] for z in c))

    def restrict(self, subset) -> "CoveringSpace":
        """Covering over the induced subspace on `subset`."""
        subset = frozenset(subset)
        base = self.base.induced(subset)
        keep = [i for i, c in enumerate(self.base.charts) if c & subset]
        renum = {i: n for n, i in enumerate(keep)}
        verts = tuple(z for z in self.vertices if self.sheet[z] in subset)
        vset = set(verts)
        return CoveringSpace(
            base, self.degree, verts,
            tuple(e for e in self.edges if e[0] in vset and e[1] in vset),
            {z: self.sheet[z] for z in verts},
            {(renum[i], x, k): z for (i, x, k), z in self.coords.items() if x in subset},
            self.name,
        )


@dataclass(frozen=True, eq=False)
class LineBundle:
    """Hermitian line bundle on a covering, as a 𝕋-cocycle over the sheet charts of Z."""

    covering: CoveringSpace
    phases: TransitionSystem

    def phase(self, a: int, b: int, z) -> complex:
        return self.phases.data[(a, b)][z].phases[0]


def _require_chart_edges(base: CechSpace) -> None:
    for u, v in base.edges:
        if not set(base.charts_at[u]) & set(base.charts_at[v]):
            raise NotGoodCover(f"edge {u}-{v} lies in no chart, so it cannot be lifted chart-locally")


def build_covering(t: TransitionSystem, name: str | None = None) -> CoveringSpace:
    """Quotient of ⨆ U_i × {0..n-1} by (i, x, k) ~ (j, x, σ_ji(x)(k))."""
    require_cocycle(t)
    base, n = t.base, t.degree
    _require_chart_edges(base)
    uf = UnionFind()
    for (i, j), vals in t.data.items():
        if i >= j:
            continue
        for x, g in vals.items():
            # g_ji sends chart-i coordinates to chart-j coordinates
            s_ji = t.data[(j, i)][x].perm
            for k in range(n):
                uf.union((i, x, k), (j, x, s_ji(k)))
    coords = {}
    for x in base.vertices:
        charts = base.charts_at[x]
        i0 = charts[0]
        for k in range(n):
            root = uf[(i0, x, k)]
            z = (x, k)
            for i in charts:
                for k2 in range(n):
                    if uf[(i, x, k2)] == root:
                        coords[(i, x, k2)] = z
    sheet = {}
    for (i, x, k), z in coords.items():
        sheet[z] = x
    vertices = tuple((x, k) for x in base.vertices for k in range(n))
    edges = set()
    for i in range(len(base.charts)):
        for u, v in base.chart_edges(i):
            for k in range(n):
                a, b = coords[(i, u, k)], coords[(i, v, k)]
                edges.add((a, b))
    edges = _dedupe_edges(edges)
    return CoveringSpace(base, n, vertices, edges, sheet, coords, name or f"{base.name}~{n}")


def _dedupe_edges(edges) -> tuple:
    seen, out = set(), []
    for u, v in edges:
        key = frozenset((u, v))
        if key not in seen:
            seen.add(key)
            out.append((u, v))
    return tuple(sorted(out, key=repr))


def sheet_phase_system(covering: CoveringSpace, t: TransitionSystem) -> TransitionSystem:
    """𝕋-cocycle on the sheet charts: t_{(i,m),(j,l)}(z) = λ_m of g_ij(s(z)) where σ_ij(l) = m."""
    base, n = covering.base, covering.degree
    data = {}
    for (i, j), vals in t.data.items():
        for x, g in vals.items():
            for l in range(n):
                m = g.perm(l)
                z = covering.coords[(j, x, l)]
                a, b = covering.sheet_chart_index(i, m), covering.sheet_chart_index(j, l)
                data.setdefault((a, b), {})[z] = DiagPermUnitary.phase(g.phases[m])
    return TransitionSystem(covering.total, 1, data)


def build_twisted_covering(t: TransitionSystem, name: str | None = None) -> tuple[CoveringSpace, LineBundle]:
    """Covering from the permutation part, line bundle from the phases in chart indexing."""
    require_cocycle(t)
    covering = build_covering(pushforward("perm", t), name)
    return covering, LineBundle(covering, sheet_phase_system(covering, t))


def trivial_line_bundle(covering: CoveringSpace) -> LineBundle:
    return LineBundle(covering, from_pairs(covering.total, 1, {}))


def reassemble(covering: CoveringSpace, line: LineBundle | None = None) -> TransitionSystem:
    """(σ_ij, t_ij) read back from chart coordinates and line-bundle phases."""
    base, n = covering.base, covering.degree
    upper = {}
    for i in range(len(base.charts)):
        for j in range(i + 1, len(base.charts)):
            ov = base.overlap(i, j)
            if not ov:
                continue
            vals = {}
            for x in ov:
                images, phases = [0] * n, [1.0] * n
                for l in range(n):
                    z = covering.coords[(j, x, l)]
                    m = covering.chart_coord[(z, i)]
                    images[l] = m
                    if line is not None:
                        phases[m] = line.phase(covering.sheet_chart_index(i, m), covering.sheet_chart_index(j, l), z)
                vals[x] = DiagPermUnitary(Permutation(tuple(images)), tuple(phases))
            upper[(i, j)] = vals
    return from_pairs(base, n, upper)


def extract_cocycle(covering: CoveringSpace) -> TransitionSystem:
    """Sₙ-valued transition system of a covering from its chart coordinates."""
    return reassemble(covering, None)


def covering_from_graph(base: CechSpace, vertices, edges, sheet: dict, shuffle=None,
                        name: str = "Z") -> CoveringSpace:
    """Chart coordinates for a graph covering, from the components of s⁻¹(U_i).

    Each component must map bijectively onto U_i. `shuffle` (a numpy Generator) relabels sheets randomly.
    """
    vertices = tuple(vertices)
    g = nx.Graph()
    g.add_nodes_from(vertices)
    g.add_edges_from(edges)
    pos = {z: k for k, z in enumerate(vertices)}
    counts = {}
    for z in vertices:
        counts[sheet[z]] = counts.get(sheet[z], 0) + 1
    degrees = set(counts.values())
    if len(degrees) != 1 or set(counts) != set(base.vertices):
        raise ShapeMismatch("fiber sizes are not constant over the base")
    n = degrees.pop()
    coords = {}
    for i, chart in enumerate(base.charts):
        pre = [z for z in vertices if sheet[z] in chart]
        comps = sorted(nx.connected_components(g.subgraph(pre)), key=lambda c: min(pos[z] for z in c))
        if len(comps) != n:
            raise NotGoodCover(f"preimage of chart {i} has {len(comps)} components, expected {n}")
        order = list(range(n)) if shuffle is None else list(shuffle.permutation(n))
        for k, comp in zip(order, comps):
            over = {}
            for z in comp:
                if sheet[z] in over:
                    raise NotGoodCover(f"a component over chart {i} meets the fiber over {sheet[z]} twice")
                over[sheet[z]] = z
            if set(over) != chart:
                raise NotGoodCover(f"a component over chart {i} misses part of the chart")
            for x, z in over.items():
                coords[(i, x, int(k))] = z
    return CoveringSpace(base, n, vertices, _dedupe_edges(edges), dict(sheet), coords, name)


def monodromy(covering: CoveringSpace) -> list[tuple[list, Permutation]]:
    """Permutation of the canonical fiber obtained by lifting each cycle of a cycle basis."""
    out = []
    for cyc in nx.cycle_basis(covering.base.graph):
        start = min(cyc, key=covering.base.index.__getitem__)
        k = cyc.index(start)
        loop = cyc[k:] + cyc[:k]
        fiber = covering.fibers[start]
        images = []
        for z in fiber:
            w = z
            for x2 in loop[1:] + loop[:1]:
                w = covering.lift(w, x2)
            images.append(fiber.index(w))
        out.append((loop, Permutation(tuple(images))))
    return out


def iter_covering_isomorphisms(a: CoveringSpace, b: CoveringSpace, label_a=None, label_b=None):
    """All base-preserving isomorphisms Z_a → Z_b, optionally also preserving labels.

    A base-preserving map of coverings is fixed on each component of Z_a by the image of one point,
    so the search picks a root per component, propagates by lifting edges, and backtracks over roots.
    """
    if a.base != b.base:
        raise CoverMismatch("coverings over different bases")
    if a.degree != b.degree or len(a.edges) != len(b.edges):
        return
    la = (lambda z: None) if label_a is None else label_a.__getitem__
    lb = (lambda z: None) if label_b is None else label_b.__getitem__
    lift_b = {}
    for w in b.vertices:
        for w2 in b.adjacency[w]:
            lift_b[(w, b.sheet[w2])] = w2
    comps = [sorted(c, key=a.total.index.__getitem__) for c in a.components()]

    def propagate(root, image):
        phi = {root: image}
        stack = [root]
        while stack:
            z = stack.pop()
            for z2 in a.adjacency[z]:
                w2 = lift_b.get((phi[z], a.sheet[z2]))
                if w2 is None or la(z2) != lb(w2):
                    return None
                if z2 in phi:
                    if phi[z2] != w2:
                        return None
                else:
                    phi[z2] = w2
                    stack.append(z2)
        return phi

    def search(k, used, acc):
        if k == len(comps):
            yield dict(acc)
            return
        root = comps[k][0]
        for w in b.fibers[a.sheet[root]]:
            if w in used or la(root) != lb(w):
                continue
            part = propagate(root, w)
            if part is None or len(part) != len(comps[k]):
                continue
            image = set(part.values())
            if len(image) != len(part) or image & used:
                continue
            acc.update(part)
            yield from search(k + 1, used | image, acc)
            for z in part:
                del acc[z]

    yield from search(0, frozenset(), {})


def coverings_isomorphic(a: CoveringSpace, b: CoveringSpace, label_a=None, label_b=None) -> dict | None:
    """First base-preserving isomorphism found, or None."""
    return next(iter_covering_isomorphisms(a, b, label_a, label_b), None)


def chart_permutations(phi: dict, a: CoveringSpace, b: CoveringSpace) -> dict:
    """For an isomorphism phi, the sheet-chart map (i, k) ↦ (i, π_i(k)); NotGoodCover if sheets split."""
    out = {}
    for i, chart in enumerate(a.base.charts):
        for k in range(a.degree):
            targets = {b.chart_coord[(phi[a.coords[(i, x, k)]], i)] for x in chart}
            if len(targets) != 1:
                raise NotGoodCover(f"sheet ({i},{k}) is not mapped into a single sheet")
            out[(i, k)] = targets.pop()
    return out


def _pulled_phases(phi: dict, la: LineBundle, lb: LineBundle, combine) -> TransitionSystem:
    a, b = la.covering, lb.covering
    perms = chart_permutations(phi, a, b)

    def image(alpha):
        i, k = a.sheet_charts[alpha]
        return b.sheet_chart_index(i, perms[(i, k)])

    data = {}
    for (p, q), vals in la.phases.data.items():
        pa, qa = image(p), image(q)
        data[(p, q)] = {z: DiagPermUnitary.phase(combine(g.phases[0], lb.phase(pa, qa, phi[z])))
                        for z, g in vals.items()}
    return TransitionSystem(a.total, 1, data)


def pull_back_line(phi: dict, la: LineBundle, lb: LineBundle) -> TransitionSystem:
    """Phases of lb pulled back along phi, indexed by the sheet charts of la's covering."""
    return _pulled_phases(phi, la, lb, lambda own, pulled: pulled)


def line_bundles_isomorphic_over(phi: dict, la: LineBundle, lb: LineBundle) -> bool:
    """Whether φ*lb ≅ la, decided by the Chern class of la ⊗ conj(φ*lb)."""
    from .cohomology import chern_class

    return chern_class(_pulled_phases(phi, la, lb, lambda own, pulled: own * pulled.conjugate())).is_zero()


def perm_cocycles_equivalent(t1: TransitionSystem, t2: TransitionSystem, accept=None):
    """Gauge r with σ2_ij = r_i⁻¹ σ1_ij r_j, constant on chart components, or None.

    `accept(i, component, perm)` can veto the value of r_i on a component of chart i.
    """
    base, n = t1.base, t1.degree
    if t2.base != base or t2.degree != n:
        raise CoverMismatch("systems over different covers")
    nodes, where, members = [], {}, {}
    for i, chart in enumerate(base.charts):
        for c, comp in enumerate(connected_components(base, chart)):
            nodes.append((i, c))
            members[(i, c)] = comp
            for x in comp:
                where[(i, x)] = (i, c)
    links = {}
    for (i, j), vals in t1.data.items():
        if i == j:
            continue
        for x in vals:
            links.setdefault(where[(i, x)], []).append((where[(j, x)], i, j, x))
    perms = all_permutations(n)
    assign: dict = {}
    for start in nodes:
        if start in assign:
            continue
        found = None
        for r0 in perms:
            if accept is not None and not accept(start[0], members[start], r0):
                continue
            trial = {start: r0}
            queue, ok = [start], True
            while queue and ok:
                u = queue.pop()
                for v, i, j, x in links.get(u, []):
                    # r_j = σ1_ij⁻¹ r_i σ2_ij
                    rv = t1.data[(i, j)][x].perm.inverse() * trial[u] * t2.data[(i, j)][x].perm
                    if v in trial:
                        if trial[v] != rv:
                            ok = False
                            break
                    elif accept is not None and not accept(v[0], members[v], rv):
                        ok = False
                        break
                    else:
                        trial[v] = rv
                        queue.append(v)
            if ok:
                found = trial
                break
        if found is None:
            return None
        assign.update(found)
    maps = {i: {x: DiagPermUnitary.from_perm(assign[where[(i, x)]]) for x in chart}
            for i, chart in enumerate(base.charts)}
    return Gauge(n, maps)
