"""Spectra of the canonical abelian subalgebras and the constant-rank reconstruction checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher
from networkx.utils import UnionFind

from .bundle import CoveringSpace, LineBundle, covering_from_graph, line_bundles_isomorphic_over
from .cartan import CartanData, twisted_from_cartan
from .cocycle import TransitionSystem
from .correspondence import (TwistedCorrespondence, correspondences_isomorphic, cstar_correspondences_isomorphic,
                             left_action_of, module_of)
from .errors import CoverMismatch, NotConstantRank, ShapeMismatch
from .group import DiagPermUnitary
from .space import CechSpace, closed_star, spanning_tree


@dataclass(frozen=True, eq=False)
class BranchedSpectrum:
    """Quotient of Z by a fiberwise equivalence: ``members[v]`` are the sheets glued into v."""

    base: CechSpace
    target: CechSpace
    vertices: tuple
    edges: tuple
    sheet: dict = field(repr=False)
    range: dict = field(repr=False)
    multiplicity: dict = field(repr=False)
    members: dict = field(repr=False)

    @cached_property
    def fibers(self) -> dict:
        out = {x: [] for x in self.base.vertices}
        for v in self.vertices:
            out[self.sheet[v]].append(v)
        return out

    def fiber_counts(self) -> dict:
        return {x: len(f) for x, f in self.fibers.items()}

    def is_constant(self) -> bool:
        return len(set(self.fiber_counts().values())) <= 1

    def branch_set(self) -> frozenset:
        """Vertices with a neighbour of different fiber count."""
        counts = self.fiber_counts()
        return frozenset(x for x in self.base.vertices if any(counts[w] != counts[x] for w in self.base.adjacency[x]))

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g


def _spectrum_from_classes(c: TwistedCorrespondence, classes: dict) -> BranchedSpectrum:
    """``classes[x]`` lists the glued groups of the canonical fiber over x."""
    vertices, sheet, rng, mult, members, where = [], {}, {}, {}, {}, {}
    for x in c.source.vertices:
        for idx, group in enumerate(classes[x]):
            v = (x, idx)
            vertices.append(v)
            sheet[v], rng[v], mult[v], members[v] = x, c.range[group[0]], len(group), tuple(group)
            for z in group:
                where[z] = v
    edges = set()
    for u, w in c.covering.edges:
        a, b = where[u], where[w]
        if frozenset((a, b)) not in edges:
            edges.add(frozenset((a, b)))
    edge_list = tuple(sorted((tuple(sorted(e, key=repr)) for e in edges), key=repr))
    return BranchedSpectrum(c.source, c.target, tuple(vertices), edge_list, sheet, rng, mult, members)


def _group_by_range(c: TwistedCorrespondence, x) -> list[list]:
    groups: dict = {}
    for z in c.covering.fibers[x]:
        groups.setdefault(c.range[z], []).append(z)
    return list(groups.values())


def generated_subalgebra_spectrum(c: TwistedCorrespondence) -> BranchedSpectrum:
    """Z modulo (same source, same range): the spectrum of the algebra generated by ι and φ."""
    return _spectrum_from_classes(c, {x: _group_by_range(c, x) for x in c.source.vertices})


def double_commutant_spectrum(c: TwistedCorrespondence) -> BranchedSpectrum:
    """Off the branch set B the gluing is by range; on B it is inherited from already decided neighbours.

    B vertices are decided in breadth-first layers starting from the neighbours of X \\ B: two sheets over
    x ∈ B are glued iff they share a range value and their lifts are glued over some decided neighbour.
    Components of B with no decided vertex keep the gluing by range.
    """
    gen = generated_subalgebra_spectrum(c)
    branch = gen.branch_set()
    cov = c.covering
    glued: dict = {}
    for x in c.source.vertices:
        if x not in branch:
            glued[x] = {z: i for i, g in enumerate(_group_by_range(c, x)) for z in g}
    frontier = [x for x in c.source.vertices if x not in branch]
    while frontier:
        layer = []
        for x in c.source.vertices:
            if x in glued or not any(w in glued for w in c.source.adjacency[x]):
                continue
            layer.append(x)
        new = {}
        for x in layer:
            fiber = cov.fibers[x]
            uf = UnionFind(fiber)
            for w in c.source.adjacency[x]:
                if w not in glued:
                    continue
                for a in range(len(fiber)):
                    for b in range(a + 1, len(fiber)):
                        za, zb = fiber[a], fiber[b]
                        if c.range[za] == c.range[zb] and glued[w][cov.lift(za, w)] == glued[w][cov.lift(zb, w)]:
                            uf.union(za, zb)
            new[x] = {z: repr(uf[z]) for z in fiber}
        glued.update(new)
        frontier = layer
    classes = {}
    for x in c.source.vertices:
        if x not in glued:
            classes[x] = _group_by_range(c, x)
            continue
        groups: dict = {}
        for z in cov.fibers[x]:
            groups.setdefault(glued[x][z], []).append(z)
        classes[x] = list(groups.values())
    return _spectrum_from_classes(c, classes)


def joint_spectrum_classes(c: TwistedCorrespondence, x) -> list[tuple]:
    """Joint eigenvalue classes of {φ(δ_y)_x}, as sets of canonical fiber positions (cross-check oracle)."""
    from .linalg import simultaneous_diagonalize

    phi = left_action_of(c)
    b = c.source.index[x]
    family = [img[b] for img in phi.images.values()]
    u, tuples = simultaneous_diagonalize(family)
    groups: dict = {}
    for col, tup in enumerate(tuples):
        pos = int(np.argmax(np.abs(u[:, col])))
        groups.setdefault(tuple(round(float(np.real(v))) for v in tup), []).append(pos)
    return sorted(tuple(sorted(g)) for g in groups.values())


def spectra_iso_iota_phi(a: BranchedSpectrum, b: BranchedSpectrum, match_multiplicity: bool = False) -> dict | None:
    """Base- and range-preserving isomorphism of decorated spectra, or None.

    Fibers whose range decorations are distinct are matched directly; otherwise a labelled graph search decides.
    """
    if a.base != b.base or a.target != b.target:
        raise CoverMismatch("spectra over different spaces")

    def key(s, v):
        return (s.range[v], s.multiplicity[v]) if match_multiplicity else (s.range[v],)

    for x in a.base.vertices:
        if sorted(repr(key(a, v)) for v in a.fibers[x]) != sorted(repr(key(b, v)) for v in b.fibers[x]):
            return None
    unique = all(len({key(s, v) for v in s.fibers[x]}) == len(s.fibers[x]) for s in (a, b) for x in a.base.vertices)
    if unique:
        psi = {}
        for x in a.base.vertices:
            lookup = {key(b, w): w for w in b.fibers[x]}
            for v in a.fibers[x]:
                psi[v] = lookup[key(a, v)]
        ea = {frozenset((psi[u], psi[v])) for u, v in a.edges}
        eb = {frozenset(e) for e in b.edges}
        return psi if ea == eb else None
    ga, gb = a.graph.copy(), b.graph.copy()
    for s, g in ((a, ga), (b, gb)):
        for v in s.vertices:
            g.nodes[v]["key"] = (s.sheet[v], key(s, v))
    gm = GraphMatcher(ga, gb, node_match=lambda p, q: p["key"] == q["key"])
    return next(gm.isomorphisms_iter(), None)


def spectrum_covering(s: BranchedSpectrum, name: str = "spectrum") -> CoveringSpace:
    """The spectrum as a covering of X; requires constant fiber count."""
    if not s.is_constant():
        raise NotConstantRank(f"fiber counts range over {sorted(set(s.fiber_counts().values()))}")
    return covering_from_graph(s.base, s.vertices, s.edges, s.sheet, name=name)


def spectrum_cartan(c: TwistedCorrespondence, s: BranchedSpectrum) -> CartanData:
    """Projections p_v = Σ_{z glued into v} e_z e_z* over the spectrum covering."""
    cov = spectrum_covering(s)
    n = c.degree
    proj = {}
    for v in s.vertices:
        p = np.zeros((n, n), dtype=complex)
        for z in s.members[v]:
            k = c.covering.fiber_position[z]
            p[k, k] = 1.0
        proj[v] = p
    return CartanData(cov, proj)


def reconstruct_from_spectrum(c: TwistedCorrespondence, s: BranchedSpectrum, name: str = "E") -> TwistedCorrespondence:
    """Correspondence read off a multiplicity-one spectrum through its Cartan subalgebra."""
    return twisted_from_cartan(spectrum_cartan(c, s), module_of(c), left_action_of(c), name=name)


def restrict_to_star(c: TwistedCorrespondence, x) -> TwistedCorrespondence:
    return c.restrict(closed_star(c.source, x), name=f"{c.name}|star({x})")


def locally_conjugate(a: TwistedCorrespondence, b: TwistedCorrespondence) -> tuple[bool, list]:
    """Whether the restrictions to every closed vertex star are isomorphic; returns (verdict, failing vertices)."""
    if a.source != b.source or a.target != b.target:
        raise CoverMismatch("correspondences over different spaces")
    bad = []
    for x in a.source.vertices:
        if correspondences_isomorphic(restrict_to_star(a, x), restrict_to_star(b, x)) is None:
            bad.append(x)
    return not bad, bad


def locally_isomorphic(a: TwistedCorrespondence, b: TwistedCorrespondence) -> tuple[bool, list]:
    """Whether the C*-correspondences are isomorphic over every closed vertex star (unitary-field search)."""
    bad = []
    for x in a.source.vertices:
        if cstar_correspondences_isomorphic(restrict_to_star(a, x), restrict_to_star(b, x)) is None:
            bad.append(x)
    return not bad, bad


def determinant_line(c: TwistedCorrespondence, s: BranchedSpectrum, cov: CoveringSpace) -> LineBundle:
    """det of p_v ℰ over the spectrum covering, from orthonormal frames transported along chart trees."""
    module = module_of(c)
    base = cov.base
    proj = spectrum_cartan(c, s).projections
    frames = {}
    for alpha, (i, k) in enumerate(cov.sheet_charts):
        vecs = {}
        for parent, x in spanning_tree(base, base.charts[i]):
            v = cov.coords[(i, x, k)]
            p = proj[v]
            if parent is None:
                cols = [c.covering.fiber_position[z] for z in s.members[v]]
                vecs[v] = np.eye(c.degree, dtype=complex)[:, sorted(cols)]
            else:
                m = p @ module.transports[(parent, x)] @ vecs[cov.coords[(i, parent, k)]]
                u, _, vh = np.linalg.svd(m, full_matrices=False)
                vecs[v] = u @ vh
        frames[alpha] = vecs
    total = cov.total
    data = {}
    for alpha in range(len(total.charts)):
        for beta in range(len(total.charts)):
            common = total.charts[alpha] & total.charts[beta]
            if common:
                vals = {}
                for v in common:
                    d = np.linalg.det(frames[alpha][v].conj().T @ frames[beta][v])
                    vals[v] = DiagPermUnitary.phase(d / abs(d))
                data[(alpha, beta)] = vals
    return LineBundle(cov, TransitionSystem(total, 1, data))


@dataclass(frozen=True)
class Verdict:
    isomorphic: bool
    locally_conjugate: bool
    bundles_match: bool
    witnesses: dict

    @property
    def label(self) -> str:
        return "isomorphic" if self.isomorphic else "not isomorphic"


def constant_rank_iso_check(a: TwistedCorrespondence, b: TwistedCorrespondence,
                            algebra: str = "generated") -> Verdict:
    """Isomorphic iff (a) locally conjugate and (b) the modules over the common spectrum agree.

    (b) compares fiberwise ranks and the Chern classes of the determinant line bundles, pulled back
    along the unique decorated spectrum isomorphism.
    """
    if algebra not in ("generated", "double_commutant"):
        raise ValueError(f"unknown algebra {algebra!r}")
    spec = generated_subalgebra_spectrum if algebra == "generated" else double_commutant_spectrum
    sa, sb = spec(a), spec(b)
    for s in (sa, sb):
        if not s.is_constant():
            raise NotConstantRank(f"{algebra} spectrum has fiber counts {sorted(set(s.fiber_counts().values()))}")
    local, bad = locally_conjugate(a, b)
    witnesses: dict = {"non_conjugate_vertices": bad}
    psi = spectra_iso_iota_phi(sa, sb, match_multiplicity=True)
    witnesses["spectrum_isomorphism"] = psi
    bundles = False
    if psi is not None:
        ca, cb = spectrum_covering(sa), spectrum_covering(sb)
        la, lb = determinant_line(a, sa, ca), determinant_line(b, sb, cb)
        bundles = line_bundles_isomorphic_over(psi, la, lb)
    witnesses["determinant_classes_match"] = bundles
    return Verdict(local and bundles, local, bundles, witnesses)
