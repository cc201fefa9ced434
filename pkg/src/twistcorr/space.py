"""Finite Čech models: a graph with an open cover and the nerve of that cover."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx

from .errors import NotGoodCover, UnknownVertex

MAX_NERVE_DIM = 3


@dataclass(frozen=True)
class CechSpace:
    """Graph (vertices, edges) with charts covering it.

    Vertex order is significant: it is the canonical order used by every fiber table.
    """

    name: str
    vertices: tuple
    edges: tuple
    charts: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        index = {v: k for k, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError(f"{self.name}: duplicate vertices")
        edges = set()
        for u, v in self.edges:
            if u not in index or v not in index:
                raise UnknownVertex(f"{self.name}: edge {u}-{v} references an unknown vertex")
            if u == v:
                raise ValueError(f"{self.name}: self-loop at {u}")
            edges.add((u, v) if index[u] < index[v] else (v, u))
        object.__setattr__(self, "edges", tuple(sorted(edges, key=lambda e: (index[e[0]], index[e[1]]))))
        charts = tuple(frozenset(c) for c in self.charts)
        if not charts:
            raise ValueError(f"{self.name}: no charts")
        for i, c in enumerate(charts):
            if not c:
                raise ValueError(f"{self.name}: chart {i} is empty")
            if not c <= index.keys():
                raise UnknownVertex(f"{self.name}: chart {i} references unknown vertices")
        covered = frozenset().union(*charts)
        if covered != frozenset(self.vertices):
            raise ValueError(f"{self.name}: charts do not cover the vertex set")
        object.__setattr__(self, "charts", charts)

    @cached_property
    def index(self) -> dict:
        return {v: k for k, v in enumerate(self.vertices)}

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: sorted(ns, key=self.index.__getitem__) for v, ns in adj.items()}

    @cached_property
    def charts_at(self) -> dict:
        """Chart indices containing each vertex, ascending."""
        out = {v: [] for v in self.vertices}
        for i, c in enumerate(self.charts):
            for v in c:
                out[v].append(i)
        return out

    def sorted_vertices(self, subset) -> list:
        return sorted(subset, key=self.index.__getitem__)

    def overlap(self, *idx) -> frozenset:
        out = self.charts[idx[0]]
        for i in idx[1:]:
            out = out & self.charts[i]
        return out

    def chart_edges(self, i: int) -> list:
        c = self.charts[i]
        return [e for e in self.edges if e[0] in c and e[1] in c]

    def induced(self, subset, name: str | None = None) -> "CechSpace":
        """Restriction to a vertex subset, keeping the nonempty chart intersections in order."""
        subset = frozenset(subset)
        charts = [c & subset for c in self.charts if c & subset]
        return CechSpace(
            name or f"{self.name}|sub",
            tuple(v for v in self.vertices if v in subset),
            tuple(e for e in self.edges if e[0] in subset and e[1] in subset),
            tuple(charts),
        )


def connected_components(space: CechSpace, subset=None) -> list[frozenset]:
    """Components of the induced subgraph on `subset`, ordered by their least vertex."""
    if subset is None:
        subset = space.vertices
    subset = set(subset)
    missing = subset - space.index.keys()
    if missing:
        raise UnknownVertex(f"unknown vertices {sorted(map(str, missing))[:5]}")
    comps = [frozenset(c) for c in nx.connected_components(space.graph.subgraph(subset))]
    return sorted(comps, key=lambda c: min(space.index[v] for v in c))


@dataclass(frozen=True)
class Nerve:
    """Simplices of the nerve by dimension, each a sorted tuple of chart indices."""

    simplices: tuple
    supports: dict = field(compare=False, repr=False)

    def dim(self, k: int) -> tuple:
        return self.simplices[k] if k < len(self.simplices) else ()


def nerve(space: CechSpace, max_dim: int = MAX_NERVE_DIM) -> Nerve:
    """Nerve up to dimension `max_dim`, built by extending lower simplices."""
    simplices = [tuple((i,) for i in range(len(space.charts)))]
    supports = {(i,): space.charts[i] for i in range(len(space.charts))}
    for k in range(1, max_dim + 1):
        layer = []
        for s in simplices[-1]:
            for j in range(s[-1] + 1, len(space.charts)):
                common = supports[s] & space.charts[j]
                if common:
                    t = s + (j,)
                    supports[t] = common
                    layer.append(t)
        simplices.append(tuple(layer))
    return Nerve(tuple(simplices), supports)


@dataclass(frozen=True)
class CoverReport:
    good: bool
    entries: tuple  # (chart tuple, number of components)

    def bad(self) -> list:
        return [e for e in self.entries if e[1] != 1]


def validate_good_cover(space: CechSpace) -> CoverReport:
    """Connectivity of charts and of every nonempty double and triple intersection."""
    nv = nerve(space, 2)
    entries = []
    for k in range(3):
        for s in nv.dim(k):
            entries.append((s, len(connected_components(space, nv.supports[s]))))
    return CoverReport(all(c == 1 for _, c in entries), tuple(entries))


def require_good_cover(space: CechSpace) -> None:
    report = _good_cover_cached(space)
    if not report.good:
        bad = report.bad()[0]
        raise NotGoodCover(f"{space.name}: intersection of charts {bad[0]} has {bad[1]} components")


def _good_cover_cached(space: CechSpace) -> CoverReport:
    cached = space.__dict__.get("_cover_report")
    if cached is None:
        cached = validate_good_cover(space)
        space.__dict__["_cover_report"] = cached
    return cached


def spanning_tree(space: CechSpace, subset, root=None) -> list[tuple]:
    """BFS tree edges (parent, child) of a connected subset, rooted at its least vertex."""
    subset = set(subset)
    if root is None:
        root = min(subset, key=space.index.__getitem__)
    order = [(None, root)]
    seen = {root}
    head = 0
    while head < len(order):
        _, v = order[head]
        head += 1
        for w in space.adjacency[v]:
            if w in subset and w not in seen:
                seen.add(w)
                order.append((v, w))
    if len(seen) != len(subset):
        raise NotGoodCover("subset is not connected")
    return order


def closed_star(space: CechSpace, v) -> frozenset:
    return frozenset([v, *space.adjacency[v]])
