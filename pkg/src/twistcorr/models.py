"""Fixed Čech models of the base spaces used by the gallery."""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .space import CechSpace

CIRCLE_SIZE = 12
INTERVAL_SIZE = 21


def circle(size: int = CIRCLE_SIZE, arcs: int = 3) -> CechSpace:
    """Polygon with `arcs` charts of consecutive vertices meeting in single vertices."""
    if size % arcs:
        raise ValueError("size must be divisible by the number of arcs")
    step = size // arcs
    charts = [frozenset((a * step + t) % size for t in range(step + 1)) for a in range(arcs)]
    edges = [(k, (k + 1) % size) for k in range(size)]
    return CechSpace("circle", tuple(range(size)), tuple(edges), tuple(charts))


def circle_two_arcs(size: int = CIRCLE_SIZE) -> CechSpace:
    """Two arcs whose intersection is two antipodal pieces: not a good cover."""
    half = size // 2
    charts = [frozenset(range(0, half + 2)), frozenset(list(range(half, size)) + [0, 1])]
    edges = [(k, (k + 1) % size) for k in range(size)]
    return CechSpace("circle-2arc", tuple(range(size)), tuple(edges), tuple(charts))


def circle_angle(k: int, size: int = CIRCLE_SIZE) -> float:
    return 2 * math.pi * k / size


def interval(size: int = INTERVAL_SIZE) -> CechSpace:
    """Path on parameters -1, -1 + h, ..., 1 with two overlapping charts."""
    mid = size // 2
    charts = [frozenset(range(0, mid + 2)), frozenset(range(mid - 1, size))]
    edges = [(k, k + 1) for k in range(size - 1)]
    return CechSpace("interval", tuple(range(size)), tuple(edges), tuple(charts))


def interval_parameter(k: int, size: int = INTERVAL_SIZE) -> float:
    return -1 + 2 * k / (size - 1)


def square(size: int = INTERVAL_SIZE) -> CechSpace:
    """Grid on [-1,1]² with vertex id size*i + j and four overlapping rectangular charts."""
    mid = size // 2
    lo, hi = range(0, mid + 2), range(mid - 1, size)
    charts = [frozenset(size * i + j for i in rows for j in cols) for rows in (lo, hi) for cols in (lo, hi)]
    edges = []
    for i in range(size):
        for j in range(size):
            if i + 1 < size:
                edges.append((size * i + j, size * (i + 1) + j))
            if j + 1 < size:
                edges.append((size * i + j, size * i + j + 1))
    return CechSpace("square", tuple(range(size * size)), tuple(edges), tuple(charts))


def point(name: str = "point") -> CechSpace:
    return CechSpace(name, (0,), (), (frozenset([0]),))


def discrete(labels, name: str = "discrete") -> CechSpace:
    labels = tuple(labels)
    return CechSpace(name, labels, (), (frozenset(labels),))


def _barycentric_star_cover(name: str, nverts: int, edges, faces, positions=None):
    """Barycentric subdivision of a 2-complex covered by the open stars of the original vertices."""
    vid = [f"v{i}" for i in range(nverts)]
    eid = {e: "e" + "".join(map(str, e)) for e in edges}
    fid = {f: "f" + "".join(map(str, f)) for f in faces}
    verts = vid + list(eid.values()) + list(fid.values())
    sub_edges = []
    for e, name_e in eid.items():
        sub_edges += [(vid[e[0]], name_e), (vid[e[1]], name_e)]
    for f, name_f in fid.items():
        sub_edges += [(vid[v], name_f) for v in f]
        sub_edges += [(eid[e], name_f) for e in combinations(f, 2)]
    charts = []
    for i in range(nverts):
        star = {vid[i]} | {eid[e] for e in edges if i in e} | {fid[f] for f in faces if i in f}
        charts.append(frozenset(star))
    space = CechSpace(name, tuple(verts), tuple(sub_edges), tuple(charts))
    coords = None
    if positions is not None:
        coords = {vid[i]: positions[i] for i in range(nverts)}
        for e, n in eid.items():
            coords[n] = sum(positions[v] for v in e) / 2
        for f, n in fid.items():
            coords[n] = sum(positions[v] for v in f) / 3
        coords = {k: v / np.linalg.norm(v) for k, v in coords.items()}
    return space, coords


OCTAHEDRON = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)
NORTH = 2


def sphere():
    """Barycentric octahedron; charts are the open stars of ±x, ±y, ±z (in that index order:
    0:+x, 1:+y, 2:+z, 3:-x, 4:-y, 5:-z). Returns (space, unit positions)."""
    edges = [e for e in combinations(range(6), 2) if abs(e[0] - e[1]) != 3]
    faces = [f for f in combinations(range(6), 3) if all(abs(a - b) != 3 for a, b in combinations(f, 2))]
    return _barycentric_star_cover("sphere", 6, edges, faces, OCTAHEDRON)


def icosahedron() -> tuple[np.ndarray, list]:
    g = (1 + math.sqrt(5)) / 2
    pts = []
    for a in (1, -1):
        for b in (g, -g):
            pts += [(0, a, b), (a, b, 0), (b, 0, a)]
    pts = np.array(pts, dtype=float)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    adj = [(i, j) for i in range(12) for j in range(i + 1, 12) if abs(d[i, j] - 2) < 1e-9]
    return pts, adj


def projective_plane():
    """Six-vertex ℝP² (icosahedron modulo the antipodal map), barycentrically subdivided.

    Returns (space, representatives, lifted_adjacent): representatives[i] is the chosen icosahedron
    vertex for projective vertex i, and lifted_adjacent[(i, j)] says whether those chosen lifts are adjacent.
    """
    pts, adj = icosahedron()
    adjacent = {frozenset(e) for e in adj}
    reps, seen = [], set()
    for k, p in enumerate(pts):
        anti = int(np.argmin(np.linalg.norm(pts + p, axis=1)))
        if k in seen or anti in seen:
            continue
        seen |= {k, anti}
        reps.append((k, anti))
    cls = {}
    for i, (k, anti) in enumerate(reps):
        cls[k] = cls[anti] = i
    edges = sorted({tuple(sorted((cls[a], cls[b]))) for a, b in adj})
    tri = set()
    for a, b in adj:
        for c in range(12):
            if frozenset((a, c)) in adjacent and frozenset((b, c)) in adjacent:
                tri.add(tuple(sorted((cls[a], cls[b], cls[c]))))
    faces = sorted(tri)
    space, _ = _barycentric_star_cover("projective-plane", 6, edges, faces)
    representatives = [pts[k] for k, _ in reps]
    lifted_adjacent = {(i, j): frozenset((reps[i][0], reps[j][0])) in adjacent
                       for i in range(6) for j in range(6) if i != j}
    return space, representatives, lifted_adjacent


def azimuth(v: np.ndarray) -> float:
    return math.atan2(v[1], v[0])
