"""Code-defined example instances: spaces, generating cocycles and correspondences."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import models
from .bundle import build_twisted_covering
from .cocycle import TransitionSystem, constant_perm_system, from_pairs, phase_system, require_cocycle
from .correspondence import TwistedCorrespondence, make_correspondence
from .group import DiagPermUnitary, Permutation, cycle_type_representative, partitions
from .space import CechSpace


@dataclass(frozen=True, eq=False)
class GalleryInstance:
    name: str
    summary: str
    cocycle: TransitionSystem
    correspondence: TwistedCorrespondence
    extra: dict = field(default_factory=dict)

    @property
    def source(self) -> CechSpace:
        return self.cocycle.base

    @property
    def target(self) -> CechSpace:
        return self.correspondence.target


def _instance(name, summary, t, target, range_of, **extra) -> GalleryInstance:
    require_cocycle(t)
    cov, line = build_twisted_covering(t, name=name)
    c = make_correspondence(cov, line, target, range_of, name=name)
    return GalleryInstance(name, summary, t, c, extra)


def value_graph(name: str, pairs) -> CechSpace:
    """Target graph on the attained values, with an edge for every pair of adjacent distinct values."""
    verts = sorted({v for p in pairs for v in p})
    edges = sorted({tuple(sorted(p)) for p in pairs if p[0] != p[1]})
    return CechSpace(name, tuple(verts), tuple(edges), (frozenset(verts),))


def _graph_target(name: str, t: TransitionSystem, values) -> CechSpace:
    """Target graph for a range map given on (base vertex, sheet) over a trivial covering."""
    base, n = t.base, t.degree
    pairs = [(values(x, k), values(x, k)) for x in base.vertices for k in range(n)]
    for u, v in base.edges:
        for k in range(n):
            pairs.append((values(u, k), values(v, k)))
    return value_graph(name, pairs)


# ---------------------------------------------------------------- circle covers

def circle_cover_cocycle(n: int, parts, base: CechSpace | None = None) -> TransitionSystem:
    """Degree-n cocycle on the 3-arc circle with a permutation of the given cycle type on the overlap (0, 2)."""
    base = base or models.circle()
    return constant_perm_system(base, n, {(0, 2): cycle_type_representative(parts)})


def circle_cover(n: int, parts) -> GalleryInstance:
    label = "+".join(map(str, parts))
    t = circle_cover_cocycle(n, parts)
    return _instance(f"circle-covers/{n}/{label}", f"{n}-sheeted cover of the circle with monodromy type {label}",
                     t, models.point(), lambda z: 0, parts=tuple(parts))


def circle_phases() -> GalleryInstance:
    """Connected 2-cover with nonconstant phases on the overlaps."""
    base = models.circle()
    sw = Permutation((1, 0))
    upper = {
        (0, 1): {4: DiagPermUnitary(Permutation((0, 1)), (1j, -1))},
        (1, 2): {8: DiagPermUnitary(Permutation((0, 1)), (np.exp(0.7j), np.exp(-2.1j)))},
        (0, 2): {0: DiagPermUnitary(sw, (-1j, 1))},
    }
    t = from_pairs(base, 2, upper)
    return _instance("circle-phases", "connected 2-cover of the circle with phase twists", t,
                     models.discrete([0]), lambda z: 0)


# ---------------------------------------------------------------- sphere and projective plane

def s2_clutching_cocycle(w: int) -> TransitionSystem:
    """𝕋-cocycle on the octahedral sphere: e^{iwφ} from every equatorial chart into the north chart."""
    space, pos = models.sphere()
    north = models.NORTH
    upper = {}
    for j in range(len(space.charts)):
        if j == north:
            continue
        ov = space.overlap(north, j)
        if not ov:
            continue
        vals = {x: np.exp(1j * w * models.azimuth(pos[x])) for x in ov}
        if j > north:
            upper[(north, j)] = vals
        else:
            upper[(j, north)] = {x: v.conjugate() for x, v in vals.items()}
    return phase_system(space, upper)


def s2_line_bundle(w: int) -> GalleryInstance:
    t = s2_clutching_cocycle(w)
    return _instance(f"s2-line-bundle/{w}", f"line bundle on the sphere with clutching winding {w}", t,
                     models.point(), lambda z: 0, winding=w)


def rp2_antipodal_cocycle() -> TransitionSystem:
    """S₂-cocycle of the sphere double cover of ℝP²: swap exactly where the chosen lifts are not adjacent."""
    space, _, adjacent = models.projective_plane()
    sw = Permutation((1, 0))
    perms = {(i, j): sw for (i, j), adj in adjacent.items() if i < j and not adj and space.overlap(i, j)}
    return constant_perm_system(space, 2, perms)


def rp2_antipodal() -> GalleryInstance:
    t = rp2_antipodal_cocycle()
    return _instance("rp2-antipodal", "antipodal double cover of the projective plane", t, models.point(), lambda z: 0)


# ---------------------------------------------------------------- worked examples

def example_circle_two_points() -> GalleryInstance:
    """X = Y = circle, trivial 2-cover, sheet k sent to the fixed point x_k (x₁ = 0, x₂ = 6)."""
    base = models.circle()
    t = constant_perm_system(base, 2, {})
    points = (0, 6)
    return _instance("circle-two-points", "trivial 2-cover of the circle with range the two points 0 and 6",
                     t, models.circle(), lambda z: points[z[1]], points=points)


def different_ranges(which: str) -> GalleryInstance:
    """Interval, trivial 2-cover; r₁ = (x, −x), r₂ = (|x|, −|x|), in parameter indices."""
    base = models.interval()
    top = len(base.vertices) - 1
    t = constant_perm_system(base, 2, {})

    def mirror(k):
        return top - k

    if which == "r1":
        values = lambda x, k: x if k == 0 else mirror(x)  # noqa: E731
    elif which == "r2":
        values = lambda x, k: max(x, mirror(x)) if k == 0 else min(x, mirror(x))  # noqa: E731
    else:
        raise ValueError(which)
    return _instance(f"example-different-ranges/{which}", f"interval with range map {which} on the trivial 2-cover",
                     t, models.interval(), lambda z: values(*z))


def _tenths(k: int, size: int) -> int:
    return 2 * k * 10 // (size - 1) - 10


def square_values(which: str, size: int = models.INTERVAL_SIZE):
    """Range values in units of 1/1000: ±y|x²−y²| (r1) or ±|y||x²−y²| (r2) where |x| < |y|, else 0."""
    def values(v, k):
        i, j = divmod(v, size)
        x, y = _tenths(j, size), _tenths(i, size)
        if abs(x) >= abs(y):
            return 0
        mag = (y if which == "r1" else abs(y)) * abs(x * x - y * y)
        return mag if k == 0 else -mag
    return values


def square_target() -> CechSpace:
    """Common target for both square range maps: all attained values, edges from both maps."""
    t = constant_perm_system(models.square(), 2, {})
    a, b = (_graph_target("square-values", t, square_values(w)) for w in ("r1", "r2"))
    verts = sorted(set(a.vertices) | set(b.vertices))
    edges = sorted(set(a.edges) | set(b.edges))
    return CechSpace("square-values", tuple(verts), tuple(edges), (frozenset(verts),))


def square_example(which: str) -> GalleryInstance:
    if which not in ("r1", "r2"):
        raise ValueError(which)
    base = models.square()
    t = constant_perm_system(base, 2, {})
    values = square_values(which)
    target = square_target()
    return _instance(f"square-example/{which}", f"square with range map {which} on the trivial 2-cover",
                     t, target, lambda z: values(*z), unit=Fraction(1, 1000))


def plateau_values(which: str, size: int = models.INTERVAL_SIZE):
    """f = x + ½ left of −½, 0 on [−½, ½], x − ½ right of ½, in tenths; r1 = (f, −f), r2 = (|f|, −|f|)."""
    def f(k):
        x = _tenths(k, size)
        return x + 5 if x < -5 else (x - 5 if x > 5 else 0)

    def values(k, sheet):
        v = f(k) if which == "r1" else abs(f(k))
        return v if sheet == 0 else -v
    return values


def plateau_example(which: str) -> GalleryInstance:
    if which not in ("r1", "r2"):
        raise ValueError(which)
    base = models.interval()
    t = constant_perm_system(base, 2, {})
    values = plateau_values(which)
    target = CechSpace("plateau-values", tuple(range(-5, 6)), tuple((v, v + 1) for v in range(-5, 5)),
                       (frozenset(range(-5, 6)),))
    return _instance(f"plateau-example/{which}", f"interval with plateau range map {which}", t, target,
                     lambda z: values(*z), unit=Fraction(1, 10))


def trivial_covering_ranks(which: str) -> GalleryInstance:
    """Circle, trivial 3-cover, Y = {1, 2}; r1 = (1, 1, 2), r2 = (1, 2, 2)."""
    labels = {"r1": (1, 1, 2), "r2": (1, 2, 2)}[which]
    base = models.circle()
    t = constant_perm_system(base, 3, {})
    return _instance(f"trivial-covering-ranks/{which}", f"trivial 3-cover of the circle with ranks {labels}",
                     t, models.discrete([1, 2]), lambda z: labels[z[1]])


# ---------------------------------------------------------------- registry

def _circle_entries():
    out = {}
    for n in (1, 2, 3):
        for parts in partitions(n):
            out[f"circle-covers/{n}/{'+'.join(map(str, parts))}"] = (lambda n=n, parts=parts: circle_cover(n, parts))
    return out


BUILDERS = {
    **_circle_entries(),
    "circle-phases": circle_phases,
    **{f"s2-line-bundle/{w}": (lambda w=w: s2_line_bundle(w)) for w in (-2, -1, 0, 1, 2)},
    "rp2-antipodal": rp2_antipodal,
    "circle-two-points": example_circle_two_points,
    "example-different-ranges/r1": lambda: different_ranges("r1"),
    "example-different-ranges/r2": lambda: different_ranges("r2"),
    "square-example/r1": lambda: square_example("r1"),
    "square-example/r2": lambda: square_example("r2"),
    "plateau-example/r1": lambda: plateau_example("r1"),
    "plateau-example/r2": lambda: plateau_example("r2"),
    "trivial-covering-ranks/r1": lambda: trivial_covering_ranks("r1"),
    "trivial-covering-ranks/r2": lambda: trivial_covering_ranks("r2"),
}

_CACHE: dict = {}


def names() -> list[str]:
    return list(BUILDERS)


def load(name: str) -> GalleryInstance:
    if name not in BUILDERS:
        raise KeyError(f"unknown gallery instance {name!r}; known: {', '.join(BUILDERS)}")
    if name not in _CACHE:
        _CACHE[name] = BUILDERS[name]()
    return _CACHE[name]


# ---------------------------------------------------------------- random cocycles

def random_perm_cocycle(space: CechSpace, n: int, rng: np.random.Generator) -> TransitionSystem:
    """Random Sₙ-cocycle: independent constants when the nerve has no triangles, else a coboundary.

    The coboundary σ_ij = π_i π_j⁻¹ of a random per-chart gauge is used on covers with triple overlaps.
    """
    from .space import nerve

    def rand_perm():
        return Permutation(tuple(int(v) for v in rng.permutation(n)))

    pairs = [(i, j) for i in range(len(space.charts)) for j in range(i + 1, len(space.charts)) if space.overlap(i, j)]
    if not nerve(space, 2).dim(2):
        return constant_perm_system(space, n, {p: rand_perm() for p in pairs})
    gauge = [rand_perm() for _ in space.charts]
    return constant_perm_system(space, n, {(i, j): gauge[i] * gauge[j].inverse() for i, j in pairs})
