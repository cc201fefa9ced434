"""Group-valued transition systems over a cover: validity, gauge action, pushforward."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import CoverMismatch, DegreeMismatch, InvalidCocycle, UnknownHom
from .group import DiagPermUnitary, Permutation, compose, determinant
from .linalg import TOL_NUM
from .space import CechSpace, connected_components


@dataclass(frozen=True)
class TransitionSystem:
    """``data[(i, j)][x]`` is g_ij(x), mapping chart-j coordinates to chart-i coordinates."""

    base: CechSpace
    degree: int
    data: dict = field(compare=False)

    def __eq__(self, other):
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return self.base == other.base and self.degree == other.degree and self.data == other.data

    __hash__ = None

    def __call__(self, i: int, j: int, x) -> DiagPermUnitary:
        return self.data[(i, j)][x]

    def phase(self, i: int, j: int, x) -> complex:
        return self.data[(i, j)][x].phases[0]

    def pairs(self):
        return sorted(self.data)

    def close_to(self, other: "TransitionSystem", tol: float = TOL_NUM) -> bool:
        if self.degree != other.degree or set(self.data) != set(other.data):
            return False
        return all(
            self.data[p].keys() == other.data[p].keys()
            and all(self.data[p][x].close_to(other.data[p][x], tol) for x in self.data[p])
            for p in self.data
        )


def from_pairs(base: CechSpace, degree: int, upper: dict) -> TransitionSystem:
    """Complete a system from values on pairs i < j (missing pairs and points default to identity).

    ``upper[(i, j)]`` maps overlap vertices to DiagPermUnitary; g_ii = 1 and g_ji = g_ij⁻¹ are filled in.
    """
    ident = DiagPermUnitary.identity(degree)
    data = {}
    for i in range(len(base.charts)):
        data[(i, i)] = {x: ident for x in base.sorted_vertices(base.charts[i])}
        for j in range(i + 1, len(base.charts)):
            ov = base.overlap(i, j)
            if not ov:
                continue
            given = upper.get((i, j), {})
            extra = set(given) - ov
            if extra:
                raise InvalidCocycle(f"values for ({i},{j}) outside the overlap: {sorted(map(str, extra))[:3]}")
            fwd = {x: given.get(x, ident) for x in base.sorted_vertices(ov)}
            data[(i, j)] = fwd
            data[(j, i)] = {x: g.inverse() for x, g in fwd.items()}
    for g_map in upper.values():
        for g in g_map.values():
            if g.n != degree:
                raise DegreeMismatch(f"value of degree {g.n} in a degree-{degree} system")
    return TransitionSystem(base, degree, data)


def phase_system(base: CechSpace, upper: dict) -> TransitionSystem:
    """𝕋-valued system from complex numbers on pairs i < j."""
    return from_pairs(base, 1, {p: {x: DiagPermUnitary.phase(t) for x, t in m.items()} for p, m in upper.items()})


def perm_system(base: CechSpace, degree: int, upper: dict) -> TransitionSystem:
    """Sₙ-valued system from permutations on pairs i < j."""
    return from_pairs(base, degree, {p: {x: DiagPermUnitary.from_perm(s) for x, s in m.items()} for p, m in upper.items()})


def constant_perm_system(base: CechSpace, degree: int, perms: dict) -> TransitionSystem:
    """Sₙ-valued system constant on each overlap, given by ``perms[(i, j)]``."""
    return perm_system(base, degree, {p: {x: s for x in base.overlap(*p)} for p, s in perms.items()})


@dataclass(frozen=True)
class CocycleReport:
    valid: bool
    violations: tuple  # (kind, indices, vertex, detail)

    def __bool__(self):
        return self.valid


def verify_cocycle(t: TransitionSystem, tol: float = TOL_NUM) -> CocycleReport:
    """Check presence, unit phases, g_ii = 1, g_ji = g_ij⁻¹, Sₙ-constancy and g_ij g_jk = g_ik."""
    base, bad = t.base, []
    ident = DiagPermUnitary.identity(t.degree)
    nch = len(base.charts)
    for i in range(nch):
        for j in range(nch):
            ov = base.overlap(i, j)
            if not ov:
                if (i, j) in t.data:
                    bad.append(("extra", (i, j), None, "data on an empty overlap"))
                continue
            vals = t.data.get((i, j))
            if vals is None or set(vals) != ov:
                bad.append(("missing", (i, j), None, "data does not match the overlap"))
                continue
            for x, g in vals.items():
                if g.n != t.degree:
                    bad.append(("degree", (i, j), x, f"degree {g.n}"))
                elif not g.is_unitary(tol):
                    bad.append(("phase", (i, j), x, "phase off the unit circle"))
                elif i == j and not g.close_to(ident, tol):
                    bad.append(("identity", (i, i), x, g.render()))
            if i < j:
                for comp in connected_components(base, ov):
                    perms = {vals[x].perm for x in comp if x in vals}
                    if len(perms) > 1:
                        bad.append(("discrete", (i, j), min(comp, key=base.index.__getitem__),
                                    "permutation not constant on an overlap component"))
    if bad:
        return CocycleReport(False, tuple(bad))
    for i in range(nch):
        for j in range(i + 1, nch):
            if (i, j) not in t.data:
                continue
            for x, g in t.data[(i, j)].items():
                if not compose(g, t.data[(j, i)][x]).close_to(ident, tol):
                    bad.append(("inverse", (i, j), x, "g_ij g_ji != 1"))
    for i, j, k in combinations(range(nch), 3):
        for x in base.sorted_vertices(base.overlap(i, j, k)):
            lhs = compose(t.data[(i, j)][x], t.data[(j, k)][x])
            if not lhs.close_to(t.data[(i, k)][x], tol):
                bad.append(("cocycle", (i, j, k), x, f"{lhs.render()} != {t.data[(i, k)][x].render()}"))
    return CocycleReport(not bad, tuple(bad))


def require_cocycle(t: TransitionSystem) -> None:
    report = verify_cocycle(t)
    if not report.valid:
        kind, idx, x, detail = report.violations[0]
        raise InvalidCocycle(f"{kind} violation at charts {idx}, vertex {x}: {detail}", report.violations)


@dataclass(frozen=True)
class Gauge:
    """``maps[i][x]`` is r_i(x) for x in chart i."""

    degree: int
    maps: dict

    def inverse(self) -> "Gauge":
        return Gauge(self.degree, {i: {x: g.inverse() for x, g in m.items()} for i, m in self.maps.items()})

    def then(self, other: "Gauge") -> "Gauge":
        """Gauge whose action equals applying self, then other (pointwise product r·r')."""
        return Gauge(self.degree, {i: {x: compose(g, other.maps[i][x]) for x, g in m.items()}
                                   for i, m in self.maps.items()})


def identity_gauge(base: CechSpace, degree: int) -> Gauge:
    ident = DiagPermUnitary.identity(degree)
    return Gauge(degree, {i: {x: ident for x in c} for i, c in enumerate(base.charts)})


def constant_gauge(base: CechSpace, u: DiagPermUnitary) -> Gauge:
    return Gauge(u.n, {i: {x: u for x in c} for i, c in enumerate(base.charts)})


def apply_gauge(t: TransitionSystem, r: Gauge) -> TransitionSystem:
    """g'_ij(x) = r_i(x)⁻¹ g_ij(x) r_j(x)."""
    if r.degree != t.degree:
        raise DegreeMismatch(f"gauge degree {r.degree} vs system degree {t.degree}")
    inv = {i: {x: g.inverse() for x, g in m.items()} for i, m in r.maps.items()}
    data = {
        (i, j): {x: compose(compose(inv[i][x], g), r.maps[j][x]) for x, g in vals.items()}
        for (i, j), vals in t.data.items()
    }
    return TransitionSystem(t.base, t.degree, data)


def _hom(tag: str):
    if tag in ("perm", "project_to_perm"):
        return lambda g: DiagPermUnitary.from_perm(g.perm), None
    if tag in ("det", "determinant"):
        return lambda g: DiagPermUnitary.phase(determinant(g)), 1
    if tag.startswith("phase:") or tag.startswith("phases_at_sheet:"):
        k = int(tag.split(":", 1)[1])

        def at_sheet(g):
            if not g.perm.is_identity():
                raise UnknownHom("phases_at_sheet is a homomorphism only on phase-only systems")
            return DiagPermUnitary.phase(g.phases[k])
        return at_sheet, 1
    raise UnknownHom(f"unsupported homomorphism {tag!r}")


def pushforward(hom: str, t: TransitionSystem) -> TransitionSystem:
    """Apply one of the supported homomorphisms pointwise: 'perm', 'det', 'phase:k'."""
    rho, degree = _hom(hom)
    data = {p: {x: rho(g) for x, g in vals.items()} for p, vals in t.data.items()}
    return TransitionSystem(t.base, t.degree if degree is None else degree, data)


def tensor(l1: TransitionSystem, l2: TransitionSystem) -> TransitionSystem:
    """Pointwise product of two 𝕋-valued systems on the same cover."""
    if l1.degree != 1 or l2.degree != 1:
        raise DegreeMismatch("tensor expects 𝕋-valued systems")
    if l1.base is not l2.base and l1.base != l2.base:
        raise CoverMismatch(f"covers {l1.base.name} and {l2.base.name} differ")
    data = {p: {x: DiagPermUnitary.phase(g.phases[0] * l2.data[p][x].phases[0]) for x, g in vals.items()}
            for p, vals in l1.data.items()}
    return TransitionSystem(l1.base, 1, data)


def conjugate(l: TransitionSystem) -> TransitionSystem:
    if l.degree != 1:
        raise DegreeMismatch("conjugate expects a 𝕋-valued system")
    data = {p: {x: DiagPermUnitary.phase(g.phases[0].conjugate()) for x, g in vals.items()}
            for p, vals in l.data.items()}
    return TransitionSystem(l.base, 1, data)


def trivial_system(base: CechSpace, degree: int) -> TransitionSystem:
    return from_pairs(base, degree, {})


def permutation_part(t: TransitionSystem, i: int, j: int, x) -> Permutation:
    return t.data[(i, j)][x].perm
