"""Integer Čech cohomology of nerves and first Chern classes of 𝕋-valued cocycles."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .cocycle import TransitionSystem
from .errors import DegreeMismatch, NonIntegerCocycle, ResolutionViolated
from .linalg import int_matmul, smith_normal_form_full
from .space import CechSpace, Nerve, nerve, require_good_cover, spanning_tree

ROUNDING_LIMIT = 0.25


@dataclass(frozen=True)
class CochainComplex:
    simplices: tuple  # simplices[k] = ordered k-simplices
    coboundaries: tuple  # coboundaries[k]: C^k -> C^{k+1}, rows indexed by (k+1)-simplices


def coboundary_matrix(lower: tuple, upper: tuple) -> list[list[int]]:
    pos = {s: c for c, s in enumerate(lower)}
    mat = [[0] * len(lower) for _ in upper]
    for r, s in enumerate(upper):
        for j in range(len(s)):
            mat[r][pos[s[:j] + s[j + 1:]]] += -1 if j % 2 else 1
    return mat


def cochain_complex(nv: Nerve) -> CochainComplex:
    sims = tuple(nv.dim(k) for k in range(4))
    cob = tuple(coboundary_matrix(sims[k], sims[k + 1]) for k in range(3))
    return CochainComplex(sims, cob)


@dataclass(frozen=True)
class CohomologyGroup:
    """H^k = ker δ^k / im δ^{k-1} with the SNF bases needed for class coordinates."""

    degree: int
    rank: int
    torsion: tuple
    _rinv: tuple
    _kernel_offset: int
    _left2: tuple
    _diag2: tuple
    _signs: tuple

    def describe(self) -> str:
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def coordinates(self, cochain) -> "CohomologyClass":
        """Class of an integer cocycle (list indexed by k-simplices) in this group's basis."""
        y = [sum(a * b for a, b in zip(row, cochain)) for row in self._rinv]
        r = self._kernel_offset
        if any(v != 0 for v in y[:r]):
            raise NonIntegerCocycle("cochain is not a cocycle")
        w = y[r:]
        z = [sum(a * b for a, b in zip(row, w)) for row in self._left2]
        s = len(self._diag2)
        torsion = tuple((z[i] % d, d) for i, d in enumerate(self._diag2) if d > 1)
        free = tuple(sign * v for sign, v in zip(self._signs, z[s:]))
        return CohomologyClass(self.degree, free, torsion)

    def functionals(self) -> list[list[int]]:
        """Rows mapping a cochain to the unreduced class coordinates."""
        r = self._kernel_offset
        tail = [list(row) for row in self._rinv[r:]]
        return int_matmul([list(row) for row in self._left2], tail) if tail else []


@dataclass(frozen=True)
class CohomologyClass:
    degree: int
    free: tuple
    torsion: tuple  # (residue, modulus)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.free) and all(r == 0 for r, _ in self.torsion)

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        free = tuple(a + b for a, b in zip(self.free, other.free))
        torsion = tuple(((a + b) % m, m) for (a, m), (b, _) in zip(self.torsion, other.torsion))
        return CohomologyClass(self.degree, free, torsion)

    def describe(self) -> str:
        if self.is_zero():
            return "zero"
        parts = [str(v) for v in self.free] + [f"{r} mod {m}" for r, m in self.torsion]
        return "(" + ", ".join(parts) + ")"


def _group(cx: CochainComplex, k: int) -> CohomologyGroup:
    n_k = len(cx.simplices[k])
    dk = cx.coboundaries[k]
    if dk and n_k:
        _, diag, _, _, rinv = smith_normal_form_full(dk)
    else:
        diag, rinv = [], [[int(i == j) for j in range(n_k)] for i in range(n_k)]
    r = len(diag)
    if k == 0 or not cx.simplices[k - 1]:
        image = [[] for _ in range(n_k - r)]
    else:
        image = int_matmul(rinv, cx.coboundaries[k - 1])[r:]
    dim_ker = n_k - r
    if dim_ker and image and image[0]:
        left2, diag2, _, _, _ = smith_normal_form_full(image)
    else:
        left2, diag2 = [[int(i == j) for j in range(dim_ker)] for i in range(dim_ker)], []
    group = CohomologyGroup(k, dim_ker - len(diag2), tuple(d for d in diag2 if d > 1),
                            tuple(map(tuple, rinv)), r, tuple(map(tuple, left2)), tuple(diag2),
                            (1,) * (dim_ker - len(diag2)))
    return _normalize_signs(group, cx, k)


def _normalize_signs(group: CohomologyGroup, cx: CochainComplex, k: int) -> CohomologyGroup:
    """Orient each free generator so it is positive on the first elementary cocycle it detects."""
    if not group.rank:
        return group
    funcs = group.functionals()
    s = len(group._diag2)
    upper = cx.coboundaries[k]
    n_k = len(cx.simplices[k])
    elementary_cocycles = [c for c in range(n_k) if all(row[c] == 0 for row in upper)]
    signs = []
    for f in range(group.rank):
        row = funcs[s + f]
        lead = next((row[c] for c in elementary_cocycles if row[c] != 0), 1)
        signs.append(1 if lead > 0 else -1)
    return CohomologyGroup(group.degree, group.rank, group.torsion, group._rinv, group._kernel_offset,
                           group._left2, group._diag2, tuple(signs))


@dataclass(frozen=True)
class Cohomology:
    nerve: Nerve
    complex: CochainComplex
    groups: tuple  # H^0, H^1, H^2

    def describe(self) -> str:
        return ", ".join(f"H^{g.degree} = {g.describe()}" for g in self.groups)


def cohomology_of(space: CechSpace) -> Cohomology:
    """H⁰, H¹, H² of the nerve of a good cover (cached on the space and by value)."""
    cached = space.__dict__.get("_cohomology")
    if cached is None:
        cached = _cohomology_by_value(space)
        space.__dict__["_cohomology"] = cached
    return cached


@lru_cache(maxsize=64)
def _cohomology_by_value(space: CechSpace) -> Cohomology:
    require_good_cover(space)
    nv = nerve(space)
    cx = cochain_complex(nv)
    return Cohomology(nv, cx, tuple(_group(cx, k) for k in range(3)))


def cohomology_groups(nv: Nerve) -> tuple:
    """(rank, torsion moduli) of H⁰, H¹, H² for a nerve."""
    cx = cochain_complex(nv)
    return tuple((g.rank, g.torsion) for g in (_group(cx, k) for k in range(3)))


def overlap_logarithms(l: TransitionSystem, i: int, j: int) -> dict:
    """Continuous angle θ_ij on U_i ∩ U_j: principal value at the least vertex, propagated on a BFS tree."""
    base = l.base
    vals = l.data[(i, j)]
    order = spanning_tree(base, vals.keys())
    theta = {}
    for parent, child in order:
        if parent is None:
            theta[child] = cmath.phase(vals[child].phases[0])
            continue
        step = cmath.phase(vals[child].phases[0] / vals[parent].phases[0])
        if abs(step) >= math.pi:
            raise ResolutionViolated(f"phase step of {step:.3f} rad on edge {parent}-{child} of overlap ({i},{j})")
        theta[child] = theta[parent] + step
    for u, v in base.edges:
        if u in vals and v in vals:
            step = cmath.phase(vals[v].phases[0] / vals[u].phases[0])
            if abs(step) >= math.pi or abs(theta[v] - theta[u] - step) > 1e-6:
                raise ResolutionViolated(f"phase winds along edge {u}-{v} inside overlap ({i},{j})")
    return theta


def chern_cochain(l: TransitionSystem) -> list[int]:
    """Integer 2-cochain c_ijk = (θ_ij + θ_jk − θ_ik)/2π at the least vertex of each triple overlap."""
    if l.degree != 1:
        raise DegreeMismatch("Chern classes are defined for 𝕋-valued systems")
    coh = cohomology_of(l.base)
    logs = {s: overlap_logarithms(l, *s) for s in coh.nerve.dim(1)}
    cochain = []
    for i, j, k in coh.nerve.dim(2):
        x0 = min(coh.nerve.supports[(i, j, k)], key=l.base.index.__getitem__)
        value = (logs[(i, j)][x0] + logs[(j, k)][x0] - logs[(i, k)][x0]) / (2 * math.pi)
        rounded = round(value)
        if abs(value - rounded) > ROUNDING_LIMIT:
            raise NonIntegerCocycle(f"triple ({i},{j},{k}) gives {value:.3f}, far from an integer")
        cochain.append(int(rounded))
    return cochain


def chern_class(l: TransitionSystem) -> CohomologyClass:
    """First Chern class in H² of the nerve."""
    cochain = chern_cochain(l)
    return cohomology_of(l.base).groups[2].coordinates(cochain)
