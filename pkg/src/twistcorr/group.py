"""Symmetric groups, phase tori and the diagonal-normalizing unitaries 𝕋ⁿ⋊Sₙ.

Convention: (λ, σ) acts on basis vectors by ``e_k ↦ λ_{σ(k)} e_{σ(k)}``. For this
matrix model to be a homomorphism the torus action is ``(σ·μ)_j = μ_{σ⁻¹(j)}``,
and the product reads ``(λ, σ₁)(μ, σ₂) = (λ·(σ₁·μ), σ₁σ₂)`` with
``(σ₁σ₂)(k) = σ₁(σ₂(k))``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import DegreeMismatch
from .linalg import TOL_NUM


_IDENTITIES: dict = {}


@dataclass(frozen=True)
class Permutation:
    """Bijection of {0..n-1}; ``images[k]`` is σ(k). Rendered 1-based."""

    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(k) for k in self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a bijection: {self.images}")

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        if n not in _IDENTITIES:
            _IDENTITIES[n] = cls(tuple(range(n)))
        return _IDENTITIES[n]

    @classmethod
    def from_cycles(cls, n: int, cycles) -> "Permutation":
        images = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a] = b
        return cls(tuple(images))

    def __call__(self, k: int) -> int:
        return self.images[k]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.n != other.n:
            raise DegreeMismatch(f"degrees {self.n} and {other.n}")
        return Permutation(tuple(self.images[other.images[k]] for k in range(self.n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for k, v in enumerate(self.images):
            inv[v] = k
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(k == v for k, v in enumerate(self.images))

    def cycles(self, include_fixed: bool = False) -> list[tuple]:
        seen, out = set(), []
        for k in range(self.n):
            if k in seen:
                continue
            cyc = [k]
            seen.add(k)
            j = self.images[k]
            while j != k:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple:
        return tuple(sorted((len(c) for c in self.cycles(include_fixed=True)), reverse=True))

    def sign(self) -> int:
        return -1 if sum(len(c) - 1 for c in self.cycles()) % 2 else 1

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[list(self.images), list(range(self.n))] = 1.0
        return m

    def render(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "id"
        return "".join("(" + " ".join(str(k + 1) for k in c) + ")" for c in cyc)


@dataclass(frozen=True)
class DiagPermUnitary:
    """Element (λ, σ) of 𝕋ⁿ⋊Sₙ, i.e. a permutation matrix times a unitary diagonal."""

    perm: Permutation
    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(complex(p) for p in self.phases))
        if len(self.phases) != self.perm.n:
            raise DegreeMismatch(f"{len(self.phases)} phases for degree {self.perm.n}")

    @property
    def n(self) -> int:
        return self.perm.n

    @classmethod
    def identity(cls, n: int) -> "DiagPermUnitary":
        return cls(Permutation.identity(n), (1.0,) * n)

    @classmethod
    def from_perm(cls, perm: Permutation) -> "DiagPermUnitary":
        return cls(perm, (1.0,) * perm.n)

    @classmethod
    def phase(cls, t: complex) -> "DiagPermUnitary":
        return cls(Permutation.identity(1), (t,))

    def is_unitary(self, tol: float = TOL_NUM) -> bool:
        return all(abs(abs(p) - 1) <= tol for p in self.phases)

    def __mul__(self, other: "DiagPermUnitary") -> "DiagPermUnitary":
        return compose(self, other)

    def inverse(self) -> "DiagPermUnitary":
        sinv = self.perm.inverse()
        # (σ⁻¹·λ⁻¹)_j = λ⁻¹_{σ(j)}; unit phases are inverted by conjugation
        return DiagPermUnitary(sinv, tuple(self.phases[self.perm(j)].conjugate() for j in range(self.n)))

    def close_to(self, other: "DiagPermUnitary", tol: float = TOL_NUM) -> bool:
        return self.perm == other.perm and all(abs(a - b) <= tol for a, b in zip(self.phases, other.phases))

    def render(self) -> str:
        return f"({self.perm.render()}; {' '.join(format_phase(p) for p in self.phases)})"


def compose(g: DiagPermUnitary, h: DiagPermUnitary) -> DiagPermUnitary:
    """Group product g·h; ``matrix_form(g·h) = matrix_form(g) @ matrix_form(h)``."""
    if g.n != h.n:
        raise DegreeMismatch(f"degrees {g.n} and {h.n}")
    sinv = g.perm.inverse()
    phases = tuple(g.phases[j] * h.phases[sinv(j)] for j in range(g.n))
    return DiagPermUnitary(g.perm * h.perm, phases)


def matrix_form(g: DiagPermUnitary) -> np.ndarray:
    """Unitary with ``u e_k = λ_{σ(k)} e_{σ(k)}``."""
    m = np.zeros((g.n, g.n), dtype=complex)
    for k in range(g.n):
        j = g.perm(k)
        m[j, k] = g.phases[j]
    return m


def from_matrix(m: np.ndarray, tol: float = TOL_NUM) -> DiagPermUnitary | None:
    """Decompose a monomial unitary, or None if `m` does not normalize the diagonal."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    mag = np.abs(m)
    images = tuple(int(np.argmax(mag[:, k])) for k in range(n))
    if sorted(images) != list(range(n)):
        return None
    phases = [0j] * n
    for k, j in enumerate(images):
        phases[j] = m[j, k]
    g = DiagPermUnitary(Permutation(images), tuple(phases))
    if np.max(np.abs(matrix_form(g) - m), initial=0.0) > tol or not g.is_unitary(tol):
        return None
    return g


def project_to_perm(g: DiagPermUnitary) -> Permutation:
    return g.perm


def determinant(g: DiagPermUnitary) -> complex:
    out = complex(g.perm.sign())
    for p in g.phases:
        out *= p
    return out


def partitions(n: int, largest: int | None = None):
    """Integer partitions of n, parts nonincreasing, in ascending lexicographic order of reversed parts."""
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(1, min(n, largest) + 1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def cycle_type_representative(parts) -> Permutation:
    """Permutation whose cycles are consecutive blocks of the given lengths."""
    cycles, start = [], 0
    for p in parts:
        cycles.append(list(range(start, start + p)))
        start += p
    return Permutation.from_cycles(start, cycles)


def conjugacy_classes_sn(n: int) -> list[Permutation]:
    """One representative per cycle type, ordered from identity to the longest cycles."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    reps = [cycle_type_representative(sorted(p, reverse=True)) for p in partitions(n)]
    return sorted(reps, key=lambda p: (max(p.cycle_type()), p.cycle_type()))


def all_permutations(n: int) -> list[Permutation]:
    return [Permutation(p) for p in permutations(range(n))]


def format_phase(p: complex) -> str:
    """Compact text for a unit phase; exact tokens for ±1 and ±i, full repr otherwise."""
    for value, text in ((1, "1"), (-1, "-1"), (1j, "1j"), (-1j, "-1j")):
        if p == value:
            return text
    return repr(complex(p)).strip("()")


def unit_phase(theta: float) -> complex:
    return cmath.exp(1j * theta)
