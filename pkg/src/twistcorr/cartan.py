"""Cartan subalgebras of the fiberwise compacts as spectrum coverings with rank-1 projection fields."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atlas import (AtlasData, atlas_from_correspondence, atlases_equivalent, derived_cocycle, eigenvalue_table,
                    is_diagonalizing, is_normalizing, range_map_from_atlas)
from .bundle import CoveringSpace, LineBundle, build_covering, build_twisted_covering, iter_covering_isomorphisms, reassemble
from .cocycle import Gauge, TransitionSystem, apply_gauge, pushforward
from .correspondence import (KAPPA, HilbertModule, LeftAction, TwistedCorrespondence, correspondences_isomorphic,
                             left_action_of, make_correspondence, module_of, pattern_blocks, unitary_field_search)
from .errors import AmbiguousRange, Branched, NoRange, NotContained, ShapeMismatch
from .group import DiagPermUnitary, Permutation, matrix_form
from .linalg import TOL_MATCH, TOL_NUM
from .space import spanning_tree

EDGE_COHERENCE = 0.5
SPECTRUM_SEARCH_LIMIT = 64


@dataclass(frozen=True, eq=False)
class CartanData:
    """``projections[z]`` is p_z in the canonical basis of the module fiber over s(z)."""

    spectrum: CoveringSpace
    projections: dict = field(repr=False)


def _fiber_projections(d: CartanData, x) -> list[np.ndarray]:
    return [d.projections[z] for z in d.spectrum.fibers[x]]


def cartan_report(d: CartanData, module: HilbertModule, tol: float = TOL_NUM) -> tuple[bool, float, list]:
    """Orthogonality, completeness, rank one and edge coherence; returns (ok, residual, failures)."""
    n = module.degree
    eye = np.eye(n)
    fails, worst = [], 0.0
    for x in d.spectrum.base.vertices:
        ps = np.array(_fiber_projections(d, x))
        res = max(float(np.max(np.abs(ps.sum(axis=0) - eye))),
                  float(np.max(np.abs(ps @ ps - ps))),
                  float(np.max(np.abs(ps - ps.conj().transpose(0, 2, 1)))),
                  float(np.max(np.abs(np.real(np.trace(ps, axis1=1, axis2=2)) - 1))))
        if len(ps) > 1:
            cross = np.einsum("aij,bjk->abik", ps, ps)
            off = ~np.eye(len(ps), dtype=bool)
            res = max(res, float(np.max(np.abs(cross[off]))))
        worst = max(worst, res)
        if res > tol:
            fails.append(("fiber", x, res))
    edges = list(d.spectrum.edges)
    if edges:
        sheet = d.spectrum.sheet
        t = np.array([module.transports[(sheet[u], sheet[v])] for u, v in edges])
        pu = np.array([d.projections[u] for u, _ in edges])
        pv = np.array([d.projections[v] for _, v in edges])
        overlap = np.real(np.einsum("eij,ejk,ekl,eil->e", pv, t, pu, t.conj()))
        fails += [("edge", e, float(o)) for e, o in zip(edges, overlap) if o <= EDGE_COHERENCE]
    return not fails, worst, fails


def cartan_from_twisted(c: TwistedCorrespondence) -> CartanData:
    """Spectrum = the covering; p_z = projection onto the sheet of z."""
    n = c.degree
    proj = {}
    for z in c.covering.vertices:
        p = np.zeros((n, n), dtype=complex)
        k = c.covering.fiber_position[z]
        p[k, k] = 1.0
        proj[z] = p
    return CartanData(c.covering, proj)


def atlas_module(a: AtlasData) -> HilbertModule:
    return HilbertModule(a.base, a.degree, a.transports())


def cartan_from_atlas(a: AtlasData) -> CartanData:
    """Spectrum from the permutation part of the atlas; p_z = H_i e_k e_k* H_i* for z = h_i(x, e_k)."""
    spectrum = build_covering(pushforward("perm", derived_cocycle(a)))
    proj = {}
    for (i, x, k), z in spectrum.coords.items():
        if z in proj:
            continue
        v = a.frames[i][x][:, k]
        proj[z] = np.outer(v, v.conj())
    return CartanData(spectrum, proj)


def representative(p: np.ndarray) -> np.ndarray:
    """Unit vector spanning a rank-1 projection, largest-modulus entry made positive real."""
    v = p[:, int(np.argmax(np.real(np.diag(p))))]
    v = v / np.linalg.norm(v)
    lead = v[int(np.argmax(np.abs(v)))]
    return v * (abs(lead) / lead)


def cartan_range(d: CartanData, phi: LeftAction, tau: float = TOL_MATCH) -> dict:
    """r(z) = the unique y with tr(φ(δ_y)_x p_z) > 1 − τ."""
    base = d.spectrum.base
    out = {}
    for z in d.spectrum.vertices:
        b = base.index[d.spectrum.sheet[z]]
        p = d.projections[z]
        hits = [y for y, img in phi.active[b] if np.real(np.vdot(img.conj().T, p)) > 1 - tau]
        if not hits:
            raise NoRange(f"no point of the target carries {z}")
        if len(hits) > 1:
            raise AmbiguousRange(f"{z} matches {hits}")
        out[z] = hits[0]
    return out


def check_containment(d: CartanData, phi: LeftAction, tol: float = TOL_NUM) -> float:
    """Largest distance from φ(δ_y)_x to its compression onto the span of the p_z; NotContained beyond tol."""
    worst = 0.0
    for b, x in enumerate(d.spectrum.base.vertices):
        ps = np.array(_fiber_projections(d, x))
        for y, m in phi.active[b]:
            weights = np.einsum("ij,kji->k", m, ps)
            comp = np.einsum("k,kij->ij", weights, ps)
            worst = max(worst, float(np.max(np.abs(m - comp))))
    if worst > tol:
        raise NotContained(f"left action leaves the span of the projections (residual {worst:.2e})")
    return worst


def twisted_from_cartan(d: CartanData, module: HilbertModule, phi: LeftAction, tau: float = TOL_MATCH,
                        tol: float = TOL_NUM, name: str = "E") -> TwistedCorrespondence:
    """Line bundle from unit vectors in the ranges of p_z, transported along chart spanning trees."""
    spec = d.spectrum
    if spec.degree < module.degree:
        raise Branched(f"spectrum has {spec.degree} points per fiber on a rank-{module.degree} module")
    if spec.degree > module.degree:
        raise ShapeMismatch("more projections than the fiber dimension")
    check_containment(d, phi, tol)
    base = spec.base
    frames = {}
    for alpha, (i, k) in enumerate(spec.sheet_charts):
        vecs = {}
        for parent, x in spanning_tree(base, base.charts[i]):
            z = spec.coords[(i, x, k)]
            p = d.projections[z]
            if parent is None:
                vecs[z] = representative(p)
            else:
                w = p @ module.transports[(parent, x)] @ vecs[spec.coords[(i, parent, k)]]
                norm = np.linalg.norm(w)
                if norm < 0.5:
                    raise ShapeMismatch(f"projection field jumps on the edge {parent}-{x}")
                vecs[z] = w / norm
        frames[alpha] = vecs
    data = {}
    total = spec.total
    for alpha in range(len(total.charts)):
        for beta in range(len(total.charts)):
            common = total.charts[alpha] & total.charts[beta]
            if not common:
                continue
            vals = {}
            for z in common:
                t = np.vdot(frames[alpha][z], frames[beta][z])
                vals[z] = DiagPermUnitary.phase(t / abs(t))
            data[(alpha, beta)] = vals
    line = LineBundle(spec, TransitionSystem(total, 1, data))
    return make_correspondence(spec, line, phi.target, cartan_range(d, phi, tau), name)


def _fiber_basis(d: CartanData, x) -> np.ndarray:
    """Columns are the representatives of the fiber's projections (vectorized ``representative``)."""
    ps = np.array(_fiber_projections(d, x))
    cols = np.argmax(np.real(np.diagonal(ps, axis1=1, axis2=2)), axis=1)
    v = ps[np.arange(len(ps)), :, cols]
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    lead = v[np.arange(len(v)), np.argmax(np.abs(v), axis=1)]
    return (v * (np.abs(lead) / lead)[:, None]).T


def cartans_conjugate(d: CartanData, d2: CartanData, module: HilbertModule, phi: LeftAction,
                      kappa: float = KAPPA, seed: int = 0, limit: int = SPECTRUM_SEARCH_LIMIT) -> dict | None:
    """Unitary field T on the module with T p_z T* = p'_ψ(z) for a spectrum isomorphism ψ and Tφ T* = φ."""
    ra, rb = cartan_range(d, phi), cartan_range(d2, phi)
    base = module.base
    ua = {x: _fiber_basis(d, x) for x in base.vertices}
    ub = {x: _fiber_basis(d2, x) for x in base.vertices}
    qa = {(u, v): ua[v].conj().T @ p @ ua[u] for (u, v), p in module.transports.items()}
    qb = {(u, v): ub[v].conj().T @ p @ ub[u] for (u, v), p in module.transports.items()}
    for count, psi in enumerate(iter_covering_isomorphisms(d.spectrum, d2.spectrum, ra, rb)):
        if count >= limit:
            break
        patterns = {x: [d2.spectrum.fiber_position[psi[z]] for z in d.spectrum.fibers[x]] for x in base.vertices}
        found = unitary_field_search(base, pattern_blocks(patterns), qa, qb, kappa=kappa, seed=seed)
        if found is not None:
            return {x: ub[x] @ found[x] @ ua[x].conj().T for x in base.vertices}
    return None


def conjugacy_residual(d: CartanData, d2: CartanData, phi: LeftAction, t: dict) -> float:
    """Unitarity, intertwining and projection-matching residual of a conjugating field."""
    base = d.spectrum.base
    worst = 0.0
    for b, x in enumerate(base.vertices):
        u = t[x]
        worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(len(u))))))
        for _, img in phi.active[b]:
            worst = max(worst, float(np.max(np.abs(u @ img - img @ u))))
        targets = _fiber_projections(d2, x)
        for p in _fiber_projections(d, x):
            q = u @ p @ u.conj().T
            worst = max(worst, min(float(np.max(np.abs(q - p2))) for p2 in targets))
    return worst


# ---------------------------------------------------------------- the commuting triangle

@dataclass(frozen=True)
class Leg:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class DiagramReport:
    legs: tuple

    @property
    def passed(self) -> bool:
        return all(leg.passed for leg in self.legs)

    def render(self) -> str:
        lines = [f"{'pass' if leg.passed else 'FAIL'}  {leg.name:<28} residual {leg.residual:.2e}  {leg.detail}".rstrip()
                 for leg in self.legs]
        lines.append("diagram commutes" if self.passed else "diagram does not commute")
        return "\n".join(lines)


def _gauge_residual(a: AtlasData, b: AtlasData, r: Gauge) -> float:
    worst = 0.0
    for i in range(len(a.base.charts)):
        for j in range(len(a.base.charts)):
            for x in a.base.overlap(i, j):
                lhs = matrix_form(r.maps[i][x]).conj().T @ a.transition(i, j, x) @ matrix_form(r.maps[j][x])
                worst = max(worst, float(np.max(np.abs(lhs - b.transition(i, j, x)))))
    return worst


def diagram_roundtrip_check(c: TwistedCorrespondence, tol: float = 1e-8) -> DiagramReport:
    """Correspondence → atlas → correspondence, atlas → correspondence → atlas, and the two Cartans."""
    legs = []
    phi = left_action_of(c)
    module = module_of(c)
    atlas = atlas_from_correspondence(c)
    norm, diag = is_normalizing(atlas), is_diagonalizing(atlas, phi)
    legs.append(Leg("atlas predicates", norm.passed and diag.passed, max(norm.residual, diag.residual)))

    back = range_map_from_atlas(atlas, phi)
    mus = eigenvalue_table(atlas, phi)
    mu_res = max(abs(1 - mu[back.range[back.covering.coords[(i, x, k)]]][k])
                 for (i, x), mu in mus.items() for k in range(c.degree))
    iso = correspondences_isomorphic(c, back)
    legs.append(Leg("correspondence round trip", iso is not None and mu_res < tol, mu_res))

    atlas2 = atlas_from_correspondence(back)
    gauge = atlases_equivalent(atlas, atlas2, phi, left_action_of(back))
    g_res = _gauge_residual(atlas, atlas2, gauge) if gauge is not None else float("inf")
    legs.append(Leg("atlas round trip", gauge is not None and g_res < tol, g_res))

    direct = cartan_from_twisted(c)
    ok_d, res_d, _ = cartan_report(direct, module)
    legs.append(Leg("direct Cartan", ok_d, max(res_d, check_containment(direct, phi))))

    via = cartan_from_atlas(atlas)
    amod = atlas_module(atlas)
    ok_v, res_v, _ = cartan_report(via, amod)
    legs.append(Leg("Cartan via atlas", ok_v, max(res_v, check_containment(via, phi))))

    t = cartans_conjugate(direct, via, module, phi)
    t_res = conjugacy_residual(direct, via, phi, t) if t is not None else float("inf")
    legs.append(Leg("Cartans conjugate", t is not None and t_res < tol, t_res))

    rebuilt = twisted_from_cartan(direct, module, phi)
    ok = correspondences_isomorphic(c, rebuilt) is not None
    legs.append(Leg("Cartan round trip", ok, res_d))
    return DiagramReport(tuple(legs))


def perturb_correspondence(c: TwistedCorrespondence, rng: np.random.Generator, jitter: float = 0.25,
                           name: str | None = None) -> TwistedCorrespondence:
    """Isomorphic copy: random per-chart sheet relabelling and phase gauge, range map carried along."""
    t = reassemble(c.covering, c.line)
    base, n = c.source, c.degree
    maps = {}
    for i, chart in enumerate(base.charts):
        perm = Permutation(tuple(int(v) for v in rng.permutation(n)))
        offset = rng.uniform(-np.pi, np.pi, n)
        maps[i] = {x: DiagPermUnitary(perm, tuple(np.exp(1j * (offset + rng.uniform(-jitter, jitter, n)))))
                   for x in chart}
    gauge = Gauge(n, maps)
    cov, line = build_twisted_covering(apply_gauge(t, gauge))
    rng_map = {}
    for (i, x, k), z in cov.coords.items():
        rng_map[z] = c.range[c.covering.coords[(i, x, maps[i][x].perm(k))]]
    return make_correspondence(cov, line, c.target, rng_map, name or f"{c.name}'")
