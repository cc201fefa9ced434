"""Command-line entry point: ``twistcorr <command> ...``.

Inputs are text files in the format of :mod:`twistcorr.textio` or ``gallery:NAME``.
Exit codes: 0 success or true verdict, 1 false verdict, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations

import numpy as np

from . import gallery, textio
from .bundle import build_covering, coverings_isomorphic, monodromy
from .cartan import diagram_roundtrip_check, perturb_correspondence
from .cocycle import pushforward, verify_cocycle
from .cohomology import chern_class, cohomology_of
from .correspondence import (correspondences_isomorphic, cstar_correspondences_isomorphic, left_action_of,
                             unitary_field_report)
from .errors import NotConstantRank, TwistError
from .group import partitions
from .linalg import TOL_NUM
from .reconstruct import (constant_rank_iso_check, double_commutant_spectrum, generated_subalgebra_spectrum,
                          locally_conjugate, reconstruct_from_spectrum)
from .space import require_good_cover

OK, FALSE, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def load_input(spec: str) -> textio.Document:
    if spec.startswith("gallery:"):
        name = spec[len("gallery:"):]
        try:
            return textio.instance_document(gallery.load(name))
        except KeyError as e:
            raise InputError(e.args[0]) from None
    try:
        return textio.parse_file(spec)
    except OSError as e:
        raise InputError(f"cannot read {spec}: {e.strerror}") from None


def _single(doc: textio.Document, spec: str):
    if len(doc.correspondences) != 1:
        raise InputError(f"{spec}: expected exactly one correspondence, found {len(doc.correspondences)}")
    return next(iter(doc.correspondences.values()))


def _need(doc: textio.Document, what: str, spec: str):
    if not getattr(doc, what):
        raise InputError(f"{spec}: no {what} in input")


# ---------------------------------------------------------------- class descriptions

def describe_class(cls, group) -> str:
    if cls.is_zero():
        return "zero"
    if group.rank == 1 and not group.torsion:
        w = cls.free[0]
        return "generator" if w == 1 else f"{w} × generator"
    if group.rank == 0 and len(group.torsion) == 1:
        r, m = cls.torsion[0]
        return "nontrivial torsion generator" if r == 1 else f"{r} mod {m} torsion class"
    return cls.describe()


# ---------------------------------------------------------------- commands

def cmd_check(args) -> tuple[int, dict, list[str]]:
    doc = load_input(args.input)
    lines, report, ok = [], {"spaces": {}, "cocycles": {}, "correspondences": {}}, True
    for name, space in doc.spaces.items():
        try:
            require_good_cover(space)
            good = True
        except TwistError:
            good = False
        report["spaces"][name] = {"vertices": len(space.vertices), "charts": len(space.charts), "good_cover": good}
        lines.append(f"space {name}: {len(space.vertices)} vertices, {len(space.charts)} charts, "
                     f"good cover: {'yes' if good else 'no'}")
    for name, t in doc.cocycles.items():
        rep = verify_cocycle(t, args.tolerance)
        ok &= rep.valid
        report["cocycles"][name] = {"valid": rep.valid, "violations": [list(map(str, v)) for v in rep.violations]}
        lines.append(f"cocycle {name}: degree {t.degree}, {'valid' if rep.valid else 'INVALID'}")
        for kind, idx, x, detail in rep.violations[:10]:
            lines.append(f"  {kind} at charts {idx}, vertex {x}: {detail}")
    for name, c in doc.correspondences.items():
        problems = left_action_of(c).check(args.tolerance)
        good = not problems
        ok &= good
        report["correspondences"][name] = {"degree": c.degree, "valid": good, "problems": problems}
        lines.append(f"correspondence {name}: degree {c.degree}, {len(c.covering.vertices)} total vertices, "
                     f"{'valid' if good else 'INVALID'}")
        lines += [f"  {p}" for p in problems[:10]]
    return (OK if ok else FALSE), report, lines


def cmd_build(args):
    doc = load_input(args.input)
    _need(doc, "cocycles", args.input)
    lines, report = [], {}
    for name, t in doc.cocycles.items():
        cov = build_covering(t, name=name)
        sizes = sorted((len(c) // len(t.base.vertices) for c in cov.components()), reverse=True)
        mono = [(loop, p.render()) for loop, p in monodromy(cov)]
        report[name] = {"degree": t.degree, "vertices": len(cov.vertices), "edges": len(cov.edges),
                        "component_degrees": sizes, "monodromy": [{"loop": loop, "permutation": p} for loop, p in mono]}
        lines.append(f"covering of {name}: degree {t.degree}, {len(cov.vertices)} vertices, {len(cov.edges)} edges")
        lines.append("  components by sheet count: " + " + ".join(map(str, sizes)))
        for loop, p in mono:
            lines.append(f"  monodromy around loop at {loop[0]} (length {len(loop)}): {p}")
    return OK, report, lines


def cmd_chern(args):
    doc = load_input(args.input)
    _need(doc, "cocycles", args.input)
    lines, report = [], {}
    for name, t in doc.cocycles.items():
        h2 = cohomology_of(t.base).groups[2]
        line_sys = t if t.degree == 1 else pushforward("det", t)
        cls = chern_class(line_sys)
        text = describe_class(cls, h2)
        via = "" if t.degree == 1 else " (determinant line bundle)"
        report[name] = {"H2": h2.describe(), "free": list(cls.free), "torsion": [list(v) for v in cls.torsion],
                        "class": text, "determinant": t.degree > 1}
        lines.append(f"{name}{via}: H² = {h2.describe()}; class = {text}")
    return OK, report, lines


def cmd_classify_circle(args):
    n = args.n
    if n < 1:
        raise InputError("degree must be positive")
    covs = []
    for parts in partitions(n):
        t = gallery.circle_cover_cocycle(n, parts)
        covs.append((parts, build_covering(t)))
    distinct = all(coverings_isomorphic(a, b) is None for (_, a), (_, b) in combinations(covs, 2))
    lines = [f"{len(covs)} classes of {n}-sheeted coverings of the circle"]
    for k, (parts, cov) in enumerate(covs, start=1):
        mono = monodromy(cov)[0][1]
        lines.append(f"  {k}: cycle type {'+'.join(map(str, parts))}  components {len(parts)}  monodromy {mono.render()}")
    lines.append(f"pairwise non-isomorphic: {'yes' if distinct else 'no'}")
    report = {"degree": n, "classes": [list(p) for p, _ in covs], "pairwise_non_isomorphic": distinct}
    return (OK if distinct else FALSE), report, lines


def _spectrum(c, algebra):
    return (generated_subalgebra_spectrum if algebra == "generated" else double_commutant_spectrum)(c)


def cmd_reconstruct(args):
    doc = load_input(args.input)
    _need(doc, "correspondences", args.input)
    lines, report = [], {}
    for name, c in doc.correspondences.items():
        s = _spectrum(c, args.algebra)
        counts = sorted(set(s.fiber_counts().values()))
        entry = {"vertices": len(s.vertices), "edges": len(s.edges), "fiber_counts": counts,
                 "branch_set": len(s.branch_set())}
        lines.append(f"{name}: {args.algebra} spectrum has {len(s.vertices)} vertices, {len(s.edges)} edges, "
                     f"fiber counts {counts}, {len(s.branch_set())} branch vertices")
        mult = sorted(set(s.multiplicity.values()))
        entry["multiplicities"] = mult
        if s.is_constant() and mult == [1]:
            rebuilt = reconstruct_from_spectrum(c, s, name=f"{name}-rebuilt")
            same = correspondences_isomorphic(c, rebuilt) is not None
            entry["reconstructed_isomorphic"] = same
            lines.append(f"  reconstructed correspondence of degree {rebuilt.degree}: "
                         f"{'isomorphic' if same else 'not isomorphic'} to the input")
        else:
            entry["reconstructed_isomorphic"] = None
            lines.append(f"  no reconstruction: multiplicities {mult}, "
                         f"{'constant' if s.is_constant() else 'branched'} fiber count")
        report[name] = entry
    return OK, report, lines


def cmd_roundtrip(args):
    doc = load_input(args.input)
    _need(doc, "correspondences", args.input)
    rng = np.random.default_rng(args.seed)
    lines, report, ok = [], {}, True
    for name, c in doc.correspondences.items():
        targets = [(name, c)] + [(f"{name} perturbed {k + 1}", perturb_correspondence(c, rng))
                                 for k in range(args.perturb)]
        for label, cc in targets:
            rep = diagram_roundtrip_check(cc, args.tolerance)
            ok &= rep.passed
            report[label] = {"passed": rep.passed,
                             "legs": [{"name": leg.name, "passed": leg.passed, "residual": leg.residual}
                                      for leg in rep.legs]}
            lines.append(f"{label}:")
            lines += ["  " + ln for ln in rep.render().splitlines()]
    return (OK if ok else FALSE), report, lines


def cmd_compare(args):
    a = _single(load_input(args.first), args.first)
    b = _single(load_input(args.second), args.second)
    if a.source != b.source or a.target != b.target:
        raise InputError("correspondences live over different spaces")
    lines, report = [], {}
    graph = correspondences_isomorphic(a, b) is not None
    report["graph_isomorphic"] = graph
    lines.append(f"twisted graphs isomorphic: {'yes' if graph else 'no'}")
    field = cstar_correspondences_isomorphic(a, b, seed=args.seed)
    cstar = field is not None
    report["cstar_isomorphic"] = cstar
    if cstar:
        rep = unitary_field_report(a, b, field)
        report["cstar_witness"] = rep
        lines.append(f"C*-correspondences isomorphic: yes (unitarity {rep['unitarity']:.1e}, "
                     f"intertwining {rep['intertwining']:.1e}, largest edge jump {rep['max_jump']:.3f})")
    else:
        lines.append("C*-correspondences isomorphic: no")
    local, bad = locally_conjugate(a, b)
    report["locally_conjugate"] = local
    report["non_conjugate_vertices"] = bad
    lines.append(f"locally conjugate: {'yes' if local else 'no'}" + ("" if local else f" (fails at {bad})"))
    try:
        v = constant_rank_iso_check(a, b, args.algebra)
        report["constant_rank_verdict"] = v.label
        report["determinant_classes_match"] = v.bundles_match
        lines.append(f"constant-rank check ({args.algebra}): {v.label}")
    except NotConstantRank as e:
        report["constant_rank_verdict"] = None
        lines.append(f"constant-rank check ({args.algebra}): not applicable, {e}")
    return (OK if cstar else FALSE), report, lines


def cmd_gallery(args):
    if args.name is None:
        lines = []
        for name in gallery.names():
            lines.append(f"{name:<32} {gallery.load(name).summary}")
        return OK, {"instances": gallery.names()}, lines
    try:
        inst = gallery.load(args.name)
    except KeyError as e:
        raise InputError(e.args[0]) from None
    text = textio.emit_document(textio.instance_document(inst))
    return OK, {"name": inst.name, "text": text}, text.rstrip("\n").splitlines()


# ---------------------------------------------------------------- driver

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=TOL_NUM, help="numerical tolerance (default %(default)g)")
    common.add_argument("--structured", action="store_true", help="emit a JSON report")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")

    p = argparse.ArgumentParser(prog="twistcorr", description="Twisted correspondences on finite Čech models.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("check", parents=[common], help="validate spaces, cocycles and correspondences")
    s.add_argument("input")
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("build", parents=[common], help="build the covering of each cocycle")
    s.add_argument("input")
    s.set_defaults(func=cmd_build)
    s = sub.add_parser("chern", parents=[common], help="first Chern class (determinant bundle for degree > 1)")
    s.add_argument("input")
    s.set_defaults(func=cmd_chern)
    s = sub.add_parser("classify-circle", parents=[common], help="list the n-sheeted coverings of the circle")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_classify_circle)
    s = sub.add_parser("reconstruct", parents=[common], help="spectrum of a commutative subalgebra and reconstruction")
    s.add_argument("input")
    s.add_argument("--algebra", choices=("generated", "double_commutant"), default="double_commutant")
    s.set_defaults(func=cmd_reconstruct)
    s = sub.add_parser("roundtrip", parents=[common], help="atlas and Cartan round trips")
    s.add_argument("input")
    s.add_argument("--perturb", type=int, default=0, help="also check this many random gauge perturbations")
    s.set_defaults(func=cmd_roundtrip, tolerance=1e-8)
    s = sub.add_parser("compare", parents=[common], help="compare two correspondences")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--algebra", choices=("generated", "double_commutant"), default="generated")
    s.set_defaults(func=cmd_compare)
    s = sub.add_parser("gallery", parents=[common], help="list gallery instances or print one in text format")
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_gallery)
    return p


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        code, report, lines = args.func(args)
    except (InputError, TwistError) as e:
        if args.structured:
            print(json.dumps({"command": args.command, "error": str(e)}, sort_keys=True), file=out)
        print(f"error: {e}", file=err)
        return INPUT_ERROR
    if args.structured:
        payload = {"command": args.command, "exit_code": code, "report": _jsonable(report)}
        print(json.dumps(payload, sort_keys=True, indent=2), file=out)
    else:
        print("\n".join(lines), file=out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
