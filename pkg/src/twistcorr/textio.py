"""Line-based text format for spaces, cocycles and correspondences.

    space NAME
      vertices a b c ...
      edges a~b b~c ...
      chart a b
      chart b c
    end
    cocycle NAME on SPACE degree N
      pair I J : X -> CYCLES ; PHASE ... PHASE
    end
    correspondence NAME
      cocycle COCYCLE
      target SPACE
      range X@K -> Y
    end

Chart indices I < J are 0-based positions in the chart list. Sheets K are 1-based indices in the
least chart containing X. Permutations are written in 1-based
cycle notation ("id", "(1 2)(3 4)"); phases are Python complex literals. '#' starts a comment.
Int-like tokens are read as integers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .bundle import build_twisted_covering
from .cocycle import TransitionSystem, from_pairs
from .correspondence import TwistedCorrespondence, make_correspondence
from .errors import ParseError, TwistError
from .group import DiagPermUnitary, Permutation, format_phase
from .space import CechSpace

_INT = re.compile(r"[+-]?\d+$")
_CYCLE = re.compile(r"\(([^()]*)\)")


@dataclass
class Document:
    spaces: dict = field(default_factory=dict)
    cocycles: dict = field(default_factory=dict)
    correspondences: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)  # correspondence name -> cocycle name


def _vertex(tok: str):
    return int(tok) if _INT.match(tok) else tok


def _render_vertex(v) -> str:
    s = str(v)
    if not s or any(ch.isspace() for ch in s) or any(ch in s for ch in "~#@;:") or s == "->":
        raise TwistError(f"vertex {v!r} cannot be written in the text format")
    return s


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for n, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0]
            if body.strip():
                self.items.append((n, body))
        self.pos = 0

    def next(self):
        if self.pos >= len(self.items):
            return None
        item = self.items[self.pos]
        self.pos += 1
        return item


def _tokens(body: str):
    """(token, 1-based column) pairs."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]


def parse_permutation(text: str, n: int, line: int = 0, column: int = 0) -> Permutation:
    text = text.strip()
    if text == "id":
        return Permutation.identity(n)
    rest = _CYCLE.sub("", text)
    if rest.strip():
        raise ParseError(f"malformed permutation {text!r}", line, column)
    cycles = []
    for m in _CYCLE.finditer(text):
        try:
            cyc = [int(t) - 1 for t in m.group(1).split()]
        except ValueError:
            raise ParseError(f"malformed cycle {m.group()!r}", line, column + m.start()) from None
        if any(k < 0 or k >= n for k in cyc):
            raise ParseError(f"cycle {m.group()!r} leaves 1..{n}", line, column + m.start())
        cycles.append(cyc)
    flat = [k for c in cycles for k in c]
    if len(flat) != len(set(flat)):
        raise ParseError(f"cycles of {text!r} are not disjoint", line, column)
    return Permutation.from_cycles(n, cycles)


def _parse_space(lines: _Lines, name: str, line: int) -> CechSpace:
    vertices, edges, charts = [], [], []
    while True:
        item = lines.next()
        if item is None:
            raise ParseError(f"space {name!r} is not closed by 'end'", line, 1)
        n, body = item
        toks = _tokens(body)
        head, col = toks[0]
        if head == "end":
            break
        if head == "vertices":
            vertices += [_vertex(t) for t, _ in toks[1:]]
        elif head == "edges":
            for t, c in toks[1:]:
                parts = t.split("~")
                if len(parts) != 2 or not all(parts):
                    raise ParseError(f"malformed edge {t!r}", n, c)
                edges.append((_vertex(parts[0]), _vertex(parts[1])))
        elif head == "chart":
            charts.append(frozenset(_vertex(t) for t, _ in toks[1:]))
        else:
            raise ParseError(f"unknown space entry {head!r}", n, col)
    if not charts:
        raise ParseError("no charts", line, 1)
    try:
        return CechSpace(name, tuple(vertices), tuple(edges), tuple(charts))
    except (ValueError, TwistError) as e:
        raise ParseError(f"space {name!r}: {e}", line, 1) from None


def _parse_cocycle(lines: _Lines, header, line: int, doc: Document) -> tuple[str, TransitionSystem]:
    words = [t for t, _ in header]
    if len(words) != 6 or words[2] != "on" or words[4] != "degree":
        raise ParseError("expected 'cocycle NAME on SPACE degree N'", line, 1)
    name, space_name = words[1], words[3]
    if space_name not in doc.spaces:
        raise ParseError(f"unknown space {space_name!r}", line, header[3][1])
    if not _INT.match(words[5]) or int(words[5]) < 1:
        raise ParseError(f"bad degree {words[5]!r}", line, header[5][1])
    base, n = doc.spaces[space_name], int(words[5])
    upper: dict = {}
    while True:
        item = lines.next()
        if item is None:
            raise ParseError(f"cocycle {name!r} is not closed by 'end'", line, 1)
        ln, body = item
        stripped = body.strip()
        if stripped == "end":
            break
        m = re.match(r"\s*pair\s+(\S+)\s+(\S+)\s*:\s*(\S+)\s*->(.*)$", body)
        if not m:
            raise ParseError("expected 'pair I J : X -> CYCLES ; PHASES'", ln, 1)
        i_tok, j_tok, x_tok, rest = m.groups()
        if not (_INT.match(i_tok) and _INT.match(j_tok)):
            raise ParseError("chart indices must be integers", ln, m.start(1) + 1)
        i, j, x = int(i_tok), int(j_tok), _vertex(x_tok)
        if ";" not in rest:
            raise ParseError("missing ';' between permutation and phases", ln, m.start(4) + 1)
        perm_txt, phase_txt = rest.split(";", 1)
        perm = parse_permutation(perm_txt, n, ln, m.start(4) + 1)
        phase_col = m.start(4) + len(perm_txt) + 2
        phases = []
        for tok, c in _tokens(phase_txt):
            try:
                phases.append(complex(tok))
            except ValueError:
                raise ParseError(f"malformed phase {tok!r}", ln, phase_col + c - 1) from None
        if len(phases) != n:
            raise ParseError(f"expected {n} phases, got {len(phases)}", ln, phase_col)
        if not i < j:
            raise ParseError("pairs must be listed with I < J", ln, m.start(1) + 1)
        if x not in base.index:
            raise ParseError(f"unknown vertex {x_tok!r}", ln, m.start(3) + 1)
        upper.setdefault((i, j), {})[x] = DiagPermUnitary(perm, tuple(phases))
    try:
        return name, from_pairs(base, n, upper)
    except TwistError as e:
        raise ParseError(f"cocycle {name!r}: {e}", line, 1) from None


def _parse_correspondence(lines: _Lines, name: str, line: int, doc: Document):
    cocycle = target = None
    entries = []
    while True:
        item = lines.next()
        if item is None:
            raise ParseError(f"correspondence {name!r} is not closed by 'end'", line, 1)
        ln, body = item
        toks = _tokens(body)
        head, col = toks[0]
        if head == "end":
            break
        if head == "cocycle" and len(toks) == 2:
            cocycle = toks[1]
        elif head == "target" and len(toks) == 2:
            target = toks[1]
        elif head == "range":
            m = re.match(r"\s*range\s+(\S+)@(\d+)\s*->\s*(\S+)\s*$", body)
            if not m:
                raise ParseError("expected 'range X@K -> Y'", ln, col)
            entries.append((ln, _vertex(m.group(1)), int(m.group(2)) - 1, _vertex(m.group(3))))
        else:
            raise ParseError(f"unknown correspondence entry {head!r}", ln, col)
    if cocycle is None or cocycle[0] not in doc.cocycles:
        raise ParseError("correspondence needs a known 'cocycle'", line, 1)
    if target is None or target[0] not in doc.spaces:
        raise ParseError("correspondence needs a known 'target' space", line, 1)
    t = doc.cocycles[cocycle[0]]
    cov, lb = build_twisted_covering(t, name=name)
    rng = {}
    for ln, x, k, y in entries:
        if (x, k) not in cov.index:
            raise ParseError(f"no sheet {k + 1} over {x!r}", ln, 1)
        rng[(x, k)] = y
    try:
        c = make_correspondence(cov, lb, doc.spaces[target[0]], rng, name)
    except TwistError as e:
        raise ParseError(f"correspondence {name!r}: {e}", line, 1) from None
    return c, cocycle[0]


def parse_document(text: str) -> Document:
    doc = Document()
    lines = _Lines(text)
    while True:
        item = lines.next()
        if item is None:
            return doc
        ln, body = item
        toks = _tokens(body)
        head, col = toks[0]
        try:
            if head == "space" and len(toks) == 2:
                doc.spaces[toks[1][0]] = _parse_space(lines, toks[1][0], ln)
            elif head == "cocycle":
                name, t = _parse_cocycle(lines, toks, ln, doc)
                doc.cocycles[name] = t
            elif head == "correspondence" and len(toks) == 2:
                c, src = _parse_correspondence(lines, toks[1][0], ln, doc)
                doc.correspondences[c.name] = c
                doc.sources[c.name] = src
            else:
                raise ParseError(f"unexpected {head!r}", ln, col)
        except ParseError:
            raise
        except TwistError as e:
            raise ParseError(str(e), ln, 1) from None


def parse_file(path: str) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# ---------------------------------------------------------------- emission

def emit_space(space: CechSpace, name: str | None = None) -> str:
    out = [f"space {name or space.name}", "  vertices " + " ".join(_render_vertex(v) for v in space.vertices)]
    if space.edges:
        out.append("  edges " + " ".join(f"{_render_vertex(u)}~{_render_vertex(v)}" for u, v in space.edges))
    for chart in space.charts:
        out.append("  chart " + " ".join(_render_vertex(v) for v in space.sorted_vertices(chart)))
    out.append("end")
    return "\n".join(out)


def emit_cocycle(t: TransitionSystem, name: str, space_name: str | None = None) -> str:
    base = t.base
    out = [f"cocycle {name} on {space_name or base.name} degree {t.degree}"]
    for (i, j) in sorted(t.data):
        if i >= j:
            continue
        for x in base.sorted_vertices(t.data[(i, j)]):
            g = t.data[(i, j)][x]
            out.append(f"  pair {i} {j} : {_render_vertex(x)} -> {g.perm.render()} ; " + " ".join(format_phase(p) for p in g.phases))
    out.append("end")
    return "\n".join(out)


def emit_correspondence(c: TwistedCorrespondence, cocycle_name: str, target_name: str | None = None) -> str:
    """Requires c's covering to use the (x, k) vertex ids produced by the covering builder."""
    out = [f"correspondence {c.name}", f"  cocycle {cocycle_name}", f"  target {target_name or c.target.name}"]
    for x in c.source.vertices:
        for k in range(c.degree):
            out.append(f"  range {_render_vertex(x)}@{k + 1} -> {_render_vertex(c.range[(x, k)])}")
    out.append("end")
    return "\n".join(out)


def emit_document(doc: Document) -> str:
    parts = [emit_space(s, name) for name, s in doc.spaces.items()]
    names = {id(s): n for n, s in doc.spaces.items()}

    def space_name(s):
        if id(s) in names:
            return names[id(s)]
        return next(n for n, t in doc.spaces.items() if t == s)

    parts += [emit_cocycle(t, name, space_name(t.base)) for name, t in doc.cocycles.items()]
    parts += [emit_correspondence(c, doc.sources[name], space_name(c.target)) for name, c in doc.correspondences.items()]
    return "\n\n".join(parts) + "\n"


def instance_document(instance) -> Document:
    """Document holding a gallery instance: its spaces, generating cocycle and correspondence."""
    doc = Document()
    src, tgt = instance.source, instance.target
    doc.spaces[src.name] = src
    if tgt != src:
        name = tgt.name if tgt.name != src.name else f"{tgt.name}-target"
        doc.spaces[name] = tgt
    cname = "g"
    doc.cocycles[cname] = instance.cocycle
    doc.correspondences[instance.correspondence.name] = instance.correspondence
    doc.sources[instance.correspondence.name] = cname
    return doc


def correspondences_equal(a: TwistedCorrespondence, b: TwistedCorrespondence) -> bool:
    return (a.covering == b.covering and a.line.phases == b.line.phases and a.range == b.range
            and a.target == b.target)
