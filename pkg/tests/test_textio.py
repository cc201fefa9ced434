import pytest

from twistcorr import gallery
from twistcorr.errors import ParseError
from twistcorr.textio import (correspondences_equal, emit_document, instance_document, parse_document,
                              parse_permutation)

FAST = [n for n in gallery.names() if not n.startswith("square")]

SMALL = """\
space S  # a triangle
  vertices 0 1 2
  edges 0~1 1~2 0~2
  chart 0 1
  chart 1 2
  chart 2 0
end
cocycle g on S degree 2
  pair 0 1 : 1 -> (1 2) ; 1 1
end
"""


@pytest.mark.parametrize("name", FAST)
def test_gallery_round_trip(name):
    doc = instance_document(gallery.load(name))
    text = emit_document(doc)
    back = parse_document(text)
    assert emit_document(back) == text
    for key, c in doc.correspondences.items():
        assert correspondences_equal(c, back.correspondences[key])


def test_parse_small_document():
    doc = parse_document(SMALL)
    t = doc.cocycles["g"]
    assert t.degree == 2 and t(0, 1, 1).perm.render() == "(1 2)"
    assert t(1, 0, 1).perm.render() == "(1 2)"


def test_parse_permutation():
    assert parse_permutation("(1 3)", 3).images == (2, 1, 0)
    assert parse_permutation("id", 2).is_identity()
    with pytest.raises(ParseError):
        parse_permutation("(1 2)(2 3)", 3)
    with pytest.raises(ParseError):
        parse_permutation("(1 4)", 3)


def test_space_without_charts():
    with pytest.raises(ParseError, match="no charts"):
        parse_document("space S\n  vertices 0 1\n  edges 0~1\nend\n")


def test_malformed_phase_reports_position():
    bad = SMALL.replace("; 1 1", "; 1 oops")
    with pytest.raises(ParseError) as info:
        parse_document(bad)
    assert info.value.line == 9
    assert info.value.column == bad.splitlines()[8].index("oops") + 1


def test_unknown_vertex():
    with pytest.raises(ParseError):
        parse_document(SMALL.replace("pair 0 1 : 1", "pair 0 1 : 7"))
