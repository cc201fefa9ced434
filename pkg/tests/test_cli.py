import io
import json

import pytest

from twistcorr.cli import FALSE, INPUT_ERROR, OK, run


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_classify_circle_counts():
    code, out, _ = _run("classify-circle", "4", "--structured")
    assert code == OK
    assert len(json.loads(out)["report"]["classes"]) == 5


def test_check_and_build_gallery():
    assert _run("check", "gallery:circle-covers/3/2+1")[0] == OK
    code, out, _ = _run("build", "gallery:circle-covers/3/2+1")
    assert code == OK and "2 + 1" in out


def test_chern_torsion():
    code, out, _ = _run("chern", "gallery:rp2-antipodal")
    assert code == OK and "Z/2" in out


def test_compare_exit_codes():
    assert _run("compare", "gallery:circle-covers/2/2", "gallery:circle-covers/2/2")[0] == OK
    assert _run("compare", "gallery:example-different-ranges/r1", "gallery:example-different-ranges/r2")[0] == FALSE


def test_input_errors():
    code, _, err = _run("check", "gallery:no-such-thing")
    assert code == INPUT_ERROR and err.startswith("error:")
    code, _, err = _run("check", "/nonexistent/file.txt")
    assert code == INPUT_ERROR


def test_check_file_and_invalid_cocycle(tmp_path):
    good = tmp_path / "good.txt"
    _, text, _ = _run("gallery", "circle-covers/2/2")
    good.write_text(text)
    assert _run("check", str(good))[0] == OK
    bad = tmp_path / "bad.txt"
    bad.write_text("space S\n vertices 0 1 2\n edges 0~1 1~2 0~2\n chart 0 1 2\n chart 1 2\n chart 2 0\nend\n"
                   "cocycle g on S degree 1\n pair 0 1 : 1 -> id ; 1\n pair 0 1 : 2 -> id ; 1j\n"
                   " pair 0 2 : 0 -> id ; 1\n pair 0 2 : 2 -> id ; 1\n pair 1 2 : 2 -> id ; 1\nend\n")
    assert _run("check", str(bad))[0] == FALSE


def test_structured_output_is_deterministic():
    a = _run("roundtrip", "gallery:circle-covers/2/2", "--perturb", "2", "--seed", "5", "--structured")
    b = _run("roundtrip", "gallery:circle-covers/2/2", "--perturb", "2", "--seed", "5", "--structured")
    assert a == b and a[0] == OK


def test_gallery_listing():
    code, out, _ = _run("gallery")
    assert code == OK and "rp2-antipodal" in out


def test_reconstruct_runs():
    code, out, _ = _run("reconstruct", "gallery:circle-two-points", "--structured")
    assert code == OK and json.loads(out)["command"] == "reconstruct"
