import json
import re
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticebm.cli import run
from latticebm.functions import PointMassFunction, evaluate
from latticebm.serialize import (
    FormatError,
    function_from_json,
    function_to_json,
    set_from_json,
    set_to_json,
)
from latticebm.sets import Box, Interval1D, SetExpr, count_lattice, membership

F = Fraction


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def interval_json(lo, hi, lo_open=False, hi_open=False):
    return {"dim": 1, "boxes": [{"lo": [lo], "hi": [hi], "lo_open": [lo_open], "hi_open": [hi_open]}],
            "points": []}


def test_verify_main_holds(tmp_path, capsys):
    k = write(tmp_path, "k.json", {"dim": 2, "boxes": [{"lo": ["0", "0"], "hi": ["3", "3"]}]})
    assert run(["verify", "--theorem", "main_bm", "--K", k, "--L", k, "--lambda", "1/2"]) == 0
    cert = json.loads(capsys.readouterr().out)
    assert cert["theorem"] == "main_bm" and cert["verdict"] == "HoldsEqual"
    assert cert["lhs"] == {"degree": 2, "terms": [["4", "1"]]}


def test_verify_naive_is_violated(tmp_path, capsys):
    k = write(tmp_path, "k.json", interval_json("0", "5/2"))
    l = write(tmp_path, "l.json", interval_json("0", "13/4"))
    assert run(["verify", "--theorem", "naive", "--K", k, "--L", l, "--lambda", "1/2"]) == 1
    cert = json.loads(capsys.readouterr().out)
    assert cert["verdict"] == "Violated" and cert["witness"]["G(M)"] == "3"


def test_verify_text_prints_exact_and_approximate_values(tmp_path, capsys):
    k = write(tmp_path, "k.json", interval_json("0", "1"))
    l = write(tmp_path, "l.json", interval_json("0", "3"))
    code = run(["verify", "--theorem", "bm_pmean", "--K", k, "--L", l, "--lambda", "1/2", "--p", "0",
                "--format", "text"])
    out = capsys.readouterr().out
    assert code == 0
    assert "rhs: 2*2^(1/2)" in out
    assert "approx 2.8284271247461900976" in out
    assert "approx 3.0000000000000000000" in out


def test_half_sum_positivity_error(tmp_path, capsys):
    k = write(tmp_path, "k.json", interval_json("1/3", "2/3"))
    l = write(tmp_path, "l.json", interval_json("0", "2"))
    assert run(["verify", "--theorem", "half_sum", "--K", k, "--L", l]) == 2
    assert "requires G_n(K)G_n(L)>0" in capsys.readouterr().err
    assert run(["verify", "--theorem", "half_sum", "--K", k, "--L", l, "--unguarded"]) == 0


@pytest.mark.parametrize("argv, message", [
    (["--lambda", "0.5"], "'p/q'"),
    (["--mpq", "2,2,3", "--theorem", "rational_dilation"], "m + p <= q"),
    (["--p", "-2"], "-1/n"),
])
def test_bad_inputs_exit_2(tmp_path, capsys, argv, message):
    k = write(tmp_path, "k.json", interval_json("0", "2"))
    base = ["verify", "--K", k, "--L", k]
    if "--theorem" not in argv:
        base += ["--theorem", "bm_pmean"]
        if "--lambda" not in argv:
            base += ["--lambda", "1/2"]
    assert run(base + argv) == 2
    err = capsys.readouterr().err
    assert message in err


def test_malformed_json_and_missing_files(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert run(["verify", "--theorem", "main_bm", "--K", str(bad), "--L", str(bad), "--lambda", "1/2"]) == 2
    assert "invalid JSON" in capsys.readouterr().err
    assert run(["verify", "--theorem", "main_bm", "--K", str(tmp_path / "nope.json"),
                "--L", str(bad), "--lambda", "1/2"]) == 2
    mixed = write(tmp_path, "m.json", {"dim": 2, "points": [["0"]]})
    assert run(["verify", "--theorem", "main_bm", "--K", mixed, "--L", mixed, "--lambda", "1/2"]) == 2
    assert "list of 2" in capsys.readouterr().err


def test_missing_flags_are_named(tmp_path, capsys):
    k = write(tmp_path, "k.json", interval_json("0", "2"))
    assert run(["verify", "--theorem", "lemma_ell", "--K", k, "--L", k, "--lambda", "1/2"]) == 2
    assert "--M" in capsys.readouterr().err
    assert run(["verify", "--theorem", "bbl", "--K", k, "--L", k]) == 2
    assert run(["bogus"]) == 2


def test_verify_bbl_with_basis_and_hypothesis_failure(tmp_path, capsys):
    pts = {"dim": 1, "points": [["0"], ["2"]]}
    k = write(tmp_path, "k.json", pts)
    f = write(tmp_path, "f.json", {"dim": 1, "support": [[["0"], "1"], [["2"], "3"]], "char": None})
    h = write(tmp_path, "h.json", {"dim": 1, "support": [[["0"], "1"], [["1"], "3"], [["2"], "3"]]})
    common = ["verify", "--theorem", "bbl", "--K", k, "--L", k, "--f", f, "--g", f,
              "--lambda", "1/2", "--p", "inf"]
    argv = common + ["--h", h]
    assert run(argv) == 0
    direct = json.loads(capsys.readouterr().out)
    assert run(argv + ["--basis", "2"]) == 0
    scaled = json.loads(capsys.readouterr().out)
    assert direct["theorem"] == scaled["theorem"] == "bbl"
    low = write(tmp_path, "low.json", {"dim": 1, "support": [[["1"], "1"]]})
    assert run(common + ["--h", low]) == 2
    assert "fails at x=" in capsys.readouterr().err


def test_card_sum_and_lemma_and_hks(tmp_path, capsys):
    a = write(tmp_path, "a.json", {"dim": 2, "points": [["0", "0"], ["1", "0"], ["2", "0"], ["1", "1"]]})
    b = write(tmp_path, "b.json", {"dim": 2, "points": [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]})
    assert run(["verify", "--theorem", "card_sum", "--A", a, "--B", b]) == 0
    assert json.loads(capsys.readouterr().out)["lhs"] == {"degree": 2, "terms": [["3", "2"]]}
    k = write(tmp_path, "k.json", {"dim": 1, "boxes": [{"lo": ["-4"], "hi": ["-1"]}, {"lo": ["1"], "hi": ["4"]}]})
    l = write(tmp_path, "l.json", {"dim": 1, "points": [["0"]]})
    m = write(tmp_path, "m.json", {"dim": 1, "boxes": [{"lo": ["-2"], "hi": ["-1/2"]}, {"lo": ["1/2"], "hi": ["2"]}]})
    assert run(["verify", "--theorem", "lemma_ell", "--K", k, "--L", l, "--M", m, "--lambda", "1/2"]) == 0
    assert json.loads(capsys.readouterr().out)["lhs"] == {"degree": 1, "terms": [["6", "1"]]}
    x = write(tmp_path, "x.json", interval_json("-3/2", "3/2"))
    assert run(["verify", "--theorem", "hks_sqrt", "--K", x, "--L", x]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "HoldsStrict"


def test_scan_and_repro_and_demo(capsys):
    assert run(["scan", "--theorem", "main_bm", "--n", "1", "--count", "20", "--seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == [] and report["instances_run"] == 60
    assert run(["scan", "--theorem", "naive", "--kind", "box_union", "--n", "1", "--count", "200",
                "--lambdas", "1/2", "--denominator-bound", "2", "--format", "text"]) == 0
    assert re.search(r"covered by a theorem\s+no", capsys.readouterr().out)
    assert run(["repro"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 12 and "FAIL" not in out
    assert run(["repro", "--check", "planar-sumset-18", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["passed"] is True
    assert run(["repro", "--check", "nothing"]) == 2


def test_demo_limit(tmp_path, capsys):
    s = write(tmp_path, "s.json", interval_json("0", "1/3"))
    assert run(["demo-limit", "--set", s, "--k-max", "10", "--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["lower_sums"][10] == [10, "341/1024"] and obj["volume"] == "1/3"


def test_verify_output_is_a_pure_function_of_inputs(tmp_path):
    k = write(tmp_path, "k.json", interval_json("0", "7/3", hi_open=True))
    argv = [sys.executable, "-m", "latticebm.cli", "verify", "--theorem", "main_bm", "--K", k, "--L", k,
            "--lambda", "1/3"]
    first = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    assert first == second and json.loads(first)["theorem"] == "main_bm"


def test_format_errors():
    with pytest.raises(FormatError):
        set_from_json({"dim": 1, "boxes": [{"lo": [0.5], "hi": ["1"]}]})
    with pytest.raises(FormatError):
        set_from_json({"dim": 1, "boxes": [{"lo": ["2"], "hi": ["1"]}]})
    with pytest.raises(FormatError):
        set_from_json({"dim": 0})
    with pytest.raises(FormatError):
        function_from_json({"dim": 1, "support": [[["0"], "-1"]]})
    with pytest.raises(FormatError):
        function_from_json({"dim": 1, "support": [], "char": {"dim": 2}})


coords = st.fractions(min_value=-4, max_value=4, max_denominator=4)


@st.composite
def sets(draw):
    n = draw(st.integers(1, 2))
    boxes = []
    for _ in range(draw(st.integers(0, 2))):
        fs = []
        for _ in range(n):
            a, b = sorted((draw(coords), draw(coords)))
            fs.append(Interval1D.point(a) if a == b else Interval1D(a, b, draw(st.booleans()), draw(st.booleans())))
        boxes.append(Box(tuple(fs)))
    pts = draw(st.lists(st.tuples(*[coords] * n), max_size=3))
    return SetExpr(n, tuple(boxes), frozenset(pts))


@settings(max_examples=150)
@given(sets())
def test_set_round_trip(S):
    back = set_from_json(json.loads(json.dumps(set_to_json(S))))
    assert back == S and count_lattice(back) == count_lattice(S)


@settings(max_examples=150)
@given(sets(), st.dictionaries(st.tuples(coords), st.fractions(min_value=0, max_value=5, max_denominator=6),
                               max_size=4), st.booleans())
def test_function_round_trip(S, values, with_char):
    if S.dim != 1:
        values = {x * S.dim: v for x, v in values.items()}
    phi = PointMassFunction(S.dim, values, S if with_char else None)
    back = function_from_json(json.loads(json.dumps(function_to_json(phi))))
    assert back == phi
    for x in list(values) + list(S.points):
        assert evaluate(back, x) == evaluate(phi, x)
        if with_char:
            assert membership(back.char_part, x) == membership(S, x)
