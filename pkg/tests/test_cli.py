import json

import pytest

from lambekbang import data_path
from lambekbang.cli import main
from lambekbang.cutelim import compose_cut
from lambekbang.prover import decide_bnnc
from lambekbang.syntax import parse_sequent


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:   # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_prove_derivable(capsys):
    code, out, _ = run(capsys, "prove", "N, (N\\S)/N, N => S")
    assert code == 0 and "route: decide_bnnc" in out and "OverL" in out


def test_prove_json(capsys):
    code, out, _ = run(capsys, "prove", "--json", "p, p\\q => q")
    payload = json.loads(out)
    assert code == 0 and payload["status"] == "Derivable"
    assert payload["derivation"]["rule"] == "UnderL"


@pytest.mark.parametrize("argv,code", [
    (["prove", "p => q"], 1),
    (["prove", "--system", "l1bang", "p => q"], 2),
    (["prove", "--system", "l1bang", "!p => p*p"], 0),
    (["prove", "--system", "l1bangw", "!p, q => q"], 0),
    (["prove", "p =>"], 64),
    (["prove", "--system", "theory", "a => s"], 64),
    (["prove", "--theory-file", "x", "a => s"], 64),
    (["frobnicate"], 64),
    (["bnnc", "![]-1p, q => p"], 1),
    (["bnnc", "!p, q => p*q"], 0),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_theory_file(capsys, tmp_path):
    f = tmp_path / "th.txt"
    f.write_text("# one axiom\na, b => s\n")
    code, out, _ = run(capsys, "prove", "--system", "theory", "--theory-file", str(f), "a, b => s")
    assert code == 0 and "AxTheory" in out


def test_bfp(capsys):
    code, out, _ = run(capsys, "bfp", "[![]-1p], <>q => q")
    assert code == 0 and out.strip() == "!p, q => q"


def test_encode(capsys):
    code, out, _ = run(capsys, "encode", "--json", str(data_path("g2.grammar")))
    payload = json.loads(out)
    assert code == 0 and payload["theory"] == ["a, s, b => s", "a, b => s"]


@pytest.mark.parametrize("word,code", [("aabb", 0), ("aab", 1), ("a c", 64)])
def test_rewrite(capsys, word, code):
    assert run(capsys, "rewrite", str(data_path("g2.grammar")), word)[0] == code


def test_parse(capsys):
    lex = str(data_path("english.lex"))
    assert run(capsys, "parse", lex, "John loves Mary")[0] == 0
    assert run(capsys, "parse", lex, "John loves")[0] == 1
    assert run(capsys, "parse", lex, "John loves Zelda")[0] == 64
    code, out, _ = run(capsys, "parse", "--json", "--target", "N", lex,
                       "the paper that John signed without reading")
    assert code == 0 and json.loads(out)["verdict"] == "Grammatical"


def test_check_and_elim_cut_roundtrip(capsys, tmp_path):
    left = decide_bnnc(parse_sequent("p, p\\q => q")).derivation
    right = decide_bnnc(parse_sequent("q, q\\r => r")).derivation
    cut = compose_cut(left, right, (0,))
    src = tmp_path / "cut.json"
    src.write_text(cut.to_json())
    assert run(capsys, "check", str(src))[0] == 1
    assert run(capsys, "check", "--allow-cut", str(src))[0] == 0
    dst = tmp_path / "free.json"
    assert run(capsys, "elim-cut", str(src), "-o", str(dst))[0] == 0
    code, out, _ = run(capsys, "check", "--json", str(dst))
    assert code == 0 and json.loads(out)["conclusion"] == "p, p\\q, q\\r => r"


def test_check_reports_bad_input(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert run(capsys, "check", str(f))[0] == 64
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 64
