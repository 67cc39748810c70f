import pytest

from lambekbang import data_path
from lambekbang.kernel import BL1, RuleId, check_derivation
from lambekbang.lexicon import (
    Lexicon,
    UnknownToken,
    Verdict,
    candidate_sequents,
    load_lexicon,
    parse_lexicon,
    parse_sentence,
    tokenize,
)
from lambekbang.syntax import Atom, ParseError, parse_formula, render

LEX = load_lexicon(data_path("english.lex"))


def test_parse_lexicon():
    lex = parse_lexicon("""
        sentence : s    # the goal
        a : np
        a : np/n
        w : []-1(np\\s) island
    """)
    assert lex.sentence_type == Atom("s")
    assert [render(e.formula) for e in lex.lookup("a")] == ["np", "np/n"]
    assert lex.lookup("w")[0].island and "w" in lex and "zz" not in lex


@pytest.mark.parametrize("text", ["a np", ": np", "a :", "a : np/"])
def test_bad_lexicon_lines(text):
    with pytest.raises(ParseError):
        parse_lexicon(text)


def test_tokenize():
    assert tokenize("John loves Mary.") == ("John", "loves", "Mary")
    assert tokenize("yes, no") == ("yes", "no")


def test_island_spans():
    lex = Lexicon()
    lex.add("x", Atom("a"))
    lex.add("w", Atom("b"), island=True)
    got = [render(s) for _, s in candidate_sequents(lex, ("x", "w", "x"), Atom("s"))]
    assert got == ["a, [b], a => s", "a, [b, a] => s", "a, b, a => s"]


@pytest.mark.parametrize("sentence,target,verdict", [
    ("John loves Mary", None, Verdict.GRAMMATICAL),
    ("the girl whom John met yesterday", "N", Verdict.GRAMMATICAL),
    ("the paper that John signed without reading", "N", Verdict.GRAMMATICAL),
    ("the book which John laughed without reading", "N", Verdict.UNGRAMMATICAL),
    ("John loves", None, Verdict.UNGRAMMATICAL),
])
def test_example_sentences(sentence, target, verdict):
    j = parse_sentence(LEX, sentence, parse_formula(target) if target else None)
    assert j.verdict is verdict
    if verdict is Verdict.GRAMMATICAL:
        check_derivation(j.derivation, BL1)
        assert j.sequent == j.derivation.conclusion


def test_parasitic_copy_is_contrb():
    j = parse_sentence(LEX, "the paper that John signed without reading", parse_formula("N"))
    assert j.derivation.count(RuleId.ContrB) == 1


def test_unknown_token():
    with pytest.raises(UnknownToken):
        parse_sentence(LEX, "John loves Zelda")


def test_cap_gives_unknown():
    lex = Lexicon()
    for t in ("p", "q", "r"):
        lex.add("w", Atom(t))
    j = parse_sentence(lex, "w w w", Atom("s"), cap=5)
    assert j.verdict is Verdict.UNKNOWN and j.tried == 5
