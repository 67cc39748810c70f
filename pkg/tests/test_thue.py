import itertools

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from lambekbang import data_path
from lambekbang.kernel import BL1, L1BANG, L1BANGW, RuleId, check_derivation
from lambekbang.prover import Budget, Status, decide_bnnc, search
from lambekbang.syntax import bfp, check_bnnc, parse_sequent, render
from lambekbang.thue import (
    Answer,
    Grammar,
    RewriteTrace,
    Variant,
    base_derivation,
    build_bracketed_derivation,
    derives,
    encode,
    goal_sequent,
    inst_macro,
    load_grammar,
    parse_grammar,
    render_grammar,
    translate_bfp_derivation,
    translate_to_weak,
    weak_aux,
)

G1, G2, G3 = (load_grammar(data_path(f"g{i}.grammar")) for i in (1, 2, 3))


def test_parse_and_render_roundtrip():
    for g in (G1, G2, G3):
        assert parse_grammar(render_grammar(g)) == g


@pytest.mark.parametrize("text", [
    "terminals: a\nnonterminals: s\ns -> a",
    "start: x\nterminals: a\nnonterminals: s\ns -> a",
    "start: s\nterminals: a s\nnonterminals: s\ns -> a",
    "start: s\nterminals: a\nnonterminals: s\ns -> c",
    "start: s\nterminals: a\nnonterminals: s\ns ->",
    "start: s\nwhatever\n",
])
def test_bad_grammars(text):
    with pytest.raises(ValueError):
        parse_grammar(text)


def test_derives():
    assert derives(G2, "aaabbb").answer is Answer.YES
    assert derives(G2, "aab").answer is Answer.NO
    r = derives(G3, "bba")
    assert r.answer is Answer.YES and r.trace.result(G3) == tuple("bba")
    with pytest.raises(ValueError):
        derives(G2, "abc")


def test_derives_exhausted_for_contracting_grammar():
    g = Grammar.make("s", "a", "s", [("s", "aa"), ("aa", "a")])
    assert not g.non_contracting
    assert derives(g, "a").answer is Answer.EXHAUSTED   # "aa" exceeds the cap
    assert derives(g, "a", max_len=2).answer is Answer.YES
    assert derives(g, "s", max_len=0).answer is Answer.YES
    r = derives(g, "aaaa", max_len=3)
    assert r.answer is Answer.EXHAUSTED


def test_trace_replay_and_errors():
    t = RewriteTrace(("s",), ((0, 0), (1, 1)))
    assert t.replay(G2) == [("s",), tuple("asb"), tuple("aabb")]
    with pytest.raises(ValueError):
        RewriteTrace(("s",), ((0, 1),)).replay(G2)


def test_trace_concat_and_cut_into():
    t = derives(G2, "ab").trace
    both = t.concat(t, G2)
    assert both.start == ("s", "s") and both.result(G2) == tuple("abab")
    outer = RewriteTrace(("s",), ((0, 0),))
    assert t.cut_into(outer, 1, G2).result(G2) == tuple("aabb")
    with pytest.raises(ValueError):
        t.cut_into(outer, 0, G2)


def test_encoding_bundle():
    e = encode(G2)
    assert [render(b) for b in e.B_list] == ["s/a*s*b", "s/a*b"]
    assert render(e.PhiTilde[0]) == "!(1/![]-1(s/a*s*b))"
    assert render(e.theory[1]) == "a, b => s"
    assert "GammaTilde" in e.render()


def test_goal_sequents():
    s, sys = goal_sequent(G1, "ab", Variant.BRACKETED)
    assert sys is BL1 and not check_bnnc(s).ok
    s, sys = goal_sequent(G1, "ab", Variant.WEAK)
    assert sys is L1BANGW and len(s.antecedent) == 3
    s, sys = goal_sequent(G1, "ab", Variant.THEORY)
    assert render(s) == "a, b => s" and sys.axioms == encode(G1).theory
    with pytest.raises(ValueError):
        goal_sequent(G1, "abc", Variant.PLAIN)


def test_base_derivation_checks():
    for g in (G1, G2, G3):
        d = base_derivation(g)
        check_derivation(d, BL1)
        assert d.conclusion == goal_sequent(g, g.start, Variant.BRACKETED)[0]


def test_inst_macro_removes_one_item():
    d = search(parse_sequent("!(1/![]-1q), ![]-1q, q, q => q*q"), BL1).derivation
    out = inst_macro(d, 1, 3)
    check_derivation(out, BL1)
    assert render(out.conclusion) == "!(1/![]-1q), ![]-1q, q => q*q"
    assert 3 <= out.size - d.size <= 5
    with pytest.raises(ValueError):
        inst_macro(d, 1, 0)
    with pytest.raises(ValueError):
        inst_macro(d, 2, 3)


def test_bracketed_derivation_uses_the_macro():
    src = build_bracketed_derivation(G1, derives(G1, "ab").trace)
    check_derivation(src, BL1)
    assert src.count(RuleId.ContrB) == 1 and src.count(RuleId.BoxInvL) == 1


@pytest.mark.parametrize("g,word", [(G1, "ab"), (G2, "aabb"), (G3, "bbba"), (G3, "abb")],
                         ids=["g1-ab", "g2-aabb", "g3-bbba", "g3-abb"])
def test_translations(g, word):
    r = derives(g, word)
    assert r.answer is Answer.YES
    d = build_bracketed_derivation(g, r.trace)
    check_derivation(d, BL1)
    plain = translate_bfp_derivation(d)
    check_derivation(plain, L1BANG)
    assert plain.conclusion == bfp(d.conclusion) == goal_sequent(g, word, Variant.PLAIN)[0]
    weak = translate_to_weak(plain, g)
    check_derivation(weak, L1BANGW, allow_cut=True)
    assert weak.conclusion == goal_sequent(g, word, Variant.WEAK)[0]


def test_weak_aux():
    d = weak_aux(parse_sequent("=> s/a*b").succedent)
    check_derivation(d, L1BANGW)
    assert render(d.conclusion) == "=> !(1/!(s/a*b))"


def test_theory_search_matches_rewriting():
    for g in (G1, G2):
        for n in range(1, 5):
            for w in itertools.product(g.terminals, repeat=n):
                yes = derives(g, w).answer is Answer.YES
                s, th = goal_sequent(g, w, Variant.THEORY)
                r = search(s, th, Budget.for_sequent(s, time_limit=5.0))
                if yes:
                    assert r.derivable
                    check_derivation(r.derivation, th, allow_cut=True)
                else:
                    assert r.status is Status.EXHAUSTED


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from("ab"), min_size=1, max_size=6))
def test_bracketed_derivation_exactly_when_derivable(word):
    r = derives(G3, word)
    if r.answer is Answer.YES:
        d = build_bracketed_derivation(G3, r.trace)
        check_derivation(d, BL1)
        assert d.conclusion == goal_sequent(G3, word, Variant.BRACKETED)[0]
    else:
        assert r.answer is Answer.NO
