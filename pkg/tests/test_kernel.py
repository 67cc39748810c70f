import pytest

from lambekbang.kernel import (
    BL1,
    L1BANG,
    L1BANGW,
    Derivation,
    DerivationError,
    L1Theory,
    PathInvalid,
    RuleId,
    RuleError,
    RuleInstance,
    RuleUnavailable,
    ShapeMismatch,
    System,
    applicable_instances,
    apply_forward,
    available,
    check_derivation,
    find_instance,
    instantiate_backward,
    is_normal,
    normalize_perms,
    perm_between,
)
from lambekbang.prover import decide_bnnc, search
from lambekbang.syntax import check_bnnc, parse_sequent, render, sequent_subformulas

from fixtures import JOHN_LOVES_MARY, MEDIAL, PARASITIC, build
from gen import bnnc_pool


def prems(text, rule, sys=BL1, **kw):
    return [render(p) for p in instantiate_backward(parse_sequent(text), RuleInstance(rule, **kw), sys)]


def test_overl_john_loves_mary():
    assert prems("N, (N\\S)/N, N => S", RuleId.OverL, index=1, splits=(3,)) == [
        "N => N", "N, N\\S => S"]


def test_underl_takes_preceding_segment():
    assert prems("p, q, q\\r => r", RuleId.UnderL, index=2, splits=(1,)) == [
        "q => q", "p, r => r"]


def test_bangr_promotion_shape():
    assert prems("!p => !p", RuleId.BangR) == ["!p => p"]
    assert prems("=> !1", RuleId.BangR) == ["=> 1"]
    with pytest.raises(ShapeMismatch):
        prems("!p, q => !p", RuleId.BangR)
    with pytest.raises(ShapeMismatch):
        prems("[!p] => !p", RuleId.BangR)


def test_bracket_rules():
    assert prems("<>p => q", RuleId.DiamondL, index=0) == ["[p] => q"]
    assert prems("[p, q] => <>r", RuleId.DiamondR) == ["p, q => r"]
    assert prems("p => []-1q", RuleId.BoxInvR) == ["[p] => q"]
    assert prems("r, [[]-1p] => q", RuleId.BoxInvL, index=1) == ["r, p => q"]
    with pytest.raises(ShapeMismatch):
        prems("[[]-1p, r] => q", RuleId.BoxInvL, index=0)


def test_contrb_copies_block_into_new_bracket():
    assert prems("!p, !q, r, s => t", RuleId.ContrB, index=0, splits=(2, 3)) == [
        "!p, !q, [!p, !q, r], s => t"]
    # empty gamma is allowed
    assert prems("!p => t", RuleId.ContrB, index=0, splits=(1, 1)) == ["!p, [!p] => t"]


def test_contrb_needs_a_banged_block():
    with pytest.raises(RuleError):
        prems("!p, r => t", RuleId.ContrB, index=0, splits=(0, 1))
    with pytest.raises(RuleError):
        prems("p, r => t", RuleId.ContrB, index=0, splits=(1, 2))


def test_contr_and_weak():
    assert prems("!p => q", RuleId.Contr, L1BANG, index=0) == ["!p, !p => q"]
    assert prems("!p, q => q", RuleId.Weak, L1BANGW, index=0) == ["q => q"]


@pytest.mark.parametrize("rule,sys,ok", [
    (RuleId.ContrB, BL1, True), (RuleId.ContrB, L1BANG, False),
    (RuleId.Contr, BL1, False), (RuleId.Contr, L1BANGW, True),
    (RuleId.Weak, L1BANG, False), (RuleId.Weak, L1BANGW, True),
    (RuleId.DiamondL, L1BANG, False), (RuleId.BoxInvR, BL1, True),
    (RuleId.AxTheory, BL1, False), (RuleId.BangL, L1Theory([]), False),
    (RuleId.PermStar, L1Theory([]), False), (RuleId.OverL, L1Theory([]), True),
])
def test_availability(rule, sys, ok):
    assert available(rule, sys) is ok


def test_unavailable_rule_raises():
    with pytest.raises(RuleUnavailable):
        prems("!p => q", RuleId.Contr, BL1, index=0)


def test_bad_path():
    with pytest.raises(PathInvalid):
        prems("p => p", RuleId.BangL, node=(3,), index=0)


def test_theory_axioms_must_be_plain():
    with pytest.raises(ValueError):
        L1Theory([parse_sequent("!a => b")])
    with pytest.raises(ValueError):
        System("BL1", (parse_sequent("a => b"),))
    th = L1Theory([parse_sequent("a, b => s")])
    assert prems("a, b => s", RuleId.AxTheory, th, axiom=0) == []


def test_permstar_moves_bangs_only():
    s = parse_sequent("!p, q, r, !r => q")
    assert perm_between(s.antecedent, parse_sequent("!r, q, !p, r => q").antecedent)
    assert perm_between(s.antecedent, parse_sequent("!p, r, q, !r => q").antecedent) is None
    # bangs never cross a bracket boundary
    t = parse_sequent("!p, [q] => q")
    assert perm_between(t.antecedent, parse_sequent("[q, !p] => q").antecedent) is None


def test_enumeration_examples():
    assert [i.rule for i in applicable_instances(parse_sequent("p => p"), BL1)] == [RuleId.AxId]
    assert [i.rule for i in applicable_instances(parse_sequent("=> 1"), BL1)] == [RuleId.AxUnit]
    splits = [i.splits for i in applicable_instances(parse_sequent("p, q => p*q"), BL1)
              if i.rule is RuleId.ProdR]
    assert splits == [(0,), (1,), (2,)]


def test_enumeration_is_deterministic():
    s = parse_sequent("!p, [q], p\\q => <>q*q")
    assert applicable_instances(s, BL1, 12) == applicable_instances(s, BL1, 12)


@pytest.mark.parametrize("tree", [JOHN_LOVES_MARY, MEDIAL, PARASITIC],
                         ids=["sentence", "medial", "parasitic"])
def test_linguistic_derivations_check(tree):
    d = build(tree)
    check_derivation(d, BL1)
    assert is_normal(d)


def test_parasitic_uses_contrb_once():
    d = build(PARASITIC)
    assert d.count(RuleId.ContrB) == 1 and d.count(RuleId.BoxInvL) == 1


def test_checker_reports_path():
    d = build(JOHN_LOVES_MARY)
    bad = Derivation(d.conclusion, d.rule, (d.premises[1], d.premises[0]))
    with pytest.raises(DerivationError) as info:
        check_derivation(bad, BL1)
    assert info.value.path == () and info.value.reason == "premise mismatch"


def test_contr_rejected_in_bl1():
    s = parse_sequent("!p => p*p")
    d = search(s, L1BANG).derivation
    check_derivation(d, L1BANG)
    with pytest.raises(DerivationError) as info:
        check_derivation(d, BL1)
    assert "RuleUnavailable" in info.value.reason


def test_cut_needs_permission():
    left = build(("AxId", "p => p"))
    right = build(("AxId", "p => p"))
    inst = RuleInstance(RuleId.Cut, index=0, splits=(1,), formula=parse_sequent("p => p").succedent)
    d = Derivation(parse_sequent("p => p"), inst, (left, right))
    check_derivation(d, BL1, allow_cut=True)
    with pytest.raises(DerivationError):
        check_derivation(d, BL1)


def test_json_roundtrip_of_fixture():
    d = build(PARASITIC)
    assert Derivation.from_json(d.to_json()) == d


def test_from_json_rejects_unknown_rule():
    with pytest.raises(ValueError):
        Derivation.from_dict({"rule": "Frob", "conclusion": "p => p"})


def test_normalize_merges_stacked_perms():
    s = parse_sequent("!p, !q, !r => (p*q)*r")
    mid = parse_sequent("!q, !p, !r => (p*q)*r")
    top = parse_sequent("!p, !r, !q => (p*q)*r")
    inner = decide_bnnc(top).derivation
    d1 = Derivation(mid, find_instance(mid, RuleId.PermStar, [top], BL1), (inner,))
    d2 = Derivation(s, find_instance(s, RuleId.PermStar, [mid], BL1), (d1,))
    check_derivation(d2, BL1)
    n = normalize_perms(d2)
    check_derivation(n, BL1)
    assert is_normal(n) and n.conclusion == s
    assert n.nonperm_size == d2.nonperm_size


_POOL = bnnc_pool(11, 60, 9)


@pytest.fixture(scope="module")
def pool_derivations():
    out = []
    for s in _POOL:
        r = decide_bnnc(s)
        if r.derivable:
            out.append(r.derivation)
    assert len(out) >= 10
    return out


def test_forward_backward_coherence(pool_derivations):
    for d in pool_derivations:
        for _, n in d.nodes():
            if n.rule.rule is RuleId.AxId:
                continue
            got = apply_forward(n.rule, [p.conclusion for p in n.premises], BL1)
            assert got == n.conclusion


def test_subformula_property(pool_derivations):
    for d in pool_derivations:
        goal = sequent_subformulas(d.conclusion)
        for _, n in d.nodes():
            assert sequent_subformulas(n.conclusion) <= goal


def test_polarity_respect(pool_derivations):
    for d in pool_derivations:
        for _, n in d.nodes():
            assert check_bnnc(n.conclusion).ok
