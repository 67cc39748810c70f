import pytest

from lambekbang.cutelim import (
    CutEliminationError,
    CutMeasure,
    CutStep,
    MalformedInput,
    compose_cut,
    eliminate_cuts,
)
from lambekbang.kernel import BL1, L1BANG, L1Theory, Derivation, RuleId, check_derivation, is_normal
from lambekbang.prover import decide_bnnc, search
from lambekbang.syntax import parse_sequent, parse_formula

from gen import case3_derivations, cut_derivations, eta


def proof(text, sys=BL1):
    s = parse_sequent(text)
    r = decide_bnnc(s) if sys is BL1 else search(s, sys)
    assert r.derivable, text
    return r.derivation


def eliminated(d, sys=BL1):
    log = []
    out = eliminate_cuts(d, sys, log)
    check_derivation(out, sys)
    assert out.conclusion == d.conclusion
    assert out.count(RuleId.Cut) == 0 and is_normal(out)
    assert all(step.decreases() for step in log)
    return out, log


def test_measure_order():
    assert CutMeasure(1, 9) < CutMeasure(2, 0)
    assert CutMeasure(2, 3) < CutMeasure(2, 4)
    assert not CutMeasure(2, 4) < CutMeasure(2, 4)


def test_step_decrease_rules():
    assert CutStep(CutMeasure(3, 3), "4", None, None).decreases()
    assert CutStep(CutMeasure(2, 50), "4", CutMeasure(3, 3), "4").decreases()
    assert not CutStep(CutMeasure(3, 4), "5", CutMeasure(3, 3), "5").decreases()
    # after Case 3 only the formula size has to drop
    assert CutStep(CutMeasure(2, 90), "4", CutMeasure(3, 3), "3").decreases()
    assert not CutStep(CutMeasure(3, 1), "4", CutMeasure(3, 9), "3").decreases()


def test_compose_cut():
    d = compose_cut(proof("p, p\\q => q"), proof("q, q\\r => r"), (0,))
    assert str(d.conclusion) == "p, p\\q, q\\r => r"
    check_derivation(d, BL1, allow_cut=True)
    with pytest.raises(ValueError):
        compose_cut(proof("p => p"), proof("q, q\\r => r"), (0,))


def test_compose_cut_inside_bracket():
    d = compose_cut(proof("p, p\\q => q"), proof("[q] => <>q"), (0, 0))
    assert str(d.conclusion) == "[p, p\\q] => <>q"
    out, _ = eliminated(d)
    assert out.count(RuleId.DiamondR) == 1


def test_principal_cut_shrinks_formula():
    a = parse_formula("p\\q")
    d = compose_cut(eta(a), proof("p, p\\q => q"), (1,))
    _, log = eliminated(d)
    assert log[0].case == "4"
    assert all(s.measure.kappa < 3 for s in log[1:])


def test_case3_contrb():
    d = compose_cut(proof("!q, !(q\\p) => !p"), proof("!p, r => p*<>(p*r)"), (0,))
    out, log = eliminated(d)
    assert log[0].case == "3"
    assert str(out.conclusion) == "!q, !(q\\p), r => p*<>(p*r)"
    # the whole block !q, !(q\p) is contracted at once
    assert out.count(RuleId.ContrB) == 1


def test_case3_with_empty_context_is_rejected():
    d = compose_cut(proof("=> !1"), proof("!1, q => <>q"), (0,))
    check_derivation(d, BL1, allow_cut=True)
    assert decide_bnnc(d.conclusion).status.value == "NotDerivable"
    with pytest.raises(CutEliminationError):
        eliminate_cuts(d, BL1)


def test_case3_contraction_in_l1bang():
    d = compose_cut(proof("!q, !(q\\p) => !p", L1BANG), proof("!p => p*p", L1BANG), (0,))
    out, log = eliminated(d, L1BANG)
    assert log[0].case == "3"
    assert out.count(RuleId.Contr) == 2


def test_nested_cuts():
    inner = compose_cut(proof("p, p\\q => q"), proof("q, q\\r => r"), (0,))
    outer = compose_cut(inner, proof("r, r\\s => s"), (0,))
    check_derivation(outer, BL1, allow_cut=True)
    out, _ = eliminated(outer)
    assert str(out.conclusion) == "p, p\\q, q\\r, r\\s => s"


def test_malformed_input():
    d = proof("p, p\\q => q")
    bad = Derivation(parse_sequent("p => q"), d.rule, d.premises)
    with pytest.raises(MalformedInput):
        eliminate_cuts(bad, BL1)
    with pytest.raises(ValueError):
        eliminate_cuts(d, L1Theory([]))


@pytest.mark.parametrize("seed", range(3))
def test_random_cuts(seed):
    for d in cut_derivations(seed, 40, 8):
        eliminated(d)


def test_random_case3():
    for d in case3_derivations(9, 20):
        _, log = eliminated(d)
        assert any(s.case == "3" for s in log)
