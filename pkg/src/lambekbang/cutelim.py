"""The cut rule on explicit derivations and the cut-elimination procedure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .kernel import (
    Derivation,
    DerivationError,
    RuleId,
    RuleInstance,
    System,
    check_derivation,
    contract_block,
    find_instance,
    get_node,
    instantiate_backward,
    normalize_perms,
    replace_node,
    splice,
    with_perm,
)
from .syntax import Atom, Bang, Bracket, Formula, Sequent, formula_size, render

_RIGHT_RULES = {
    RuleId.UnderR, RuleId.OverR, RuleId.ProdR, RuleId.DiamondR,
    RuleId.BoxInvR, RuleId.BangR, RuleId.AxUnit,
}
_PRINCIPAL_LEFT = {
    RuleId.UnderL, RuleId.OverL, RuleId.ProdL, RuleId.UnitL, RuleId.DiamondL, RuleId.BangL,
}


class MalformedInput(ValueError):
    pass


class CutEliminationError(RuntimeError):
    """Raised when a reduction step has no counterpart in the target calculus."""


@dataclass(frozen=True)
class CutMeasure:
    kappa: int
    sigma: int

    def __lt__(self, other: "CutMeasure") -> bool:
        return (self.kappa, self.sigma) < (other.kappa, other.sigma)


@dataclass(frozen=True)
class CutStep:
    """One call of the single-cut reduction.

    ``parent`` is the measure of the reduction that created this cut and
    ``parent_case`` the case it was in (None for cuts of the input).
    """

    measure: CutMeasure
    case: str
    parent: Optional[CutMeasure]
    parent_case: Optional[str]

    def decreases(self) -> bool:
        if self.parent is None:
            return True
        if self.parent_case == "3":
            return self.measure.kappa < self.parent.kappa
        return self.measure < self.parent


def compose_cut(left: Derivation, right: Derivation, at: tuple, sys: Optional[System] = None) -> Derivation:
    """Cut ``left`` (Pi => A) into ``right`` at antecedent position ``at``.

    ``at`` is a bracket path followed by the item index of A.
    """
    node, index = tuple(at[:-1]), at[-1]
    a = left.conclusion.succedent
    items = get_node(right.conclusion.antecedent, node)
    if not 0 <= index < len(items) or items[index] != a:
        raise ValueError(f"no occurrence of {render(a)} at {at} in {render(right.conclusion)}")
    pi = left.conclusion.antecedent
    concl = Sequent(splice(right.conclusion.antecedent, node, index, index + 1, pi),
                    right.conclusion.succedent)
    inst = RuleInstance(RuleId.Cut, node=node, index=index, splits=(index + len(pi),), formula=a)
    return Derivation(concl, inst, (left, right))


# ------------------------------------------------------------------ helpers

_fresh = itertools.count()


def _marker(bang: bool) -> Formula:
    m = Atom(f"#{next(_fresh)}")
    return Bang(m) if bang else m


def _subst(config: tuple, m: Formula, block: tuple) -> tuple:
    out = []
    for it in config:
        if it == m:
            out.extend(block)
        elif isinstance(it, Bracket):
            out.append(Bracket(_subst(it.items, m, block)))
        else:
            out.append(it)
    return tuple(out)


def _subst_seq(s: Sequent, m: Formula, block: tuple) -> Sequent:
    return Sequent(_subst(s.antecedent, m, block), s.succedent)


def _map_pos(config: tuple, node: tuple, index: int, m: Formula, block: tuple):
    """Position of an item after substituting ``block`` for every ``m``."""
    grow = len(block) - 1
    new_node = []
    items = config
    for k in node:
        new_node.append(k + grow * items[:k].count(m))
        items = items[k].items
    return tuple(new_node), index + grow * items[:index].count(m)


def _find(config: tuple, m: Formula, prefix=()):
    for k, it in enumerate(config):
        if it == m:
            return prefix, k
        if isinstance(it, Bracket):
            got = _find(it.items, m, prefix + (k,))
            if got is not None:
                return got
    return None


def _contains(config: tuple, m: Formula) -> bool:
    return _find(config, m) is not None


def _put(config: tuple, node: tuple, index: int, item) -> tuple:
    items = get_node(config, node)
    return replace_node(config, node, items[:index] + (item,) + items[index + 1:])


def _rebuild(concl: Sequent, rule: RuleId, premises, sys: System) -> Derivation:
    premises = tuple(premises)
    if rule is RuleId.PermStar:
        return with_perm(concl, premises[0])
    inst = find_instance(concl, rule, [p.conclusion for p in premises], sys)
    if inst is None:
        raise CutEliminationError(
            f"cannot re-apply {rule.name} to obtain {render(concl)} from "
            f"{[render(p.conclusion) for p in premises]}"
        )
    return Derivation(concl, inst, premises)


# -------------------------------------------------------------------- trace

@dataclass
class Trace:
    """Upward trace of one antecedent !-occurrence.

    ``derivation`` is the input with traced axiom leaves !A => !A expanded
    into BangR over BangL over A => A; ``branches`` lists the tree paths of
    each maximal branch and ``ends`` the rule closing it (BangL or Weak).
    """

    derivation: Derivation
    branches: list = field(default_factory=list)
    ends: list = field(default_factory=list)


def _expand_axiom(d: Derivation) -> Derivation:
    bang = d.conclusion.succedent
    a = bang.body
    inner = Derivation(Sequent((a,), a), RuleInstance(RuleId.AxId), ())
    mid = Derivation(Sequent((bang,), a), RuleInstance(RuleId.BangL, index=0), (inner,))
    return Derivation(d.conclusion, RuleInstance(RuleId.BangR), (mid,))


def trace_bang(d: Derivation, at: tuple, sys: System) -> Trace:
    node, index = tuple(at[:-1]), at[-1]
    f = get_node(d.conclusion.antecedent, node)[index]
    if not isinstance(f, Bang):
        raise ValueError(f"{at} does not designate a !-formula")
    m = _marker(True)
    marked = Sequent(_put(d.conclusion.antecedent, node, index, m), d.conclusion.succedent)
    trace = Trace(d)
    trace.derivation = _trace(d, marked, m, f, (), [], trace, sys)
    return trace


def _trace(d, marked, m, f, path, branch, trace, sys):
    if not _contains(marked.antecedent, m):
        return d
    r = d.rule.rule
    branch = branch + [path]
    if r is RuleId.AxId:
        d = _expand_axiom(d)
        r = RuleId.BangR
    if r in (RuleId.BangL, RuleId.Weak):
        pos = (d.rule.node, d.rule.index)
        if _find_at(marked, pos) == m:
            trace.branches.append(branch)
            trace.ends.append(r.name)
            if r is RuleId.Weak:
                return d
            prem_marked = Sequent(_put(marked.antecedent, *pos, f.body), marked.succedent)
            sub = _trace(d.premises[0], prem_marked, m, f, path + (0,), branch, trace, sys)
            return Derivation(d.conclusion, d.rule, (sub,))
    prems = _marked_premises(d, marked, m, f, sys)
    subs = tuple(
        _trace(p, pm, m, f, path + (k,), branch, trace, sys)
        for k, (p, pm) in enumerate(zip(d.premises, prems))
    )
    return Derivation(d.conclusion, d.rule, subs)


def _find_at(s: Sequent, pos):
    node, index = pos
    return get_node(s.antecedent, node)[index]


def _marked_premises(d: Derivation, marked: Sequent, m, original, sys):
    inst = d.rule
    if inst.rule is RuleId.Weak and inst.formula is not None:
        inst = RuleInstance(inst.rule, node=inst.node, index=inst.index)
    return instantiate_backward(marked, inst, sys)


# ---------------------------------------------------------------- reduction

class _Eliminator:
    def __init__(self, sys: System, log: Optional[list]):
        self.sys = sys
        self.log = log if log is not None else []

    def reduce(self, left: Derivation, right: Derivation, node: tuple, index: int,
               parent: Optional[CutStep] = None) -> Derivation:
        a = left.conclusion.succedent
        measure = CutMeasure(formula_size(a), left.size + right.size)
        case = self._classify(left, right, node, index)
        step = CutStep(measure, case, parent.measure if parent else None,
                       parent.case if parent else None)
        self.log.append(step)
        handler = getattr(self, "_case_" + case.replace(".", "_"))
        return handler(left, right, node, index, step)

    def _classify(self, left, right, node, index) -> str:
        lr, rr = left.rule.rule, right.rule.rule
        if lr is RuleId.AxId or rr is RuleId.AxId:
            return "1"
        if lr not in _RIGHT_RULES:
            return "2"
        rinst = right.rule
        if rr in _PRINCIPAL_LEFT and rinst.node == node and rinst.index == index:
            return "4"
        if rr is RuleId.BoxInvL and node == rinst.node + (rinst.index,) and index == 0:
            return "4"
        if lr is RuleId.BangR:
            if rr in (RuleId.Contr, RuleId.Weak) and rinst.node == node and rinst.index == index:
                return "3"
            if rr is RuleId.ContrB and rinst.node == node and rinst.index <= index < rinst.splits[0]:
                return "3"
        return "5"

    def _cut_concl(self, left, right, node, index) -> Sequent:
        pi = left.conclusion.antecedent
        return Sequent(splice(right.conclusion.antecedent, node, index, index + 1, pi),
                       right.conclusion.succedent)

    # Case 1: one premise is an identity axiom.
    def _case_1(self, left, right, node, index, step):
        if left.rule.rule is RuleId.AxId:
            return right
        return left

    # Case 2: the cut formula is not principal on the left.
    def _case_2(self, left, right, node, index, step):
        main = 1 if left.rule.rule in (RuleId.OverL, RuleId.UnderL) else 0
        prems = list(left.premises)
        prems[main] = self.reduce(prems[main], right, node, index, step)
        return _rebuild(self._cut_concl(left, right, node, index), left.rule.rule, prems, self.sys)

    # Case 4: principal on both sides.
    def _case_4(self, left, right, node, index, step):
        r = right.rule.rule
        l1 = left.premises[0] if left.premises else None
        if r is RuleId.UnitL:
            return right.premises[0]
        if r is RuleId.UnderL:
            r1, r2 = right.premises
            x = self.reduce(r1, l1, (), 0, step)
            return self.reduce(x, r2, node, right.rule.splits[0], step)
        if r is RuleId.OverL:
            r1, r2 = right.premises
            x = self.reduce(r1, l1, (), len(left.conclusion.antecedent), step)
            return self.reduce(x, r2, node, index, step)
        if r is RuleId.ProdL:
            l1, l2 = left.premises
            x = self.reduce(l1, right.premises[0], node, index, step)
            return self.reduce(l2, x, node, index + len(l1.conclusion.antecedent), step)
        if r is RuleId.DiamondL:
            return self.reduce(l1, right.premises[0], node + (index,), 0, step)
        if r is RuleId.BoxInvL:
            return self.reduce(l1, right.premises[0], right.rule.node, right.rule.index, step)
        if r is RuleId.BangL:
            return self.reduce(l1, right.premises[0], node, index, step)
        raise CutEliminationError(f"unexpected principal pair {left.rule.rule.name}/{r.name}")

    # Case 5: the cut formula is not principal on the right.
    def _case_5(self, left, right, node, index, step):
        a = left.conclusion.succedent
        m = _marker(isinstance(a, Bang))
        marked = Sequent(_put(right.conclusion.antecedent, node, index, m),
                         right.conclusion.succedent)
        prem_marked = _marked_premises(right, marked, m, a, self.sys)
        new = []
        for p, pm in zip(right.premises, prem_marked):
            pos = _find(pm.antecedent, m)
            new.append(p if pos is None else self.reduce(left, p, pos[0], pos[1], step))
        return _rebuild(self._cut_concl(left, right, node, index), right.rule.rule, new, self.sys)

    # Case 3: BangR on the left against contraction or weakening of the
    # traced occurrence on the right.
    def _case_3(self, left, right, node, index, step):
        block = left.conclusion.antecedent
        l1 = left.premises[0]
        m = _marker(True)
        marked = Sequent(_put(right.conclusion.antecedent, node, index, m),
                         right.conclusion.succedent)
        return self._deep(right, marked, m, left.conclusion.succedent, block, l1, step)

    def _deep(self, d, marked, m, bang, block, l1, step):
        if not _contains(marked.antecedent, m):
            return d
        target = _subst_seq(marked, m, block)
        inst = d.rule
        r = inst.rule
        if r is RuleId.AxId:
            d = _expand_axiom(d)
            inst, r = d.rule, RuleId.BangR
        if r in (RuleId.BangL, RuleId.Weak, RuleId.Contr) and _find_at(marked, (inst.node, inst.index)) == m:
            pos = (inst.node, inst.index)
            items = get_node(marked.antecedent, inst.node)
            if r is RuleId.BangL:
                pm = Sequent(_put(marked.antecedent, *pos, bang.body), marked.succedent)
                sub = self._deep(d.premises[0], pm, m, bang, block, l1, step)
                at = _map_pos(pm.antecedent, inst.node, inst.index, m, block)
                return self.reduce(l1, sub, at[0], at[1], step)
            node, i = _map_pos(marked.antecedent, inst.node, inst.index, m, block)
            if r is RuleId.Weak:
                pm = Sequent(replace_node(marked.antecedent, inst.node, items[:inst.index] + items[inst.index + 1:]),
                             marked.succedent)
                out = self._deep(d.premises[0], pm, m, bang, block, l1, step)
                for k in range(len(block) - 1, -1, -1):
                    concl = Sequent(splice(out.conclusion.antecedent, node, i, i, block[k:k + 1]),
                                    out.conclusion.succedent)
                    out = Derivation(concl, RuleInstance(RuleId.Weak, node=node, index=i,
                                                         formula=block[k]), (out,))
                return out
            pm = Sequent(replace_node(marked.antecedent, inst.node,
                                      items[:inst.index] + (m, m) + items[inst.index + 1:]),
                         marked.succedent)
            top = self._deep(d.premises[0], pm, m, bang, block, l1, step)
            return contract_block(target, top, node, i, block)
        prems = _marked_premises(d, marked, m, bang, self.sys)
        subs = [self._deep(p, pm, m, bang, block, l1, step) for p, pm in zip(d.premises, prems)]
        if r is RuleId.ContrB and not block:
            n_end = inst.splits[0]
            blk = get_node(marked.antecedent, inst.node)[inst.index:n_end]
            if all(x == m for x in blk):
                raise CutEliminationError(
                    "contraction block becomes empty after substituting an empty !-context; "
                    "ContrB requires a nonempty block"
                )
        return _rebuild(target, r, subs, self.sys)

    # -------------------------------------------------------------- driver
    def eliminate(self, d: Derivation) -> Derivation:
        prems = tuple(self.eliminate(p) for p in d.premises)
        if d.rule.rule is RuleId.Cut:
            left, right = prems
            return self.reduce(left, right, d.rule.node, d.rule.index)
        if prems == d.premises:
            return d
        return Derivation(d.conclusion, d.rule, prems)


def eliminate_cuts(d: Derivation, sys: System, log: Optional[list] = None) -> Derivation:
    """Cut-free derivation of the same sequent.

    Each single-cut reduction appends a CutStep to ``log`` when given.
    """
    if sys.variant == "L1Theory":
        raise ValueError("cut elimination does not hold in L1Theory")
    try:
        check_derivation(d, sys, allow_cut=True)
    except DerivationError as e:
        raise MalformedInput(str(e)) from None
    out = normalize_perms(_Eliminator(sys, log).eliminate(d))
    return out
