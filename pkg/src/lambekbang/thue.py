"""Generative grammars, their encoding into sequents, and derivation builders."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .kernel import (
    L1BANG,
    L1BANGW,
    BL1,
    Derivation,
    RuleId,
    RuleInstance,
    System,
    L1Theory,
    contract_block,
    find_instance,
    normalize_perms,
    with_perm,
)
from .syntax import (
    UNIT,
    Atom,
    Bang,
    BoxInv,
    Bracket,
    Formula,
    Over,
    Sequent,
    bfp,
    leaf_count,
    prod_of,
    render,
)


# ----------------------------------------------------------------- grammars

@dataclass(frozen=True)
class Grammar:
    start: str
    terminals: tuple
    nonterminals: tuple
    productions: tuple

    def __post_init__(self):
        if set(self.terminals) & set(self.nonterminals):
            raise ValueError("terminals and nonterminals overlap")
        if self.start not in self.nonterminals:
            raise ValueError(f"start symbol {self.start!r} is not a nonterminal")
        symbols = set(self.terminals) | set(self.nonterminals)
        for lhs, rhs in self.productions:
            if not lhs or not rhs:
                raise ValueError("both sides of a production must be nonempty")
            unknown = (set(lhs) | set(rhs)) - symbols
            if unknown:
                raise ValueError(f"unknown symbols {sorted(unknown)}")

    @classmethod
    def make(cls, start, terminals, nonterminals, productions) -> "Grammar":
        prods = tuple((tuple(l), tuple(r)) for l, r in productions)
        return cls(start, tuple(terminals), tuple(nonterminals), prods)

    @property
    def non_contracting(self) -> bool:
        return all(len(r) >= len(l) for l, r in self.productions)


def parse_grammar(text: str) -> Grammar:
    start, terms, nonterms, prods = None, [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            lhs, rhs = line.split("->", 1)
            prods.append((lhs.split(), rhs.split()))
            continue
        key, sep, val = line.partition(":")
        key = key.strip()
        if not sep or key not in ("start", "terminals", "nonterminals"):
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        if key == "start":
            start = val.strip()
        elif key == "terminals":
            terms = val.split()
        else:
            nonterms = val.split()
    if start is None:
        raise ValueError("missing 'start:' line")
    return Grammar.make(start, terms, nonterms, prods)


def load_grammar(path) -> Grammar:
    return parse_grammar(Path(path).read_text())


def render_grammar(g: Grammar) -> str:
    lines = [f"start: {g.start}", "terminals: " + " ".join(g.terminals),
             "nonterminals: " + " ".join(g.nonterminals)]
    lines += [" ".join(l) + " -> " + " ".join(r) for l, r in g.productions]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- rewriting

@dataclass(frozen=True)
class RewriteTrace:
    """A rewriting sequence: apply production ``i`` at ``position`` per step."""

    start: tuple
    steps: tuple = ()

    def replay(self, g: Grammar) -> list:
        words = [tuple(self.start)]
        for i, pos in self.steps:
            w = words[-1]
            lhs, rhs = g.productions[i]
            if w[pos:pos + len(lhs)] != lhs:
                raise ValueError(f"production {i} does not match {' '.join(w)} at {pos}")
            words.append(w[:pos] + rhs + w[pos + len(lhs):])
        return words

    def result(self, g: Grammar) -> tuple:
        return self.replay(g)[-1]

    def concat(self, other: "RewriteTrace", g: Grammar) -> "RewriteTrace":
        """From a1 =>* b1 and a2 =>* b2, a trace of a1 a2 =>* b1 b2."""
        shift = len(self.result(g))
        # other's steps run once self is done, on the word b1 a2.
        steps = self.steps + tuple((i, p + shift) for i, p in other.steps)
        return RewriteTrace(self.start + other.start, steps)

    def cut_into(self, outer: "RewriteTrace", offset: int, g: Grammar) -> "RewriteTrace":
        """From a =>* b (self) and c =>* eta a theta (outer), c =>* eta b theta."""
        mid = outer.result(g)
        if mid[offset:offset + len(self.start)] != tuple(self.start):
            raise ValueError("start word does not occur at the given offset")
        return RewriteTrace(outer.start, outer.steps + tuple((i, p + offset) for i, p in self.steps))


class Answer(enum.Enum):
    YES = "Yes"
    NO = "No"
    EXHAUSTED = "Exhausted"


@dataclass(frozen=True)
class DerivesResult:
    answer: Answer
    trace: Optional[RewriteTrace] = None
    max_len: int = 0
    explored: int = 0

    def __str__(self):
        if self.answer is Answer.YES:
            return f"Yes ({len(self.trace.steps)} steps)"
        return f"{self.answer.value} (length cap {self.max_len}, {self.explored} words)"


def successors(g: Grammar, w: tuple):
    for pos in range(len(w)):
        for i, (lhs, rhs) in enumerate(g.productions):
            if w[pos:pos + len(lhs)] == lhs:
                yield i, pos, w[:pos] + rhs + w[pos + len(lhs):]


def derives(g: Grammar, target, max_len: Optional[int] = None, max_steps: int = 100000) -> DerivesResult:
    """Breadth-first search for ``start =>* target``."""
    target = tuple(target)
    unknown = set(target) - set(g.terminals) - set(g.nonterminals)
    if unknown:
        raise ValueError(f"unknown symbols {sorted(unknown)}")
    if max_len is None:
        max_len = max(len(target), 1)
    root = (g.start,)
    parent = {root: None}
    queue = deque([root])
    explored = 0
    while queue:
        w = queue.popleft()
        if w == target:
            steps = []
            while parent[w] is not None:
                prev, i, pos = parent[w]
                steps.append((i, pos))
                w = prev
            return DerivesResult(Answer.YES, RewriteTrace(root, tuple(reversed(steps))), max_len, explored)
        explored += 1
        if explored > max_steps:
            return DerivesResult(Answer.EXHAUSTED, max_len=max_len, explored=explored)
        for i, pos, nxt in successors(g, w):
            if len(nxt) <= max_len and nxt not in parent:
                parent[nxt] = (w, i, pos)
                queue.append(nxt)
    if g.non_contracting and max_len >= len(target):
        return DerivesResult(Answer.NO, max_len=max_len, explored=explored)
    return DerivesResult(Answer.EXHAUSTED, max_len=max_len, explored=explored)


# ----------------------------------------------------------------- encoding

@dataclass(frozen=True)
class EncodingBundle:
    B_list: tuple
    Gamma: tuple
    Phi: tuple
    GammaTilde: tuple
    PhiTilde: tuple
    theory: tuple

    def render(self) -> str:
        def line(name, xs):
            return f"{name}: " + ", ".join(render(x) for x in xs)
        return "\n".join([
            line("B", self.B_list), line("Gamma", self.Gamma), line("Phi", self.Phi),
            line("GammaTilde", self.GammaTilde), line("PhiTilde", self.PhiTilde),
            *("theory: " + render(t) for t in self.theory),
        ])


def _atoms(word) -> tuple:
    return tuple(Atom(x) for x in word)


def encode(g: Grammar) -> EncodingBundle:
    bs = tuple(Over(prod_of(_atoms(l)), prod_of(_atoms(r))) for l, r in g.productions)
    return EncodingBundle(
        B_list=bs,
        Gamma=tuple(Bang(b) for b in bs),
        Phi=tuple(Bang(Over(UNIT, Bang(b))) for b in bs),
        GammaTilde=tuple(Bang(BoxInv(b)) for b in bs),
        PhiTilde=tuple(Bang(Over(UNIT, Bang(BoxInv(b)))) for b in bs),
        theory=tuple(Sequent(_atoms(r), prod_of(_atoms(l))) for l, r in g.productions),
    )


class Variant(enum.Enum):
    BRACKETED = "bracketed"
    PLAIN = "plain"
    WEAK = "weak"
    THEORY = "theory"


def goal_sequent(g: Grammar, w, variant: Variant) -> tuple:
    w = tuple(w)
    unknown = set(w) - set(g.terminals) - set(g.nonterminals)
    if unknown:
        raise ValueError(f"unknown symbols {sorted(unknown)}")
    e = encode(g)
    word = _atoms(w)
    s = Atom(g.start)
    if variant is Variant.BRACKETED:
        return Sequent(e.PhiTilde + e.GammaTilde + word, s), BL1
    if variant is Variant.PLAIN:
        return Sequent(e.Phi + e.Gamma + word, s), L1BANG
    if variant is Variant.WEAK:
        return Sequent(e.Gamma + word, s), L1BANGW
    return Sequent(word, s), L1Theory(e.theory)


# --------------------------------------------------------- derivation steps

def _node(concl, rule, *prems, **params) -> Derivation:
    return Derivation(concl, RuleInstance(rule, **params), tuple(prems))


def inst_macro(d: Derivation, bang_index: int, a_index: int) -> Derivation:
    """Remove the top-level item at ``a_index`` using ``![]-1 A`` at ``bang_index``.

    ``d`` concludes Delta1, ![]-1 A, Delta2, A, Delta3 => C with the two
    designated items at top level and ``bang_index < a_index``.
    """
    ante, succ = d.conclusion.antecedent, d.conclusion.succedent
    if not bang_index < a_index < len(ante):
        raise ValueError("need bang_index < a_index within the antecedent")
    bang = ante[bang_index]
    a = ante[a_index]
    if not (isinstance(bang, Bang) and isinstance(bang.body, BoxInv) and bang.body.body == a):
        raise ValueError(f"item {bang_index} is not ![]-1 of item {a_index}")
    d1, d2, d3 = ante[:bang_index], ante[bang_index + 1:a_index], ante[a_index + 1:]
    # Read top-down: BoxInvL, BangL inside the bracket, PermStar, ContrB, PermStar.
    s_boxed = Sequent(d1 + (bang,) + d2 + (Bracket((bang.body,)),) + d3, succ)
    top = _node(s_boxed, RuleId.BoxInvL, d, index=a_index)
    s_banged = Sequent(d1 + (bang,) + d2 + (Bracket((bang,)),) + d3, succ)
    top = _node(s_banged, RuleId.BangL, top, node=(a_index,), index=0)
    s_moved = Sequent(d1 + d2 + (bang, Bracket((bang,))) + d3, succ)
    top = with_perm(s_moved, top)
    pos = len(d1) + len(d2)
    s_contr = Sequent(d1 + d2 + (bang,) + d3, succ)
    top = _node(s_contr, RuleId.ContrB, top, index=pos, splits=(pos + 1, pos + 1))
    return with_perm(Sequent(d1 + (bang,) + d2 + d3, succ), top)


def _prod_right(word) -> Derivation:
    """v1, ..., vm => v1*(...*vm) by ProdR over identity axioms."""
    atoms = _atoms(word)
    if len(atoms) == 1:
        return _node(Sequent(atoms, atoms[0]), RuleId.AxId)
    head = _node(Sequent(atoms[:1], atoms[0]), RuleId.AxId)
    tail = _prod_right(word[1:])
    return _node(Sequent(atoms, prod_of(atoms)), RuleId.ProdR, head, tail, splits=(1,))


def _prod_left(d: Derivation, index: int, k: int) -> Derivation:
    """Fold items index..index+k-1 of ``d``'s antecedent into a right-nested product."""
    ante, succ = d.conclusion.antecedent, d.conclusion.succedent
    for j in range(k - 2, -1, -1):
        merged = prod_of(ante[index + j:index + k])
        ante = ante[:index + j] + (merged,) + ante[index + k:]
        k = j + 1
        d = _node(Sequent(ante, succ), RuleId.ProdL, d, index=index + j)
    return d


def base_derivation(g: Grammar) -> Derivation:
    """PhiTilde, GammaTilde, s => s."""
    e = encode(g)
    s = Atom(g.start)
    n = len(e.B_list)
    top = _node(Sequent((s,), s), RuleId.AxId)
    for k in range(1, n + 1):
        top = _node(Sequent((UNIT,) * k + (s,), s), RuleId.UnitL, top, index=0)
    pairs = [(f.body, gt) for f, gt in zip(e.PhiTilde, e.GammaTilde)]
    for j in range(n - 1, -1, -1):
        items = (UNIT,) * j + tuple(x for p in pairs[j:] for x in p) + (s,)
        ax = _node(Sequent((pairs[j][1],), pairs[j][1]), RuleId.AxId)
        top = _node(Sequent(items, s), RuleId.OverL, ax, top, index=j, splits=(j + 2,))
    for j in range(n - 1, -1, -1):
        items = tuple(x for i, (over, gt) in enumerate(pairs)
                      for x in ((over if i < j else e.PhiTilde[i]), gt)) + (s,)
        top = _node(Sequent(items, s), RuleId.BangL, top, index=2 * j)
    return with_perm(Sequent(e.PhiTilde + e.GammaTilde + (s,), s), top)


def build_bracketed_derivation(g: Grammar, t: RewriteTrace) -> Derivation:
    """BL1 derivation of PhiTilde, GammaTilde, w => s for the word w reached by ``t``."""
    words = t.replay(g)
    if words[0] != (g.start,):
        raise ValueError("trace must start from the start symbol")
    e = encode(g)
    ctx = e.PhiTilde + e.GammaTilde
    s = Atom(g.start)
    d = base_derivation(g)
    for (i, pos), w in zip(t.steps, words[1:]):
        lhs, rhs = g.productions[i]
        eta = w[:pos]
        theta = w[pos + len(rhs):]
        b = e.B_list[i]
        at = len(ctx) + pos
        # d concludes ctx, eta, u1..uk, theta => s
        folded = _prod_left(d, at, len(lhs))
        over_concl = Sequent(ctx + _atoms(eta) + (b,) + _atoms(rhs) + _atoms(theta), s)
        over = _node(over_concl, RuleId.OverL, _prod_right(rhs), folded,
                     index=at, splits=(at + 1 + len(rhs),))
        d = inst_macro(over, len(e.PhiTilde) + i, at)
    return d


def translate_bfp_derivation(d: Derivation) -> Derivation:
    """L1Bang derivation of the bracket-forgetting image of ``d``'s conclusion."""
    return normalize_perms(_bfp(d))


def _flat_index(config: tuple, node: tuple, index: int) -> int:
    n = 0
    items = config
    for k in node:
        n += leaf_count(items[:k])
        items = items[k].items
    return n + leaf_count(items[:index])


def _bfp(d: Derivation) -> Derivation:
    r = d.rule.rule
    prems = [_bfp(p) for p in d.premises]
    concl = bfp(d.conclusion)
    if r in (RuleId.DiamondL, RuleId.DiamondR, RuleId.BoxInvL, RuleId.BoxInvR):
        return prems[0]
    if r is RuleId.PermStar:
        return with_perm(concl, prems[0])
    if r is RuleId.ContrB:
        inst = d.rule
        start = _flat_index(d.conclusion.antecedent, inst.node, inst.index)
        block = concl.antecedent[start:start + inst.splits[0] - inst.index]
        return contract_block(concl, prems[0], (), start, block)
    inst = find_instance(concl, r, [p.conclusion for p in prems], L1BANG)
    if inst is None:
        raise ValueError(f"no L1Bang counterpart for {r.name} at {render(concl)}")
    return Derivation(concl, inst, tuple(prems))


def weak_aux(b: Formula) -> Derivation:
    """=> !(1/!B) by AxUnit, Weak, OverR, BangR."""
    bang_b = Bang(b)
    ax = _node(Sequent((), UNIT), RuleId.AxUnit)
    weak = _node(Sequent((bang_b,), UNIT), RuleId.Weak, ax, index=0, formula=bang_b)
    over = _node(Sequent((), Over(UNIT, bang_b)), RuleId.OverR, weak)
    return _node(Sequent((), Bang(Over(UNIT, bang_b))), RuleId.BangR, over)


def translate_to_weak(d: Derivation, g: Grammar) -> Derivation:
    """Gamma, w => s in L1BangW from an L1Bang derivation of Phi, Gamma, w => s."""
    e = encode(g)
    ante = d.conclusion.antecedent
    n = len(e.Phi)
    if ante[:n] != e.Phi:
        raise ValueError("antecedent does not start with Phi")
    out = d
    for b in e.B_list:
        aux = weak_aux(b)
        rest = out.conclusion.antecedent[1:]
        concl = Sequent(rest, out.conclusion.succedent)
        out = _node(concl, RuleId.Cut, aux, out, index=0, splits=(0,), formula=aux.conclusion.succedent)
    return out
