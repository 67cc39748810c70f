"""Backward proof search, the BNNC decision procedure and a small oracle."""

from __future__ import annotations

import enum
import functools
import sys as _sys
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .kernel import (
    BL1,
    Derivation,
    RuleId,
    RuleInstance,
    System,
    applicable_instances,
    available,
    get_node,
    instantiate_backward,
    node_paths,
    perm_key,
    replace_node,
    with_perm,
)
from .syntax import (
    Atom,
    Bang,
    BoxInv,
    Bracket,
    Diamond,
    Over,
    Polarity,
    Prod,
    Sequent,
    Under,
    Unit,
    bracket_count,
    check_bnnc,
    config_formulas,
    leaf_count,
    polarity_occurrences,
    render_formula,
    sequent_size,
    subformulas,
)
from .syntax import _child_polarities

_sys.setrecursionlimit(max(_sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Budget:
    """Search limits.  ``complete`` marks the budget as known to be sufficient."""

    max_rule_apps: int
    max_antecedent_items: int
    time_limit: float = 60.0
    complete: bool = False

    @classmethod
    def for_sequent(cls, s: Sequent, **overrides) -> "Budget":
        n = sequent_size(s)
        base = cls(quadratic_bound(n), max(4 * n, 1))
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})


def quadratic_bound(n: int) -> int:
    return 2 * (n + 1) ** 2 + 2


class Status(enum.Enum):
    DERIVABLE = "Derivable"
    NOT_DERIVABLE = "NotDerivable"
    EXHAUSTED = "Exhausted"


@dataclass(frozen=True)
class ProveResult:
    status: Status
    derivation: Optional[Derivation] = field(default=None, repr=False)
    reason: str = ""

    @property
    def derivable(self) -> bool:
        return self.status is Status.DERIVABLE

    def __str__(self):
        return self.status.value + (f" ({self.reason})" if self.reason else "")


class BudgetExceeded(Exception):
    pass


# ------------------------------------------------------------------ pruning

@functools.lru_cache(maxsize=None)
def exposes_boxinv(f) -> bool:
    """Whether left rules applied to ``f`` can surface a []-1 formula."""
    if isinstance(f, BoxInv):
        return True
    if isinstance(f, Over):
        return exposes_boxinv(f.left)
    if isinstance(f, Under):
        return exposes_boxinv(f.right)
    if isinstance(f, Prod):
        return exposes_boxinv(f.left) or exposes_boxinv(f.right)
    if isinstance(f, (Bang, Diamond)):
        return exposes_boxinv(f.body)
    return False


def _all_brackets(config):
    for it in config:
        if isinstance(it, Bracket):
            yield it
            yield from _all_brackets(it.items)


def brackets_removable(s: Sequent) -> bool:
    """Necessary condition for derivability in presence of brackets.

    Reading bottom-up, nothing enters an existing bracket from outside, so
    unless a <> can remove it via DiamondR, the bracket must end up holding
    a single []-1 formula obtained from one of its own top-level formulae
    by left rules.
    """
    if not bracket_count(s.antecedent):
        return True
    if any(_has_diamond(f) for f in config_formulas(s.antecedent)) or _has_diamond(
        s.succedent
    ):
        return True
    return all(
        any(not isinstance(x, Bracket) and exposes_boxinv(x) for x in b.items)
        for b in _all_brackets(s.antecedent)
    )


@functools.lru_cache(maxsize=None)
def _has_diamond(f: Formula) -> bool:
    return isinstance(f, Diamond) or any(_has_diamond(c) for c in f.children())


@functools.lru_cache(maxsize=None)
def _atom_counts(f: Formula, pol: Polarity, copied: bool) -> tuple:
    """Sorted (atom, (Ln, Lp, Cn, Cp)) counts.

    L counts occurrences used exactly once, C those under a negative !,
    which contraction may reuse; n/p split by polarity in the sequent.
    """
    if isinstance(f, Atom):
        slot = (2 if copied else 0) + (pol is Polarity.POSITIVE)
        v = [0, 0, 0, 0]
        v[slot] = 1
        return ((f.name, tuple(v)),)
    copied = copied or (isinstance(f, Bang) and pol is Polarity.NEGATIVE)
    acc = {}
    for c, cp in _child_polarities(f, pol):
        for name, v in _atom_counts(c, cp, copied):
            old = acc.get(name, (0, 0, 0, 0))
            acc[name] = tuple(x + y for x, y in zip(old, v))
    return tuple(sorted(acc.items()))


def atoms_balanced(s: Sequent, weakening: bool = False) -> bool:
    """Necessary atom-count condition for cut-free derivability.

    Every axiom pairs a negative occurrence of an atom with a positive one.
    Occurrences outside negative !-formulae are used exactly once; those
    inside are used at least once (any number of times with weakening).
    """
    acc = {}
    parts = [(f, Polarity.NEGATIVE) for f in config_formulas(s.antecedent)]
    parts.append((s.succedent, Polarity.POSITIVE))
    for f, pol in parts:
        for name, v in _atom_counts(f, pol, False):
            old = acc.get(name, (0, 0, 0, 0))
            acc[name] = tuple(x + y for x, y in zip(old, v))
    for ln, lp, cn, cp in acc.values():
        if cn and cp:
            continue
        if weakening:
            if not cn and not cp and ln != lp:
                return False
            if cp and not cn and ln < lp:
                return False
            if cn and not cp and lp < ln:
                return False
        else:
            if ln + cn > lp + cp and not cp:
                return False
            if lp + cp > ln + cn and not cn:
                return False
    return True


@functools.lru_cache(maxsize=None)
def _destroyers(f: Formula, pol: Polarity, copied: bool) -> Optional[int]:
    n = 0
    if (isinstance(f, BoxInv) and pol is Polarity.NEGATIVE) or (
        isinstance(f, Diamond) and pol is Polarity.POSITIVE
    ):
        if copied:
            return None
        n = 1
    copied = copied or (isinstance(f, Bang) and pol is Polarity.NEGATIVE)
    for c, cp in _child_polarities(f, pol):
        m = _destroyers(c, cp, copied)
        if m is None:
            return None
        n += m
    return n


def destroyer_budget(s: Sequent) -> Optional[int]:
    """Count of negative []-1 and positive <> occurrences, or None.

    None means some such occurrence sits under a negative !, where
    contraction can copy it, so no count bound applies.  Otherwise each
    bracket consumes a distinct occurrence and the count bounds the number
    of brackets.
    """
    parts = [(f, Polarity.NEGATIVE) for f in config_formulas(s.antecedent)]
    parts.append((s.succedent, Polarity.POSITIVE))
    count = 0
    for f, pol in parts:
        n = _destroyers(f, pol, False)
        if n is None:
            return None
        count += n
    return count


def lower_bound(s: Sequent, sys: System) -> int:
    """Admissible lower bound on the rule applications needed for ``s``.

    Without theory axioms or weakening-free shortcuts, each antecedent
    formula occurrence is closed by its own AxId or UnitL at the end of its
    chain of descendants, and each bracket needs its own BoxInvL or
    DiamondR, so neither is shared.
    """
    if sys.variant == "L1Theory":
        return 1
    return max(1, leaf_count(s.antecedent) + bracket_count(s.antecedent))


def feasible(s: Sequent, sys: System) -> bool:
    """Cheap necessary conditions for cut-free derivability."""
    if sys.variant != "L1Theory" and not atoms_balanced(s, sys.variant == "L1BangW"):
        return False
    if sys.variant != "BL1":
        return not bracket_count(s.antecedent)
    b = bracket_count(s.antecedent)
    if not b:
        return True
    limit = destroyer_budget(s)
    if limit is not None and b > limit:
        return False
    return brackets_removable(s)


# --------------------------------------------------------------------- moves

def _sub_multisets(bangs: list) -> Iterator[tuple]:
    """Sub-multisets of a list of formulae, as (chosen, rest) pairs."""
    groups = []
    for b in bangs:
        if groups and groups[-1][0] == b:
            groups[-1][1] += 1
        else:
            groups.append([b, 1])

    def rec(k):
        if k == len(groups):
            yield (), ()
            return
        b, m = groups[k]
        for chosen, rest in rec(k + 1):
            for c in range(m + 1):
                yield (b,) * c + chosen, (b,) * (m - c) + rest

    yield from rec(0)


def _split_node(items):
    fixed = [it for it in items if not isinstance(it, Bang)]
    bangs = sorted((it for it in items if isinstance(it, Bang)), key=render_formula)
    return fixed, bangs


class _Search:
    def __init__(self, sys: System, budget: Budget):
        self.sys = sys
        self.budget = budget
        self.memo: dict = {}
        self.deadline = time.monotonic() + budget.time_limit
        self.ticks = 0
        self.size_cut = False
        self.move_cache: dict = {}

    def key(self, s: Sequent):
        return (perm_key(s.antecedent), s.succedent)

    def _tick(self):
        self.ticks += 1
        if self.ticks % 64 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("time limit")

    # A memo entry is [derivation, cost, fail_upto, dead].
    def prove(self, s: Sequent, limit: int):
        """Minimal-cost derivation of ``s`` with cost <= limit.

        Returns (derivation or None, limited) where ``limited`` tells
        whether a failure may be due to the limit.
        """
        k = self.key(s)
        e = self.memo.get(k)
        if e is None:
            e = self.memo[k] = [None, 0, lower_bound(s, self.sys) - 1, False]
            if not feasible(s, self.sys):
                e[3] = True
        if e[0] is not None:
            if e[1] <= limit:
                return with_perm(s, e[0]), False
            return None, True
        if e[3]:
            return None, False
        for lev in range(e[2] + 1, limit + 1):
            d, limited = self._level(s, lev)
            if d is not None:
                e[0], e[1] = d, d.nonperm_size
                return d, False
            e[2] = lev
            if not limited:
                e[3] = True
                return None, False
        return None, True

    def _level(self, s: Sequent, lev: int):
        self._tick()
        limited = False
        for arranged, inst, prems in self.moves(s):
            if not prems:
                d = Derivation(arranged, inst, ())
                return with_perm(s, d), False
            if len(prems) == 1:
                d1, lim = self.prove(prems[0], lev - 1)
                limited |= lim
                if d1 is None:
                    continue
                sub = (d1,)
            else:
                d1, lim = self.prove(prems[0], lev - 1 - lower_bound(prems[1], self.sys))
                limited |= lim
                if d1 is None:
                    continue
                d2, lim = self.prove(prems[1], lev - 1 - d1.nonperm_size)
                limited |= lim
                if d2 is None:
                    continue
                sub = (d1, d2)
            return with_perm(s, Derivation(arranged, inst, sub)), False
        return None, limited

    # ---------------------------------------------------------------- moves
    def moves(self, s: Sequent):
        k = self.key(s)
        got = self.move_cache.get(k)
        if got is None:
            got = self.move_cache[k] = list(self._moves(s))
        return got

    def _moves(self, s: Sequent):
        seen = set()
        for arranged, inst in self._raw_moves(s):
            self._tick()
            prems = instantiate_backward(arranged, inst, self.sys)
            if any(leaf_count(p.antecedent) > self.budget.max_antecedent_items for p in prems):
                self.size_cut = True
                continue
            sig = (inst.rule, tuple(self.key(p) for p in prems))
            if sig in seen:
                continue
            seen.add(sig)
            yield arranged, inst, prems

    def _raw_moves(self, s: Sequent):
        sys = self.sys
        ante, succ = s.antecedent, s.succedent
        R = RuleId
        for r in R:
            if r is R.PermStar or not available(r, sys):
                continue
            if r is R.Cut:
                if sys.variant == "L1Theory":
                    yield from self._theory_cuts(s)
                continue
            if r is R.AxId:
                if ante == (succ,):
                    yield s, RuleInstance(r)
            elif r is R.AxUnit:
                if not ante and isinstance(succ, Unit):
                    yield s, RuleInstance(r)
            elif r is R.AxTheory:
                for k, ax in enumerate(sys.axioms):
                    if ax == s:
                        yield s, RuleInstance(r, axiom=k)
            elif r is R.UnderR:
                if isinstance(succ, Under):
                    yield s, RuleInstance(r)
            elif r is R.OverR:
                if isinstance(succ, Over):
                    yield s, RuleInstance(r)
            elif r is R.ProdR:
                if isinstance(succ, Prod):
                    fixed, bangs = _split_node(ante)
                    for k in range(len(fixed) + 1):
                        for chosen, rest in _sub_multisets(bangs):
                            arr = chosen + tuple(fixed[:k]) + rest + tuple(fixed[k:])
                            yield Sequent(arr, succ), RuleInstance(r, splits=(len(chosen) + k,))
            elif r is R.DiamondR:
                if isinstance(succ, Diamond) and len(ante) == 1 and isinstance(ante[0], Bracket):
                    yield s, RuleInstance(r)
            elif r is R.BoxInvR:
                if isinstance(succ, BoxInv):
                    yield s, RuleInstance(r)
            elif r is R.BangR:
                if isinstance(succ, Bang) and all(isinstance(it, Bang) for it in ante):
                    yield s, RuleInstance(r)
            else:
                for path in node_paths(ante):
                    yield from self._node_moves(s, r, path)

    def _node_moves(self, s: Sequent, r: RuleId, path: tuple):
        R = RuleId
        ante, succ = s.antecedent, s.succedent
        items = get_node(ante, path)

        def arr(new):
            return Sequent(replace_node(ante, path, tuple(new)), succ)

        if r in (R.UnitL, R.ProdL, R.DiamondL, R.BoxInvL):
            for i, it in enumerate(items):
                if r is R.BoxInvL:
                    ok = isinstance(it, Bracket) and len(it.items) == 1 and isinstance(it.items[0], BoxInv)
                else:
                    ok = isinstance(it, {R.UnitL: Unit, R.ProdL: Prod, R.DiamondL: Diamond}[r])
                if ok:
                    yield s, RuleInstance(r, node=path, index=i)
            return
        fixed, bangs = _split_node(items)
        if r in (R.BangL, R.Contr, R.Weak):
            done = set()
            for i, it in enumerate(items):
                if not isinstance(it, Bang) or it in done:
                    continue
                done.add(it)
                if r is R.BangL:
                    rest = [x for x in items if isinstance(x, Bang)]
                    rest.remove(it)
                    for t in range(len(fixed) + 1):
                        new = fixed[:t] + [it] + fixed[t:] + rest
                        yield arr(new), RuleInstance(r, node=path, index=t)
                elif r is R.Contr:
                    yield s, RuleInstance(r, node=path, index=i)
                else:
                    yield s, RuleInstance(r, node=path, index=i, formula=it)
            return
        if r in (R.OverL, R.UnderL):
            cls = Over if r is R.OverL else Under
            for j, it in enumerate(fixed):
                if not isinstance(it, cls):
                    continue
                for chosen, rest in _sub_multisets(bangs):
                    rest = list(rest)
                    chosen = list(chosen)
                    if r is R.OverL:
                        for e in range(j + 1, len(fixed) + 1):
                            new = rest + fixed[:j + 1] + chosen + fixed[j + 1:e] + fixed[e:]
                            i = len(rest) + j
                            end = i + 1 + len(chosen) + (e - j - 1)
                            yield arr(new), RuleInstance(r, node=path, index=i, splits=(end,))
                    else:
                        for st in range(0, j + 1):
                            new = rest + fixed[:st] + chosen + fixed[st:j] + [it] + fixed[j + 1:]
                            start = len(rest) + st
                            i = start + len(chosen) + (j - st)
                            yield arr(new), RuleInstance(r, node=path, index=i, splits=(start,))
            return
        if r is R.ContrB:
            for block, others in _sub_multisets(bangs):
                if not block:
                    continue
                for g0 in range(len(fixed) + 1):
                    for g1 in range(g0, len(fixed) + 1):
                        for extra, rest in _sub_multisets(list(others)):
                            new = (list(rest) + fixed[:g0] + list(block) + list(extra)
                                   + fixed[g0:g1] + fixed[g1:])
                            start = len(rest) + g0
                            n_end = start + len(block)
                            g_end = n_end + len(extra) + (g1 - g0)
                            yield arr(new), RuleInstance(r, node=path, index=start,
                                                         splits=(n_end, g_end))
            return

    def _theory_cuts(self, s: Sequent):
        ante, succ = s.antecedent, s.succedent
        for ax in self.sys.axioms:
            g, a = ax.antecedent, ax.succedent
            for path in node_paths(ante):
                items = get_node(ante, path)
                for st in range(len(items) - len(g) + 1):
                    if items[st:st + len(g)] == g:
                        yield s, RuleInstance(RuleId.Cut, node=path, index=st,
                                              splits=(st + len(g),), formula=a)
        for ax in self.sys.axioms:
            if ax.succedent != succ:
                continue
            g = ax.antecedent
            for q, f in enumerate(g):
                pre, suf = g[:q], g[q + 1:]
                if len(pre) + len(suf) > len(ante):
                    continue
                if ante[:len(pre)] != pre or ante[len(ante) - len(suf):] != suf:
                    continue
                yield s, RuleInstance(RuleId.Cut, node=(), index=q,
                                      splits=(len(ante) - len(suf),), formula=f)


def _run(s: Sequent, sys: System, budget: Budget, complete: bool) -> ProveResult:
    eng = _Search(sys, budget)
    try:
        d, limited = eng.prove(s, budget.max_rule_apps)
    except BudgetExceeded as exc:
        return ProveResult(Status.EXHAUSTED, reason=str(exc))
    if d is not None:
        return ProveResult(Status.DERIVABLE, d)
    if complete:
        return ProveResult(Status.NOT_DERIVABLE)
    if limited:
        return ProveResult(Status.EXHAUSTED, reason="rule budget")
    if eng.size_cut:
        return ProveResult(Status.EXHAUSTED, reason="antecedent size cap")
    return ProveResult(Status.EXHAUSTED, reason="search space exhausted without completeness claim")


def decide_bnnc(s: Sequent, budget: Optional[Budget] = None) -> ProveResult:
    """Decide a BNNC sequent in BL1.

    Failure within the quadratic budget is a genuine non-derivability
    verdict.  Only a time-out yields Exhausted.
    """
    v = check_bnnc(s)
    if not v.ok:
        raise ValueError(f"not a BNNC sequent: {v.violations[0]}")
    budget = budget or Budget.for_sequent(s)
    return _run(s, BL1, budget, complete=True)


def search(s: Sequent, sys: System, budget: Optional[Budget] = None) -> ProveResult:
    budget = budget or Budget.for_sequent(s)
    return _run(s, sys, budget, complete=budget.complete)


def prove(s: Sequent, sys: System, budget: Optional[Budget] = None) -> tuple:
    """Route to decide_bnnc when possible.  Returns (route, result)."""
    if sys.variant == "BL1" and check_bnnc(s).ok:
        return "decide_bnnc", decide_bnnc(s, budget)
    return "search", search(s, sys, budget)


# -------------------------------------------------------------------- oracle

class _Oracle:
    """Concrete-sequent search counting every node, PermStar included."""

    def __init__(self, sys: System, max_items: int, prune: bool = True):
        self.sys = sys
        self.max_items = max_items
        self.prune = prune
        self.memo = {}
        self.inst_cache = {}

    def feasible(self, s: Sequent) -> bool:
        return feasible(s, self.sys) if self.prune else True

    def instances(self, s: Sequent):
        got = self.inst_cache.get(s)
        if got is None:
            got = []
            for inst in applicable_instances(s, self.sys, self.max_items):
                prems = instantiate_backward(s, inst, self.sys)
                if all(self.feasible(p) for p in prems):
                    got.append((inst, prems))
            self.inst_cache[s] = got
        return got

    def min_size(self, s: Sequent, noperm: bool, limit: int):
        """(minimal size if <= limit else None, whether a larger one exists)."""
        m = self.exact(s, noperm)
        if m is not None and m <= limit:
            return m, False
        return None, m is not None

    def exact(self, s: Sequent, noperm: bool) -> Optional[int]:
        """Minimal derivation size over the whole finite space, or None."""
        self._stack = {}
        return self._exact((s, noperm))[0]

    def _exact(self, key):
        # Returns (size or None, shallowest in-progress depth touched).  A
        # result that touched an ancestor still on the stack is not cached:
        # it was computed with that ancestor's cycle cut off.
        if key in self.memo:
            return self.memo[key], None
        if key in self._stack:
            return None, self._stack[key]
        s, noperm = key
        if not self.feasible(s):
            self.memo[key] = None
            return None, None
        depth = self._stack[key] = len(self._stack)
        best, touched = None, None
        for inst, prems in self.instances(s):
            is_perm = inst.rule is RuleId.PermStar
            if is_perm and noperm:
                continue
            total = 1
            for p in prems:
                got, t = self._exact((p, is_perm))
                if t is not None and (touched is None or t < touched):
                    touched = t
                if got is None:
                    total = None
                    break
                total += got
            if total is not None and (best is None or total < best):
                best = total
        del self._stack[key]
        if touched is None or touched >= depth:
            self.memo[key] = best
            touched = None
        return best, touched

    def enumerate(self, s: Sequent, noperm: bool, limit: int) -> Iterator[Derivation]:
        low, _ = self.min_size(s, noperm, limit)
        if low is None:
            return
        for inst, prems in self.instances(s):
            is_perm = inst.rule is RuleId.PermStar
            if is_perm and noperm:
                continue
            yield from (Derivation(s, inst, sub)
                        for sub in self._premise_tuples(prems, is_perm, limit - 1))

    def _premise_tuples(self, prems, after_perm, budget):
        if not prems:
            yield ()
            return
        first, rest = prems[0], prems[1:]
        reserve = 0
        for p in rest:
            m, _ = self.min_size(p, after_perm, budget)
            if m is None:
                return
            reserve += m
        for d in self.enumerate(first, after_perm, budget - reserve):
            for tail in self._premise_tuples(rest, after_perm, budget - d.size):
                yield (d,) + tail


def oracle_derivable(s: Sequent, sys: System, max_size: int,
                     max_items: Optional[int] = None, prune: bool = True) -> bool:
    """Whether some normal cut-free derivation of size <= max_size exists.

    ``prune=False`` drops the prover's feasibility checks, leaving plain
    exhaustive enumeration over kernel rule instances.
    """
    o = _Oracle(sys, max_items or max(4 * sequent_size(s), 1), prune)
    got, _ = o.min_size(s, False, max_size)
    return got is not None


def enumerate_derivations(s: Sequent, sys: System, max_size: int,
                          max_items: Optional[int] = None,
                          prune: bool = True) -> Iterator[Derivation]:
    """Every normal cut-free derivation of ``s`` with at most ``max_size`` nodes."""
    o = _Oracle(sys, max_items or max(4 * sequent_size(s), 1), prune)
    yield from o.enumerate(s, False, max_size)
