"""Rule catalogues, backward rule instantiation and the derivation checker."""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .syntax import (
    UNIT,
    Bang,
    BoxInv,
    Bracket,
    Diamond,
    Formula,
    Over,
    Prod,
    Sequent,
    Under,
    Unit,
    has_bracket_modality,
    bracket_count,
    config_formulas,
    leaf_count,
    parse_formula,
    parse_sequent,
    render,
    render_formula,
)


# ------------------------------------------------------------------ systems

@dataclass(frozen=True)
class System:
    """One of the four calculi.

    ``BL1`` has brackets and bracket-gated contraction, ``L1Bang`` plain
    contraction, ``L1BangW`` adds weakening, ``L1Theory`` is the Lambek
    calculus with unit plus extra axiom sequents.
    """

    variant: str
    axioms: tuple = ()

    def __post_init__(self):
        if self.variant not in ("BL1", "L1Bang", "L1BangW", "L1Theory"):
            raise ValueError(f"unknown system {self.variant!r}")
        if self.variant != "L1Theory" and self.axioms:
            raise ValueError("only L1Theory carries axioms")
        for ax in self.axioms:
            if bracket_count(ax.antecedent) or has_bracket_modality(ax) or _has_bang(ax):
                raise ValueError(f"theory axiom must be bracket- and !-free: {render(ax)}")

    def __str__(self):
        return self.variant


def _has_bang(s: Sequent) -> bool:
    from .syntax import subformulas

    fs = [s.succedent, *config_formulas(s.antecedent)]
    return any(isinstance(g, Bang) for f in fs for g in subformulas(f))


BL1 = System("BL1")
L1BANG = System("L1Bang")
L1BANGW = System("L1BangW")


def L1Theory(axioms) -> System:
    return System("L1Theory", tuple(axioms))


class RuleId(enum.IntEnum):
    AxId = 0
    AxUnit = 1
    AxTheory = 2
    UnderL = 3
    UnderR = 4
    OverL = 5
    OverR = 6
    ProdL = 7
    ProdR = 8
    UnitL = 9
    DiamondL = 10
    DiamondR = 11
    BoxInvL = 12
    BoxInvR = 13
    BangL = 14
    BangR = 15
    ContrB = 16
    Contr = 17
    Weak = 18
    PermStar = 19
    Cut = 20


_BRACKET_RULES = {RuleId.DiamondL, RuleId.DiamondR, RuleId.BoxInvL, RuleId.BoxInvR}
_BANG_RULES = {RuleId.BangL, RuleId.BangR, RuleId.PermStar}

AXIOMS = {RuleId.AxId, RuleId.AxUnit, RuleId.AxTheory}
LEFT_RULES = {
    RuleId.UnderL, RuleId.OverL, RuleId.ProdL, RuleId.UnitL, RuleId.DiamondL,
    RuleId.BoxInvL, RuleId.BangL, RuleId.ContrB, RuleId.Contr, RuleId.Weak,
    RuleId.PermStar,
}


def available(rule: RuleId, sys: System) -> bool:
    v = sys.variant
    if rule is RuleId.Cut:
        return True
    if rule is RuleId.AxTheory:
        return v == "L1Theory"
    if rule in _BRACKET_RULES or rule is RuleId.ContrB:
        return v == "BL1"
    if rule is RuleId.Contr:
        return v in ("L1Bang", "L1BangW")
    if rule is RuleId.Weak:
        return v == "L1BangW"
    if rule in _BANG_RULES:
        return v != "L1Theory"
    return True


# ------------------------------------------------------------------- errors

class RuleError(ValueError):
    """Base class for failed rule applications."""


class RuleUnavailable(RuleError):
    pass


class PathInvalid(RuleError):
    pass


class ShapeMismatch(RuleError):
    pass


# ---------------------------------------------------------------- instances

@dataclass(frozen=True)
class RuleInstance:
    """A rule together with the parameters that fix its premises.

    ``node`` is the path of bracket indices to the configuration node the rule
    acts in, ``index`` the item index inside it.  ``splits`` holds segment
    boundaries: ``(end,)`` for OverL and Cut, ``(start,)`` for UnderL,
    ``(k,)`` for ProdR, ``(block_end, gamma_end)`` for ContrB.  ``perm`` maps
    conclusion node paths to item orders (PermStar).  ``formula`` is the cut
    formula, or the weakened formula for Weak.
    """

    rule: RuleId
    node: tuple = ()
    index: int = 0
    splits: tuple = ()
    perm: tuple = ()
    formula: Optional[Formula] = None
    axiom: Optional[int] = None

    def describe(self) -> str:
        bits = []
        if self.rule in (RuleId.AxId, RuleId.AxUnit, RuleId.UnderR, RuleId.OverR,
                         RuleId.DiamondR, RuleId.BoxInvR, RuleId.BangR):
            pass
        elif self.rule is RuleId.AxTheory:
            bits.append(f"axiom={self.axiom}")
        elif self.rule is RuleId.ProdR:
            bits.append(f"split={self.splits[0]}")
        elif self.rule is RuleId.PermStar:
            bits.append("perm=" + ";".join(
                f"{'.'.join(map(str, p)) or '^'}:{','.join(map(str, o))}" for p, o in self.perm))
        else:
            where = ".".join(map(str, self.node + (self.index,)))
            bits.append(f"at={where}")
            if self.splits:
                bits.append("splits=" + ",".join(map(str, self.splits)))
        if self.formula is not None:
            bits.append(f"A={render_formula(self.formula)}")
        return self.rule.name + (" " + " ".join(bits) if bits else "")


def get_node(config: tuple, path: tuple) -> tuple:
    items = config
    for k in path:
        if not (0 <= k < len(items)) or not isinstance(items[k], Bracket):
            raise PathInvalid(f"node path {path} does not reach a bracket")
        items = items[k].items
    return items


def replace_node(config: tuple, path: tuple, new_items: tuple) -> tuple:
    if not path:
        return tuple(new_items)
    k = path[0]
    inner = replace_node(config[k].items, path[1:], new_items)
    return config[:k] + (Bracket(inner),) + config[k + 1:]


def splice(config: tuple, node: tuple, start: int, end: int, new_items) -> tuple:
    items = get_node(config, node)
    if not (0 <= start <= end <= len(items)):
        raise PathInvalid(f"segment {start}:{end} outside node of length {len(items)}")
    return replace_node(config, node, items[:start] + tuple(new_items) + items[end:])


def _item(items: tuple, index: int):
    if not (0 <= index < len(items)):
        raise PathInvalid(f"item index {index} outside node of length {len(items)}")
    return items[index]


# ------------------------------------------------------------ permutations

def _apply_perm(items: tuple, perm: dict, path: tuple) -> tuple:
    new = []
    for k, it in enumerate(items):
        if isinstance(it, Bracket):
            it = Bracket(_apply_perm(it.items, perm, path + (k,)))
        new.append(it)
    order = perm.get(path)
    if order is None:
        return tuple(new)
    return tuple(new[k] for k in order)


def _unapply_perm(items: tuple, perm: dict, path: tuple) -> tuple:
    order = perm.get(path, tuple(range(len(items))))
    out = [None] * len(items)
    for pos, k in enumerate(order):
        it = items[pos]
        if isinstance(it, Bracket):
            it = Bracket(_unapply_perm(it.items, perm, path + (k,)))
        out[k] = it
    return tuple(out)


def _check_perm(config: tuple, perm: tuple):
    seen = set()
    for path, order in perm:
        if path in seen:
            raise ShapeMismatch(f"duplicate PermStar entry for node {path}")
        seen.add(path)
        items = get_node(config, path)
        if sorted(order) != list(range(len(items))):
            raise ShapeMismatch(f"order {order} is not a permutation of node {path}")
        fixed = [k for k in order if not isinstance(items[k], Bang)]
        if fixed != sorted(fixed):
            raise ShapeMismatch("PermStar may only move !-formulae")


def perm_between(concl: tuple, prem: tuple) -> Optional[tuple]:
    """PermStar parameters turning ``concl`` into ``prem``, or None.

    Returns ``()`` when the two configurations are identical.
    """
    entries = []
    if not _match_perm(concl, prem, (), entries):
        return None
    return tuple(sorted(entries))


def _match_perm(concl: tuple, prem: tuple, path: tuple, entries: list) -> bool:
    if len(concl) != len(prem):
        return False
    fixed = [k for k, it in enumerate(concl) if not isinstance(it, Bang)]
    bangs = [k for k, it in enumerate(concl) if isinstance(it, Bang)]
    used = set()
    order = []
    fi = 0
    for it in prem:
        if isinstance(it, Bang):
            for k in bangs:
                if k not in used and concl[k] == it:
                    used.add(k)
                    order.append(k)
                    break
            else:
                return False
        else:
            if fi >= len(fixed):
                return False
            k = fixed[fi]
            fi += 1
            c = concl[k]
            if isinstance(c, Bracket) != isinstance(it, Bracket):
                return False
            if isinstance(c, Bracket):
                if not _match_perm(c.items, it.items, path + (k,), entries):
                    return False
            elif c != it:
                return False
            order.append(k)
    if order != list(range(len(concl))):
        entries.append((path, tuple(order)))
    return True


def perm_key(config: tuple):
    """Key identifying a configuration up to PermStar."""
    out = []
    bangs = []
    for it in config:
        if isinstance(it, Bang):
            bangs.append(it)
        elif isinstance(it, Bracket):
            out.append(("[", perm_key(it.items)))
        else:
            out.append(it)
    bangs.sort(key=hash)
    return (tuple(out), tuple(bangs))


def arrangements(config: tuple) -> Iterator[tuple]:
    """All configurations reachable from ``config`` by PermStar (incl. itself)."""
    options = []
    for it in config:
        if isinstance(it, Bracket):
            options.append([Bracket(x) for x in arrangements(it.items)])
        else:
            options.append([it])
    for inner in itertools.product(*options):
        yield from _interleavings(inner)


def _interleavings(items: tuple) -> Iterator[tuple]:
    fixed = [it for it in items if not isinstance(it, Bang)]
    bangs = sorted((it for it in items if isinstance(it, Bang)), key=render_formula)
    n = len(items)
    seen = set()
    for slots in itertools.combinations(range(n), len(bangs)):
        for order in _multiset_perms(bangs):
            out = [None] * n
            for s, b in zip(slots, order):
                out[s] = b
            fi = iter(fixed)
            out = tuple(x if x is not None else next(fi) for x in out)
            if out not in seen:
                seen.add(out)
                yield out


def _multiset_perms(xs):
    if not xs:
        yield ()
        return
    done = set()
    for i, x in enumerate(xs):
        if x in done:
            continue
        done.add(x)
        for rest in _multiset_perms(xs[:i] + xs[i + 1:]):
            yield (x,) + rest


# ------------------------------------------------------- backward instances

def instantiate_backward(concl: Sequent, inst: RuleInstance, sys: System) -> list:
    """Premises of ``inst`` applied bottom-up to ``concl``."""
    r = inst.rule
    if not available(r, sys):
        raise RuleUnavailable(f"{r.name} is not a rule of {sys.variant}")
    ante, succ = concl.antecedent, concl.succedent

    if r is RuleId.AxId:
        if ante != (succ,):
            raise ShapeMismatch("AxId needs antecedent identical to succedent")
        return []
    if r is RuleId.AxUnit:
        if ante or not isinstance(succ, Unit):
            raise ShapeMismatch("AxUnit needs '=> 1'")
        return []
    if r is RuleId.AxTheory:
        if inst.axiom is None or not (0 <= inst.axiom < len(sys.axioms)):
            raise PathInvalid(f"no theory axiom {inst.axiom}")
        if sys.axioms[inst.axiom] != concl:
            raise ShapeMismatch("sequent differs from the theory axiom")
        return []

    if r is RuleId.UnderR:
        if not isinstance(succ, Under):
            raise ShapeMismatch("UnderR needs succedent A\\C")
        return [Sequent((succ.left,) + ante, succ.right)]
    if r is RuleId.OverR:
        if not isinstance(succ, Over):
            raise ShapeMismatch("OverR needs succedent C/B")
        return [Sequent(ante + (succ.right,), succ.left)]
    if r is RuleId.ProdR:
        if not isinstance(succ, Prod):
            raise ShapeMismatch("ProdR needs succedent A*B")
        (k,) = inst.splits
        if not 0 <= k <= len(ante):
            raise PathInvalid(f"split {k} outside antecedent")
        return [Sequent(ante[:k], succ.left), Sequent(ante[k:], succ.right)]
    if r is RuleId.DiamondR:
        if not isinstance(succ, Diamond):
            raise ShapeMismatch("DiamondR needs succedent <>A")
        if len(ante) != 1 or not isinstance(ante[0], Bracket):
            raise ShapeMismatch("DiamondR needs a single bracketed antecedent")
        return [Sequent(ante[0].items, succ.body)]
    if r is RuleId.BoxInvR:
        if not isinstance(succ, BoxInv):
            raise ShapeMismatch("BoxInvR needs succedent []-1A")
        return [Sequent((Bracket(ante),), succ.body)]
    if r is RuleId.BangR:
        if not isinstance(succ, Bang):
            raise ShapeMismatch("BangR needs succedent !A")
        if not all(isinstance(it, Bang) for it in ante):
            raise ShapeMismatch("BangR needs every antecedent item to be a !-formula")
        return [Sequent(ante, succ.body)]

    if r is RuleId.PermStar:
        _check_perm(ante, inst.perm)
        return [Sequent(_apply_perm(ante, dict(inst.perm), ()), succ)]

    items = get_node(ante, inst.node)

    if r is RuleId.Cut:
        if inst.formula is None:
            raise ShapeMismatch("Cut needs a cut formula")
        (end,) = inst.splits
        start = inst.index
        if not 0 <= start <= end <= len(items):
            raise PathInvalid(f"segment {start}:{end} outside node")
        return [
            Sequent(items[start:end], inst.formula),
            Sequent(splice(ante, inst.node, start, end, (inst.formula,)), succ),
        ]

    if r is RuleId.ContrB:
        start = inst.index
        n_end, g_end = inst.splits
        if not 0 <= start < n_end <= g_end <= len(items):
            raise PathInvalid("ContrB needs 0 <= start < block_end <= gamma_end <= len")
        block = items[start:n_end]
        if not all(isinstance(it, Bang) for it in block):
            raise ShapeMismatch("ContrB block must consist of !-formulae")
        gamma = items[n_end:g_end]
        new = items[:n_end] + (Bracket(block + gamma),) + items[g_end:]
        return [Sequent(replace_node(ante, inst.node, new), succ)]

    it = _item(items, inst.index)
    i = inst.index

    def with_items(new):
        return replace_node(ante, inst.node, new)

    if r is RuleId.BoxInvL:
        if not (isinstance(it, Bracket) and len(it.items) == 1 and isinstance(it.items[0], BoxInv)):
            raise ShapeMismatch("BoxInvL needs a bracket holding exactly one []-1A")
        return [Sequent(with_items(items[:i] + (it.items[0].body,) + items[i + 1:]), succ)]
    if isinstance(it, Bracket):
        raise ShapeMismatch(f"{r.name} needs a formula, found a bracket")

    if r is RuleId.UnitL:
        if not isinstance(it, Unit):
            raise ShapeMismatch("UnitL needs 1")
        return [Sequent(with_items(items[:i] + items[i + 1:]), succ)]
    if r is RuleId.ProdL:
        if not isinstance(it, Prod):
            raise ShapeMismatch("ProdL needs A*B")
        return [Sequent(with_items(items[:i] + (it.left, it.right) + items[i + 1:]), succ)]
    if r is RuleId.DiamondL:
        if not isinstance(it, Diamond):
            raise ShapeMismatch("DiamondL needs <>A")
        return [Sequent(with_items(items[:i] + (Bracket((it.body,)),) + items[i + 1:]), succ)]
    if r is RuleId.BangL:
        if not isinstance(it, Bang):
            raise ShapeMismatch("BangL needs !A")
        return [Sequent(with_items(items[:i] + (it.body,) + items[i + 1:]), succ)]
    if r is RuleId.Contr:
        if not isinstance(it, Bang):
            raise ShapeMismatch("Contr needs !A")
        return [Sequent(with_items(items[:i] + (it, it) + items[i + 1:]), succ)]
    if r is RuleId.Weak:
        if not isinstance(it, Bang):
            raise ShapeMismatch("Weak needs !A")
        if inst.formula is not None and inst.formula != it:
            raise ShapeMismatch("Weak formula does not match")
        return [Sequent(with_items(items[:i] + items[i + 1:]), succ)]
    if r is RuleId.OverL:
        if not isinstance(it, Over):
            raise ShapeMismatch("OverL needs C/B")
        (end,) = inst.splits
        if not i < end <= len(items):
            raise PathInvalid(f"OverL argument segment {i + 1}:{end} invalid")
        return [
            Sequent(items[i + 1:end], it.right),
            Sequent(with_items(items[:i] + (it.left,) + items[end:]), succ),
        ]
    if r is RuleId.UnderL:
        if not isinstance(it, Under):
            raise ShapeMismatch("UnderL needs A\\C")
        (start,) = inst.splits
        if not 0 <= start <= i:
            raise PathInvalid(f"UnderL argument segment {start}:{i} invalid")
        return [
            Sequent(items[start:i], it.left),
            Sequent(with_items(items[:start] + (it.right,) + items[i + 1:]), succ),
        ]
    raise RuleUnavailable(f"unknown rule {r!r}")


def apply_forward(inst: RuleInstance, premises, sys: System) -> Sequent:
    """Rebuild the conclusion of ``inst`` from its premises."""
    r = inst.rule
    if not available(r, sys):
        raise RuleUnavailable(f"{r.name} is not a rule of {sys.variant}")
    if r is RuleId.AxUnit:
        return Sequent((), UNIT)
    if r is RuleId.AxTheory:
        return sys.axioms[inst.axiom]
    if r is RuleId.AxId:
        if inst.formula is None:
            raise ShapeMismatch("AxId forward needs the axiom formula")
        return Sequent((inst.formula,), inst.formula)
    p = premises[0]
    a, s = p.antecedent, p.succedent
    if r is RuleId.UnderR:
        return Sequent(a[1:], Under(a[0], s))
    if r is RuleId.OverR:
        return Sequent(a[:-1], Over(s, a[-1]))
    if r is RuleId.ProdR:
        q = premises[1]
        return Sequent(a + q.antecedent, Prod(s, q.succedent))
    if r is RuleId.DiamondR:
        return Sequent((Bracket(a),), Diamond(s))
    if r is RuleId.BoxInvR:
        return Sequent(a[0].items, BoxInv(s))
    if r is RuleId.BangR:
        return Sequent(a, Bang(s))
    if r is RuleId.PermStar:
        return Sequent(_unapply_perm(a, dict(inst.perm), ()), s)
    if r in (RuleId.OverL, RuleId.UnderL, RuleId.Cut):
        arg, main = premises
        ma, ms = main.antecedent, main.succedent
        items = get_node(ma, inst.node)
        if r is RuleId.Cut:
            k = inst.index
            return Sequent(replace_node(ma, inst.node, items[:k] + arg.antecedent + items[k + 1:]), ms)
        if r is RuleId.OverL:
            k = inst.index
            c = items[k]
            new = items[:k] + (Over(c, arg.succedent),) + arg.antecedent + items[k + 1:]
        else:
            k = inst.splits[0]
            c = items[k]
            new = items[:k] + arg.antecedent + (Under(arg.succedent, c),) + items[k + 1:]
        return Sequent(replace_node(ma, inst.node, new), ms)
    items = get_node(a, inst.node)
    i = inst.index
    if r is RuleId.UnitL:
        new = items[:i] + (UNIT,) + items[i:]
    elif r is RuleId.ProdL:
        new = items[:i] + (Prod(items[i], items[i + 1]),) + items[i + 2:]
    elif r is RuleId.DiamondL:
        new = items[:i] + (Diamond(items[i].items[0]),) + items[i + 1:]
    elif r is RuleId.BoxInvL:
        new = items[:i] + (Bracket((BoxInv(items[i]),)),) + items[i + 1:]
    elif r is RuleId.BangL:
        new = items[:i] + (Bang(items[i]),) + items[i + 1:]
    elif r is RuleId.Contr:
        new = items[:i] + items[i + 1:]
    elif r is RuleId.Weak:
        new = items[:i] + (inst.formula,) + items[i:]
    elif r is RuleId.ContrB:
        n_end = inst.splits[0]
        n = n_end - i
        br = items[n_end]
        new = items[:n_end] + br.items[n:] + items[n_end + 1:]
    else:
        raise RuleUnavailable(f"no forward form for {r.name}")
    return Sequent(replace_node(a, inst.node, new), s)


# -------------------------------------------------------------- enumeration

def node_paths(config: tuple, prefix=()) -> Iterator[tuple]:
    yield prefix
    for k, it in enumerate(config):
        if isinstance(it, Bracket):
            yield from node_paths(it.items, prefix + (k,))


def _rule_instances(s: Sequent, r: RuleId, sys: System, bound) -> Iterator[RuleInstance]:
    ante, succ = s.antecedent, s.succedent
    if r is RuleId.AxId:
        if ante == (succ,):
            yield RuleInstance(r)
        return
    if r is RuleId.AxUnit:
        if not ante and isinstance(succ, Unit):
            yield RuleInstance(r)
        return
    if r is RuleId.AxTheory:
        for k, ax in enumerate(sys.axioms):
            if ax == s:
                yield RuleInstance(r, axiom=k)
        return
    if r is RuleId.UnderR:
        if isinstance(succ, Under):
            yield RuleInstance(r)
        return
    if r is RuleId.OverR:
        if isinstance(succ, Over):
            yield RuleInstance(r)
        return
    if r is RuleId.ProdR:
        if isinstance(succ, Prod):
            for k in range(len(ante) + 1):
                yield RuleInstance(r, splits=(k,))
        return
    if r is RuleId.DiamondR:
        if isinstance(succ, Diamond) and len(ante) == 1 and isinstance(ante[0], Bracket):
            yield RuleInstance(r)
        return
    if r is RuleId.BoxInvR:
        if isinstance(succ, BoxInv):
            yield RuleInstance(r)
        return
    if r is RuleId.BangR:
        if isinstance(succ, Bang) and all(isinstance(it, Bang) for it in ante):
            yield RuleInstance(r)
        return
    if r is RuleId.PermStar:
        for arr in arrangements(ante):
            if arr == ante:
                continue
            perm = perm_between(ante, arr)
            target = Sequent(arr, succ)
            if any(True for _ in _nonperm_instances(target, sys, bound)):
                yield RuleInstance(r, perm=perm)
        return
    total = leaf_count(ante)
    for node in node_paths(ante):
        items = get_node(ante, node)
        if r is RuleId.ContrB:
            for start in range(len(items)):
                n_end = start
                while n_end < len(items) and isinstance(items[n_end], Bang):
                    n_end += 1
                    if bound is not None and total + (n_end - start) > bound:
                        break
                    for g_end in range(n_end, len(items) + 1):
                        yield RuleInstance(r, node=node, index=start, splits=(n_end, g_end))
            continue
        for i, it in enumerate(items):
            if r is RuleId.BoxInvL:
                if isinstance(it, Bracket) and len(it.items) == 1 and isinstance(it.items[0], BoxInv):
                    yield RuleInstance(r, node=node, index=i)
                continue
            if isinstance(it, Bracket):
                continue
            if r is RuleId.UnitL and isinstance(it, Unit):
                yield RuleInstance(r, node=node, index=i)
            elif r is RuleId.ProdL and isinstance(it, Prod):
                yield RuleInstance(r, node=node, index=i)
            elif r is RuleId.DiamondL and isinstance(it, Diamond):
                yield RuleInstance(r, node=node, index=i)
            elif r is RuleId.BangL and isinstance(it, Bang):
                yield RuleInstance(r, node=node, index=i)
            elif r is RuleId.Contr and isinstance(it, Bang):
                if bound is None or total + 1 <= bound:
                    yield RuleInstance(r, node=node, index=i)
            elif r is RuleId.Weak and isinstance(it, Bang):
                yield RuleInstance(r, node=node, index=i, formula=it)
            elif r is RuleId.OverL and isinstance(it, Over):
                for end in range(i + 1, len(items) + 1):
                    yield RuleInstance(r, node=node, index=i, splits=(end,))
            elif r is RuleId.UnderL and isinstance(it, Under):
                for start in range(0, i + 1):
                    yield RuleInstance(r, node=node, index=i, splits=(start,))


def _nonperm_instances(s: Sequent, sys: System, bound) -> Iterator[RuleInstance]:
    for r in RuleId:
        if r in (RuleId.PermStar, RuleId.Cut) or not available(r, sys):
            continue
        yield from _rule_instances(s, r, sys, bound)


def applicable_instances(s: Sequent, sys: System, bound: Optional[int] = None) -> list:
    """All cut-free rule instances applicable bottom-up to ``s``.

    ``bound`` caps the antecedent leaf count of premises produced by the
    growing rules (ContrB, Contr).  PermStar instances are listed only when
    the rearranged sequent admits some other rule.
    """
    out = []
    for r in RuleId:
        if r is RuleId.Cut or not available(r, sys):
            continue
        out.extend(_rule_instances(s, r, sys, bound))
    return out


def find_instance(concl: Sequent, rule: RuleId, premises, sys: System) -> Optional[RuleInstance]:
    """A rule instance of kind ``rule`` turning ``premises`` into ``concl``."""
    premises = list(premises)
    if rule is RuleId.PermStar:
        if len(premises) != 1 or premises[0].succedent != concl.succedent:
            return None
        perm = perm_between(concl.antecedent, premises[0].antecedent)
        if perm is None:
            return None
        return RuleInstance(rule, perm=perm)
    if not available(rule, sys):
        return None
    for inst in _rule_instances(concl, rule, sys, None):
        if instantiate_backward(concl, inst, sys) == premises:
            return inst
    return None


# --------------------------------------------------------------- derivations

@dataclass(frozen=True)
class Derivation:
    conclusion: Sequent
    rule: RuleInstance
    premises: tuple = ()

    @property
    def size(self) -> int:
        """Number of rule applications (nodes)."""
        return 1 + sum(p.size for p in self.premises)

    @property
    def nonperm_size(self) -> int:
        own = 0 if self.rule.rule is RuleId.PermStar else 1
        return own + sum(p.nonperm_size for p in self.premises)

    def nodes(self, path=()) -> Iterator[tuple]:
        yield path, self
        for k, p in enumerate(self.premises):
            yield from p.nodes(path + (k,))

    def count(self, rule: RuleId) -> int:
        return sum(1 for _, d in self.nodes() if d.rule.rule is rule)

    def render_tree(self, indent: int = 0) -> str:
        lines = []
        self._render(lines, 0, indent)
        return "\n".join(lines)

    def _render(self, lines, depth, indent):
        pad = "  " * (depth + indent)
        lines.append(f"{pad}{render(self.conclusion)}    [{self.rule.describe()}]")
        for p in self.premises:
            p._render(lines, depth + 1, indent)

    def to_dict(self) -> dict:
        r = self.rule
        params: dict = {}
        if r.node or r.rule not in AXIOMS | {RuleId.UnderR, RuleId.OverR, RuleId.ProdR,
                                             RuleId.DiamondR, RuleId.BoxInvR, RuleId.BangR,
                                             RuleId.PermStar}:
            params["node"] = list(r.node)
            params["index"] = r.index
        if r.splits:
            params["splits"] = list(r.splits)
        if r.perm:
            params["perm"] = [[list(p), list(o)] for p, o in r.perm]
        if r.formula is not None:
            params["formula"] = render_formula(r.formula)
        if r.axiom is not None:
            params["axiom"] = r.axiom
        return {
            "rule": r.rule.name,
            "conclusion": render(self.conclusion),
            "params": params,
            "premises": [p.to_dict() for p in self.premises],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Derivation":
        params = d.get("params", {})
        try:
            rule = RuleId[d["rule"]]
        except KeyError:
            raise ValueError(f"unknown rule {d.get('rule')!r}") from None
        inst = RuleInstance(
            rule,
            node=tuple(params.get("node", ())),
            index=params.get("index", 0),
            splits=tuple(params.get("splits", ())),
            perm=tuple((tuple(p), tuple(o)) for p, o in params.get("perm", ())),
            formula=parse_formula(params["formula"]) if "formula" in params else None,
            axiom=params.get("axiom"),
        )
        return cls(
            parse_sequent(d["conclusion"]),
            inst,
            tuple(cls.from_dict(p) for p in d.get("premises", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "Derivation":
        return cls.from_dict(json.loads(text))


def node(concl: Sequent, inst: RuleInstance, *premises: Derivation) -> Derivation:
    return Derivation(concl, inst, tuple(premises))


def derive(concl: Sequent, inst: RuleInstance, sys: System, *premises: Derivation) -> Derivation:
    """Build a node after checking the premises match the rule instance."""
    expected = instantiate_backward(concl, inst, sys)
    actual = [p.conclusion for p in premises]
    if expected != actual:
        raise ShapeMismatch(
            f"{inst.rule.name}: expected premises {[render(x) for x in expected]}, "
            f"got {[render(x) for x in actual]}"
        )
    return Derivation(concl, inst, tuple(premises))


class DerivationError(ValueError):
    def __init__(self, path: tuple, reason: str, expected=None, actual=None):
        self.path = path
        self.reason = reason
        self.expected = expected
        self.actual = actual
        msg = f"at {'.'.join(map(str, path)) or 'root'}: {reason}"
        if expected is not None:
            msg += f"; expected {[render(x) for x in expected]}, got {[render(x) for x in actual]}"
        super().__init__(msg)


def check_derivation(d: Derivation, sys: System, allow_cut: bool = False) -> None:
    """Validate every node; raise DerivationError on the first failure."""
    stack = [((), d)]
    while stack:
        path, n = stack.pop()
        if n.rule.rule is RuleId.Cut and not allow_cut:
            raise DerivationError(path, "cut is not allowed")
        try:
            expected = instantiate_backward(n.conclusion, n.rule, sys)
        except RuleError as e:
            raise DerivationError(path, f"{type(e).__name__}: {e}") from None
        actual = [p.conclusion for p in n.premises]
        if expected != actual:
            raise DerivationError(path, "premise mismatch", expected, actual)
        for k, p in enumerate(n.premises):
            stack.append((path + (k,), p))


def is_valid(d: Derivation, sys: System, allow_cut: bool = False) -> bool:
    try:
        check_derivation(d, sys, allow_cut)
    except DerivationError:
        return False
    return True


def is_normal(d: Derivation) -> bool:
    for _, n in d.nodes():
        if n.rule.rule is RuleId.PermStar and n.premises[0].rule.rule is RuleId.PermStar:
            return False
    return True


def cut_normalized(d: Derivation) -> bool:
    """Every cut has a theory axiom as one of its premises."""
    for _, n in d.nodes():
        if n.rule.rule is RuleId.Cut and not any(
            p.rule.rule is RuleId.AxTheory for p in n.premises
        ):
            return False
    return True


def with_perm(target: Sequent, d: Derivation) -> Derivation:
    """Derivation of ``target`` from ``d`` via at most one PermStar on top.

    Merges into ``d``'s own root PermStar so the result stays normal.
    """
    if d.conclusion == target:
        return d
    below = d.premises[0] if d.rule.rule is RuleId.PermStar else d
    if below.conclusion == target:
        return below
    perm = perm_between(target.antecedent, below.conclusion.antecedent)
    if perm is None or target.succedent != below.conclusion.succedent:
        raise ShapeMismatch(f"{render(target)} is not a permutation of {render(d.conclusion)}")
    return Derivation(target, RuleInstance(RuleId.PermStar, perm=perm), (below,))


def normalize_perms(d: Derivation) -> Derivation:
    """Merge consecutive PermStar nodes and drop identity ones."""
    prem = tuple(normalize_perms(p) for p in d.premises)
    if d.rule.rule is RuleId.PermStar:
        return with_perm(d.conclusion, prem[0])
    if prem == d.premises:
        return d
    return Derivation(d.conclusion, d.rule, prem)


def contract_block(target: Sequent, top: Derivation, node: tuple, index: int, block: tuple) -> Derivation:
    """Derive ``target`` from ``top`` by plain contraction of a !-block.

    ``target`` has ``block`` at ``node``/``index``; ``top`` concludes the
    same sequent with the block written twice in a row.  Each formula is
    contracted once and a PermStar sorts the doubled copies.
    """
    n = len(block)
    if n == 0:
        return top

    def doubled(k):
        mid = tuple(x for b in block[:k] for x in (b, b)) + tuple(block[k:])
        return Sequent(splice(target.antecedent, node, index, index + n, mid), target.succedent)

    out = with_perm(doubled(n), top)
    for k in range(n - 1, -1, -1):
        out = Derivation(doubled(k), RuleInstance(RuleId.Contr, node=node, index=index + 2 * k), (out,))
    return out
