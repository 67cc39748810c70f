"""Formulae, bracketed configurations and sequents.

Text syntax (ASCII)::

    formula  := div
    div      := prod [('\\' | '/') prod]       # non-associative
    prod     := prefix ['*' prod]              # right-nested
    prefix   := '!' prefix | '<>' prefix | '[]-1' prefix
              | ATOM | '1' | '(' formula ')'
    config   := '/\\' | [item (',' item)*]
    item     := '[' config ']' | formula
    sequent  := config '=>' formula
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union


class Formula:
    """Base class of the object language."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()


def _hashed(cls):
    # Formula trees are used heavily as memo keys; cache the hash once.
    name = cls.__name__

    def __hash__(self):
        h = self._h
        if h is None:
            h = hash((name,) + self._key())
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_hashed
@dataclass(frozen=True, eq=True)
class Atom(Formula):
    name: str
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.name,)


@_hashed
@dataclass(frozen=True, eq=True)
class Unit(Formula):
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return ()


@_hashed
@dataclass(frozen=True, eq=True)
class Under(Formula):
    """``left \\ right``: needs ``left`` on the left to yield ``right``."""

    left: Formula
    right: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)


@_hashed
@dataclass(frozen=True, eq=True)
class Over(Formula):
    """``left / right``: needs ``right`` on the right to yield ``left``."""

    left: Formula
    right: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)


@_hashed
@dataclass(frozen=True, eq=True)
class Prod(Formula):
    left: Formula
    right: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)


@_hashed
@dataclass(frozen=True, eq=True)
class Diamond(Formula):
    body: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.body,)

    def children(self):
        return (self.body,)


@_hashed
@dataclass(frozen=True, eq=True)
class BoxInv(Formula):
    body: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.body,)

    def children(self):
        return (self.body,)


@_hashed
@dataclass(frozen=True, eq=True)
class Bang(Formula):
    body: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.body,)

    def children(self):
        return (self.body,)


UNIT = Unit()


@_hashed
@dataclass(frozen=True, eq=True)
class Bracket:
    """A bracket node grouping a contiguous run of configuration items."""

    items: tuple
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return self.items


Item = Union[Formula, Bracket]
Config = tuple  # tuple[Item, ...]; the empty tuple is the empty configuration


@_hashed
@dataclass(frozen=True, eq=True)
class Sequent:
    antecedent: tuple
    succedent: Formula
    _h: int = field(init=False, repr=False, compare=False, default=None)

    def _key(self):
        return (self.antecedent, self.succedent)

    def __str__(self):
        return render(self)


def is_bang(item) -> bool:
    return isinstance(item, Bang)


def prod_of(formulas) -> Formula:
    """Right-nested product ``f1*(f2*(...))`` of a nonempty sequence."""
    formulas = list(formulas)
    if not formulas:
        raise ValueError("empty product")
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = Prod(f, out)
    return out


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected=()):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at position {position}{exp}")


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>=>)|(?P<lam>/\\)|(?P<boxinv>\[\]-1)|(?P<diamond><>)"
    r"|(?P<atom>[A-Za-z][A-Za-z0-9_]*)|(?P<unit>1)|(?P<op>[\\/*!(),\[\]]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "op":
            kind = value
        toks.append((kind, value, start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


_FORMULA_START = ("atom", "unit", "(", "!", "diamond", "boxinv")


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, *kinds):
        tok = self.toks[self.i]
        if tok[0] not in kinds:
            raise ParseError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], kinds)
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.prod()
        kind = self.peek()[0]
        if kind in ("\\", "/"):
            self.i += 1
            right = self.prod()
            nxt = self.peek()
            if nxt[0] in ("\\", "/"):
                raise ParseError("'\\' and '/' are non-associative; add parentheses", nxt[2])
            return Under(left, right) if kind == "\\" else Over(left, right)
        return left

    def prod(self) -> Formula:
        left = self.prefix()
        if self.peek()[0] == "*":
            self.i += 1
            return Prod(left, self.prod())
        return left

    def prefix(self) -> Formula:
        kind, value, pos = self.take(*_FORMULA_START)
        if kind == "!":
            return Bang(self.prefix())
        if kind == "diamond":
            return Diamond(self.prefix())
        if kind == "boxinv":
            return BoxInv(self.prefix())
        if kind == "atom":
            return Atom(value)
        if kind == "unit":
            return UNIT
        f = self.formula()
        self.take(")")
        return f

    def config(self, closer: str) -> tuple:
        if self.peek()[0] == "lam":
            self.i += 1
            return ()
        if self.peek()[0] == closer:
            return ()
        items = [self.item()]
        while self.peek()[0] == ",":
            self.i += 1
            items.append(self.item())
        return tuple(items)

    def item(self):
        if self.peek()[0] == "[":
            self.i += 1
            inner = self.config("]")
            self.take("]")
            return Bracket(inner)
        return self.formula()

    def end(self):
        self.take("eof")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.end()
    return f


def parse_config(text: str) -> tuple:
    p = _Parser(text)
    c = p.config("eof")
    p.end()
    return c


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    ante = p.config("arrow")
    tok = p.peek()
    if tok[0] != "arrow":
        raise ParseError("missing '=>'", tok[2], ("=>", ","))
    p.i += 1
    succ = p.formula()
    tok = p.peek()
    if tok[0] == "arrow":
        raise ParseError("stray '=>'", tok[2])
    p.end()
    return Sequent(ante, succ)


# -------------------------------------------------------------- rendering

_DIV, _PROD, _PREFIX = 0, 1, 2


def _level(f: Formula) -> int:
    if isinstance(f, (Under, Over)):
        return _DIV
    if isinstance(f, Prod):
        return _PROD
    return _PREFIX


def render_formula(f: Formula, ctx: int = _DIV) -> str:
    if isinstance(f, Atom):
        s = f.name
    elif isinstance(f, Unit):
        s = "1"
    elif isinstance(f, Bang):
        s = "!" + render_formula(f.body, _PREFIX)
    elif isinstance(f, Diamond):
        s = "<>" + render_formula(f.body, _PREFIX)
    elif isinstance(f, BoxInv):
        s = "[]-1" + render_formula(f.body, _PREFIX)
    elif isinstance(f, Prod):
        s = render_formula(f.left, _PREFIX) + "*" + render_formula(f.right, _PROD)
    elif isinstance(f, Under):
        s = render_formula(f.left, _PROD) + "\\" + render_formula(f.right, _PROD)
    elif isinstance(f, Over):
        s = render_formula(f.left, _PROD) + "/" + render_formula(f.right, _PROD)
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if _level(f) < ctx else s


def render_config(c) -> str:
    parts = []
    for item in c:
        if isinstance(item, Bracket):
            parts.append("[" + render_config(item.items) + "]")
        else:
            parts.append(render_formula(item))
    return ", ".join(parts)


def render(x) -> str:
    """Render a formula, configuration, sequent or derivation as text."""
    if isinstance(x, Formula):
        return render_formula(x)
    if isinstance(x, Sequent):
        ante = render_config(x.antecedent)
        return (ante + " => " if ante else "=> ") + render_formula(x.succedent)
    if isinstance(x, tuple):
        return render_config(x)
    if isinstance(x, Bracket):
        return render_config((x,))
    render_tree = getattr(x, "render_tree", None)
    if render_tree is not None:
        return render_tree()
    raise TypeError(f"cannot render {type(x).__name__}")


# ---------------------------------------------------------------- measures

def formula_size(f: Formula) -> int:
    return 1 + sum(formula_size(c) for c in f.children())


def config_size(c) -> int:
    total = 0
    for item in c:
        if isinstance(item, Bracket):
            total += 1 + config_size(item.items)
        else:
            total += formula_size(item)
    return total


def sequent_size(s: Sequent) -> int:
    """Atom, unit and connective nodes of all formulae, plus bracket nodes."""
    return config_size(s.antecedent) + formula_size(s.succedent)


def leaf_count(c) -> int:
    return sum(leaf_count(i.items) if isinstance(i, Bracket) else 1 for i in c)


def bracket_count(c) -> int:
    return sum(1 + bracket_count(i.items) for i in c if isinstance(i, Bracket))


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in f.children():
        yield from subformulas(c)


def config_formulas(c) -> Iterator[Formula]:
    for item in c:
        if isinstance(item, Bracket):
            yield from config_formulas(item.items)
        else:
            yield item


def sequent_subformulas(s: Sequent) -> set:
    out = set(subformulas(s.succedent))
    for f in config_formulas(s.antecedent):
        out.update(subformulas(f))
    return out


# ---------------------------------------------------------------- polarity

class Polarity(enum.Enum):
    POSITIVE = "+"
    NEGATIVE = "-"

    def flip(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


@dataclass(frozen=True)
class OccPath:
    """Position of a formula occurrence in a sequent.

    ``config`` descends through bracket nodes and ends with the index of the
    formula leaf (empty for the succedent); ``formula`` descends through
    formula children (0 = left/body, 1 = right).
    """

    side: str  # "ante" or "succ"
    config: tuple = ()
    formula: tuple = ()

    def __str__(self):
        return f"{self.side}:{'.'.join(map(str, self.config))}/{'.'.join(map(str, self.formula))}"


def _child_polarities(f: Formula, pol: Polarity):
    if isinstance(f, Under):
        return ((f.left, pol.flip()), (f.right, pol))
    if isinstance(f, Over):
        return ((f.left, pol), (f.right, pol.flip()))
    return tuple((c, pol) for c in f.children())


def _walk(f: Formula, pol: Polarity, path: tuple):
    yield path, f, pol
    for i, (c, cp) in enumerate(_child_polarities(f, pol)):
        yield from _walk(c, cp, path + (i,))


def _leaf_paths(c, prefix=()):
    for i, item in enumerate(c):
        if isinstance(item, Bracket):
            yield from _leaf_paths(item.items, prefix + (i,))
        else:
            yield prefix + (i,), item


def polarity_occurrences(s: Sequent) -> list:
    """Every subformula occurrence of ``s`` with its polarity in the sequent."""
    out = []
    for cpath, f in _leaf_paths(s.antecedent):
        for fpath, sub, pol in _walk(f, Polarity.NEGATIVE, ()):
            out.append((OccPath("ante", cpath, fpath), sub, pol))
    for fpath, sub, pol in _walk(s.succedent, Polarity.POSITIVE, ()):
        out.append((OccPath("succ", (), fpath), sub, pol))
    return out


@dataclass(frozen=True)
class Verdict:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _bnnc_violations(f: Formula, pol: Polarity, cpath, side, fpath):
    out = []
    for path, sub, p in _walk(f, pol, fpath):
        if isinstance(sub, Bang) and p is Polarity.NEGATIVE:
            for ipath, inner, ip in _walk(sub.body, p, path + (0,)):
                if (isinstance(inner, BoxInv) and ip is Polarity.NEGATIVE) or (
                    isinstance(inner, Diamond) and ip is Polarity.POSITIVE
                ):
                    out.append((OccPath(side, cpath, path), OccPath(side, cpath, ipath)))
    return out


def check_bnnc(s: Sequent) -> Verdict:
    """Bracket non-negative condition.

    A negative ``!A`` may not contain a []-1 occurrence that is negative in the
    sequent, nor a <> occurrence that is positive in the sequent.
    """
    out = []
    for cpath, f in _leaf_paths(s.antecedent):
        out.extend(_bnnc_violations(f, Polarity.NEGATIVE, cpath, "ante", ()))
    out.extend(_bnnc_violations(s.succedent, Polarity.POSITIVE, (), "succ", ()))
    return Verdict(tuple(out))


def bracket_destroyers(s: Sequent) -> int:
    """Count negative []-1 and positive <> occurrences.

    Each bracket in a derivable BNNC sequent is eventually removed (reading
    bottom-up) by one of these occurrences, and distinct brackets use
    distinct occurrences, so ``bracket_count <= bracket_destroyers`` is a
    necessary condition for derivability of BNNC sequents.
    """
    n = 0
    for _, f, pol in polarity_occurrences(s):
        if isinstance(f, BoxInv) and pol is Polarity.NEGATIVE:
            n += 1
        elif isinstance(f, Diamond) and pol is Polarity.POSITIVE:
            n += 1
    return n


# --------------------------------------------------------------------- BFP

def bfp(x):
    """Bracket-forgetting projection of a formula, configuration or sequent."""
    if isinstance(x, Sequent):
        return Sequent(bfp(x.antecedent), bfp(x.succedent))
    if isinstance(x, tuple):
        out = []
        for item in x:
            if isinstance(item, Bracket):
                out.extend(bfp(item.items))
            else:
                out.append(bfp(item))
        return tuple(out)
    if isinstance(x, Bracket):
        return bfp(x.items)
    if isinstance(x, (Diamond, BoxInv)):
        return bfp(x.body)
    if isinstance(x, (Atom, Unit)):
        return x
    if isinstance(x, Bang):
        return Bang(bfp(x.body))
    if isinstance(x, (Under, Over, Prod)):
        return type(x)(bfp(x.left), bfp(x.right))
    raise TypeError(f"cannot project {type(x).__name__}")


def has_bracket_modality(x) -> bool:
    if isinstance(x, Sequent):
        return has_bracket_modality(x.succedent) or any(
            has_bracket_modality(f) for f in config_formulas(x.antecedent)
        )
    return any(isinstance(f, (Diamond, BoxInv)) for f in subformulas(x))


def is_bracket_free(s: Sequent) -> bool:
    return bracket_count(s.antecedent) == 0 and not has_bracket_modality(s)
