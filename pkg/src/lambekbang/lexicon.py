"""Categorial-grammar lexicons and sentence parsing by derivability."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .kernel import BL1, Derivation, System
from .prover import Budget, Status, prove
from .syntax import Atom, Bracket, Formula, ParseError, Sequent, parse_formula

DEFAULT_CAP = 256


@dataclass(frozen=True)
class LexEntry:
    formula: Formula
    island: bool = False


@dataclass
class Lexicon:
    entries: dict = field(default_factory=dict)
    sentence_type: Formula = Atom("S")

    def add(self, word: str, formula: Formula, island: bool = False):
        self.entries.setdefault(word, []).append(LexEntry(formula, island))

    def lookup(self, word: str) -> list:
        return self.entries.get(word, [])

    def __contains__(self, word):
        return bool(self.entries.get(word))


class UnknownToken(KeyError):
    pass


def parse_lexicon(text: str) -> Lexicon:
    """Read ``word : formula [island]`` lines; ``#`` starts a comment.

    A ``sentence : F`` header line sets the distinguished type.
    """
    lex = Lexicon()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, sep, rest = line.partition(":")
        word, rest = word.strip(), rest.strip()
        if not sep or not word or not rest:
            raise ParseError(f"line {lineno}: expected 'word : formula'", 0)
        island = False
        if rest.endswith("island") and (rest == "island" or rest[-7].isspace()):
            island, rest = True, rest[: -len("island")].strip()
        try:
            f = parse_formula(rest)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}", 0) from exc
        if word == "sentence" and not island:
            lex.sentence_type = f
        else:
            lex.add(word, f, island)
    return lex


def load_lexicon(path) -> Lexicon:
    return parse_lexicon(Path(path).read_text())


class Verdict(enum.Enum):
    GRAMMATICAL = "Grammatical"
    UNGRAMMATICAL = "Ungrammatical"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ParseJudgment:
    tokens: tuple
    verdict: Verdict
    assignment: tuple = ()
    sequent: Optional[Sequent] = None
    derivation: Optional[Derivation] = field(default=None, repr=False)
    tried: int = 0
    note: str = ""


def tokenize(sentence: str) -> tuple:
    return tuple(sentence.replace(".", " ").replace(",", " ").split())


def _spans(islands: list, n: int) -> Iterator[tuple]:
    """Bracket spans for island words, pairwise nested or disjoint.

    Each island word is wrapped with some following span, or left bare as
    the last option: ContrB builds the island bracket itself when a gap
    inside it is filled by a copied !-formula.
    """
    for ends in itertools.product(*([*range(i + 1, n + 1), None] for i in islands)):
        spans = [(i, e) for i, e in zip(islands, ends) if e is not None]
        if all(
            b2 <= a1 or b1 <= a2 or (a1 <= a2 and b2 <= b1) or (a2 <= a1 and b1 <= b2)
            for (a1, b1), (a2, b2) in itertools.combinations(spans, 2)
        ):
            yield tuple(spans)


def _bracketed(formulas: tuple, spans: tuple) -> tuple:
    def build(lo, hi, inner):
        out, i = [], lo
        while i < hi:
            here = [sp for sp in inner if sp[0] == i]
            if here:
                a, b = max(here, key=lambda sp: sp[1])
                rest = [sp for sp in inner if sp != (a, b)]
                out.append(Bracket(build(a, b, [sp for sp in rest if a <= sp[0] < b])))
                inner = [sp for sp in rest if not (a <= sp[0] < b)]
                i = b
            else:
                out.append(formulas[i])
                i += 1
        return tuple(out)

    return build(0, len(formulas), list(spans))


def candidate_sequents(lex: Lexicon, tokens: tuple, target: Formula) -> Iterator[tuple]:
    """(assignment, sequent) pairs in cartesian order."""
    missing = [t for t in tokens if t not in lex]
    if missing:
        raise UnknownToken(missing[0])
    for choice in itertools.product(*(lex.lookup(t) for t in tokens)):
        fs = tuple(e.formula for e in choice)
        islands = [i for i, e in enumerate(choice) if e.island]
        for spans in _spans(islands, len(tokens)):
            yield fs, Sequent(_bracketed(fs, spans), target)


def parse_sentence(
    lex: Lexicon,
    sentence: str,
    target: Optional[Formula] = None,
    sys: System = BL1,
    budget: Optional[Budget] = None,
    cap: int = DEFAULT_CAP,
    **overrides,
) -> ParseJudgment:
    """First derivable assignment wins; Ungrammatical only if none was cut short.

    ``overrides`` adjust the per-sequent default budget when ``budget`` is None.
    """
    tokens = tokenize(sentence)
    target = target or lex.sentence_type
    unsure, tried = False, 0
    for fs, s in candidate_sequents(lex, tokens, target):
        if tried >= cap:
            return ParseJudgment(tokens, Verdict.UNKNOWN, tried=tried,
                                 note=f"combination cap {cap} reached")
        tried += 1
        b = budget or Budget.for_sequent(s, **overrides)
        _, res = prove(s, sys, b)
        if res.status is Status.DERIVABLE:
            return ParseJudgment(tokens, Verdict.GRAMMATICAL, fs, s, res.derivation, tried)
        unsure = unsure or res.status is Status.EXHAUSTED
    if unsure:
        return ParseJudgment(tokens, Verdict.UNKNOWN, tried=tried, note="search exhausted")
    return ParseJudgment(tokens, Verdict.UNGRAMMATICAL, tried=tried)
