"""Derivations typed in from the linguistic examples, one sequent per line.

Trees are ``(rule, conclusion, *premises)``; rule parameters are recovered
with find_instance, so only the sequents and rule names are transcribed.
Two-premise left rules list the argument premise first.
"""

from lambekbang.kernel import BL1, Derivation, RuleId, find_instance
from lambekbang.syntax import parse_sequent


def build(tree, sys=BL1) -> Derivation:
    rule, text, *prems = tree
    ps = tuple(build(p, sys) for p in prems)
    s = parse_sequent(text)
    inst = find_instance(s, RuleId[rule], [p.conclusion for p in ps], sys)
    if inst is None:
        raise AssertionError(f"no {rule} instance for {text}")
    return Derivation(s, inst, ps)


def ax(text):
    return ("AxId", f"{text} => {text}")


VP = "N\\S"
ADV = "(N\\S)\\(N\\S)"
TV = "(N\\S)/N"
W = "[]-1((N\\S)\\(N\\S))/(N\\S)"

NOUN_PHRASE = (
    "OverL", "N/CN, CN, CN\\CN => N",
    ("UnderL", "CN, CN\\CN => CN", ax("CN"), ax("CN")),
    ax("N"),
)

CLAUSE = ("UnderL", f"N, {VP} => S", ax("N"), ax("S"))

JOHN_LOVES_MARY = ("OverL", f"N, {TV}, N => S", ax("N"), CLAUSE)

MEDIAL = (
    "OverL", f"N/CN, CN, (CN\\CN)/(S/!N), N, {TV}, {ADV} => N",
    ("OverR", f"N, {TV}, {ADV} => S/!N",
     ("PermStar", f"N, {TV}, {ADV}, !N => S",
      ("BangL", f"N, {TV}, !N, {ADV} => S",
       ("OverL", f"N, {TV}, N, {ADV} => S",
        ax("N"),
        ("UnderL", f"N, {VP}, {ADV} => S", ax(VP), CLAUSE))))),
    NOUN_PHRASE,
)

# Top-down through the extraction: the gap inside the island is filled by
# a ContrB copy of !N, and []-1 then consumes the bracket it creates.
_ISLAND = (
    "OverL", f"N, {VP}, [{W}, {VP}] => S",
    ax(VP),
    ("BoxInvL", f"N, {VP}, [[]-1({ADV})] => S",
     ("UnderL", f"N, {VP}, {ADV} => S", ax(VP), CLAUSE)),
)

_GAPS = (
    "BangL", f"N, {TV}, N, [{W}, {TV}, !N] => S",
    ("OverL", f"N, {TV}, N, [{W}, {TV}, N] => S",
     ax("N"),
     ("OverL", f"N, {VP}, [{W}, {TV}, N] => S", ax("N"), _ISLAND)),
)

_COPY = (
    "ContrB", f"N, {TV}, !N, {W}, {TV} => S",
    ("PermStar", f"N, {TV}, !N, [!N, {W}, {TV}] => S",
     ("BangL", f"N, {TV}, !N, [{W}, {TV}, !N] => S", _GAPS)),
)

PARASITIC = (
    "OverL", f"N/CN, CN, (CN\\CN)/(S/!N), N, {TV}, {W}, {TV} => N",
    ("OverR", f"N, {TV}, {W}, {TV} => S/!N",
     ("PermStar", f"N, {TV}, {W}, {TV}, !N => S", _COPY)),
    NOUN_PHRASE,
)
