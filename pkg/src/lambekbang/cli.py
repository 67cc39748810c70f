"""Command-line front end.

Exit codes: 0 success / derivable, 1 not derivable or check failure,
2 exhausted or unknown, 64 usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cutelim import CutEliminationError, MalformedInput, eliminate_cuts
from .kernel import (
    BL1,
    L1BANG,
    L1BANGW,
    Derivation,
    DerivationError,
    L1Theory,
    check_derivation,
)
from .lexicon import DEFAULT_CAP, UnknownToken, load_lexicon, parse_sentence, Verdict
from .prover import Budget, Status, prove
from .syntax import ParseError, bfp, check_bnnc, parse_formula, parse_sequent, render
from .thue import Answer, derives, encode, load_grammar

EX_OK, EX_NO, EX_EXHAUSTED, EX_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _read(arg: str) -> str:
    if arg == "-":
        return sys.stdin.read()
    try:
        return Path(arg).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None


def load_theory(path: str) -> list:
    out = []
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            try:
                out.append(parse_sequent(line))
            except ParseError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
    return out


def system_from_args(args):
    name = args.system
    if name == "theory":
        if not args.theory_file:
            raise UsageError("--system theory needs --theory-file")
        try:
            return L1Theory(load_theory(args.theory_file))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.theory_file:
        raise UsageError("--theory-file only applies to --system theory")
    return {"bl1": BL1, "l1bang": L1BANG, "l1bangw": L1BANGW}[name]


def budget_from_args(args, s) -> Budget:
    return Budget.for_sequent(
        s,
        max_rule_apps=args.budget,
        max_antecedent_items=args.max_items,
        time_limit=args.time_limit,
    )


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load_derivation(path: str) -> Derivation:
    try:
        return Derivation.from_json(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read derivation: {exc}") from None


# ---------------------------------------------------------------- commands

def cmd_prove(args) -> int:
    s = parse_sequent(args.sequent)
    sysm = system_from_args(args)
    route, res = prove(s, sysm, budget_from_args(args, s))
    payload = {"sequent": render(s), "system": str(sysm), "route": route,
               "status": res.status.value, "reason": res.reason}
    text = f"route: {route}\n{res}"
    if res.derivation is not None:
        payload["derivation"] = res.derivation.to_dict()
        text += "\n" + res.derivation.render_tree()
    _emit(args, payload, text)
    return {Status.DERIVABLE: EX_OK, Status.NOT_DERIVABLE: EX_NO}.get(res.status, EX_EXHAUSTED)


def cmd_parse(args) -> int:
    try:
        lex = load_lexicon(args.lexicon)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    target = parse_formula(args.target) if args.target else None
    sysm = system_from_args(args)
    try:
        j = parse_sentence(lex, args.sentence, target, sysm, cap=args.cap,
                           max_rule_apps=args.budget, max_antecedent_items=args.max_items,
                           time_limit=args.time_limit)
    except UnknownToken as exc:
        raise UsageError(f"unknown token {exc.args[0]!r}") from None
    payload = {"tokens": list(j.tokens), "verdict": j.verdict.value, "tried": j.tried,
               "note": j.note}
    text = f"{j.verdict.value} ({j.tried} assignment(s) tried)"
    if j.note:
        text += f": {j.note}"
    if j.sequent is not None:
        payload["sequent"] = render(j.sequent)
        payload["derivation"] = j.derivation.to_dict()
        text += f"\n{render(j.sequent)}\n{j.derivation.render_tree()}"
    _emit(args, payload, text)
    return {Verdict.GRAMMATICAL: EX_OK, Verdict.UNGRAMMATICAL: EX_NO}.get(j.verdict, EX_EXHAUSTED)


def _formula_at(s, occ):
    if occ.side == "succ":
        f = s.succedent
    else:
        items = s.antecedent
        for i in occ.config:
            f = items[i]
            items = getattr(f, "items", ())
    for i in occ.formula:
        f = f.children()[i]
    return f


def cmd_bnnc(args) -> int:
    s = parse_sequent(args.sequent)
    v = check_bnnc(s)
    viol = [[str(a), str(b)] for a, b in v.violations]
    text = "BNNC holds" if v.ok else "BNNC violated:\n" + "\n".join(
        f"  {render(_formula_at(s, a))} at {a} contains {render(_formula_at(s, b))} at {b}"
        for a, b in v.violations)
    _emit(args, {"sequent": render(s), "bnnc": v.ok, "violations": viol}, text)
    return EX_OK if v.ok else EX_NO


def cmd_bfp(args) -> int:
    s = parse_sequent(args.sequent)
    out = render(bfp(s))
    _emit(args, {"sequent": render(s), "bfp": out}, out)
    return EX_OK


def cmd_encode(args) -> int:
    g = _grammar(args.grammar)
    e = encode(g)
    payload = {k: [render(x) for x in getattr(e, k)]
               for k in ("B_list", "Gamma", "Phi", "GammaTilde", "PhiTilde", "theory")}
    _emit(args, payload, e.render())
    return EX_OK


def _grammar(path):
    try:
        return load_grammar(path)
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _word(g, text: str) -> tuple:
    parts = text.split()
    symbols = set(g.terminals) | set(g.nonterminals)
    if len(parts) == 1 and parts[0] not in symbols:
        parts = list(parts[0])
    return tuple(parts)


def cmd_rewrite(args) -> int:
    g = _grammar(args.grammar)
    w = _word(g, args.word)
    try:
        r = derives(g, w, max_len=args.max_len)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {"word": list(w), "answer": r.answer.value, "max_len": r.max_len,
               "explored": r.explored}
    text = str(r)
    if r.trace is not None:
        payload["steps"] = [list(x) for x in r.trace.steps]
        text += "\n" + "\n".join(" ".join(x) or "(empty)" for x in r.trace.replay(g))
    _emit(args, payload, text)
    return {Answer.YES: EX_OK, Answer.NO: EX_NO}.get(r.answer, EX_EXHAUSTED)


def cmd_check(args) -> int:
    d = _load_derivation(args.derivation)
    sysm = system_from_args(args)
    try:
        check_derivation(d, sysm, allow_cut=args.allow_cut)
    except DerivationError as exc:
        _emit(args, {"valid": False, "path": list(exc.path), "reason": exc.reason},
              f"invalid {exc}")
        return EX_NO
    _emit(args, {"valid": True, "conclusion": render(d.conclusion), "size": d.size},
          f"valid: {render(d.conclusion)} ({d.size} nodes)")
    return EX_OK


def cmd_elimcut(args) -> int:
    d = _load_derivation(args.derivation)
    sysm = system_from_args(args)
    try:
        out = eliminate_cuts(d, sysm)
    except MalformedInput as exc:
        raise UsageError(str(exc)) from None
    except CutEliminationError as exc:
        print(f"cut elimination failed: {exc}", file=sys.stderr)
        return EX_NO
    text = out.to_json(indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EX_OK


# ----------------------------------------------------------------- parsing

def _common(p, system=True):
    if system:
        p.add_argument("--system", choices=("bl1", "l1bang", "l1bangw", "theory"), default="bl1")
        p.add_argument("--theory-file", help="one axiom sequent per line")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def _budget_flags(p):
    p.add_argument("--budget", type=int, help="max rule applications")
    p.add_argument("--max-items", type=int, help="max antecedent items in premises")
    p.add_argument("--time-limit", type=float, help="seconds")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lambekbang", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prove", help="prove a sequent")
    p.add_argument("sequent")
    _common(p)
    _budget_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("parse", help="parse a sentence with a lexicon")
    p.add_argument("lexicon")
    p.add_argument("sentence")
    p.add_argument("--target", help="goal type (default: the lexicon's sentence type)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max assignment combinations")
    _common(p)
    _budget_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("bnnc", help="check the bracket non-negative condition")
    p.add_argument("sequent")
    _common(p, system=False)
    p.set_defaults(func=cmd_bnnc)

    p = sub.add_parser("bfp", help="bracket-forgetting projection")
    p.add_argument("sequent")
    _common(p, system=False)
    p.set_defaults(func=cmd_bfp)

    p = sub.add_parser("encode", help="encode a semi-Thue grammar")
    p.add_argument("grammar")
    _common(p, system=False)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("rewrite", help="search start =>* word in a grammar")
    p.add_argument("grammar")
    p.add_argument("word", help="symbols separated by spaces, or one-letter symbols run together")
    p.add_argument("--max-len", type=int)
    _common(p, system=False)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("check", help="validate a JSON derivation")
    p.add_argument("derivation", help="file, or - for stdin")
    p.add_argument("--allow-cut", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("elim-cut", help="eliminate cuts from a JSON derivation")
    p.add_argument("derivation", help="file, or - for stdin")
    p.add_argument("-o", "--output")
    _common(p)
    p.set_defaults(func=cmd_elimcut)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
