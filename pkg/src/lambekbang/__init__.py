"""Lambek calculus with unit, brackets and a bracket-aware subexponential."""

from importlib.resources import files

from .kernel import BL1, L1BANG, L1BANGW, Derivation, L1Theory, RuleId, System, check_derivation
from .prover import Budget, ProveResult, Status, decide_bnnc, enumerate_derivations, prove, search
from .syntax import Sequent, bfp, check_bnnc, parse_formula, parse_sequent, render

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled data file (corpus, lexicon, grammars)."""
    return files(__name__) / "data" / name


__all__ = [
    "BL1", "L1BANG", "L1BANGW", "L1Theory", "System", "RuleId", "Derivation",
    "check_derivation", "Budget", "ProveResult", "Status", "decide_bnnc", "search",
    "prove", "enumerate_derivations", "Sequent", "parse_sequent", "parse_formula",
    "render", "check_bnnc", "bfp", "data_path",
]
