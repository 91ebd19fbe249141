"""Quadratic equations with constraints in the Grigorchuk group."""

from .group import GroupElement, equal, is_trivial, order, psi
from .equations import MixedWord, Variable, parse_equation, parse_equation_file
from .pipeline import SOLVABLE, UNKNOWN, UNSOLVABLE, Decision, SearchBudget, SolvabilityLedger, brute_force, decide

__all__ = [
    "GroupElement", "equal", "is_trivial", "order", "psi",
    "MixedWord", "Variable", "parse_equation", "parse_equation_file",
    "SOLVABLE", "UNKNOWN", "UNSOLVABLE", "Decision", "SearchBudget", "SolvabilityLedger",
    "brute_force", "decide",
]
