"""Cellular automata on the full k-ary tree shift."""

from .dynamics import apply, iterate, orbit, trajectory, trajectory_set
from .errors import BudgetExceeded, TreecaError
from .rulespec import LocalRule, builtin, enumerate_rules, parse_rule, rule_from_number, serialize_rule
from .treecore import Pattern, TreeGeometry, parse_pattern

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "LocalRule", "Pattern", "TreeGeometry", "TreecaError", "apply", "builtin",
    "enumerate_rules", "iterate", "orbit", "parse_pattern", "parse_rule", "rule_from_number",
    "serialize_rule", "trajectory", "trajectory_set",
]
