"""Property checkers, witness searches and preimage builders."""

from .classify import Bounds, ClassificationRow, classify
from .closing import (
    closing_preimage_build,
    extension_property_check,
    non_openness_evidence,
    right_closing_at,
    right_closing_min_N,
)
from .diamonds import Diamond, check_diamond, diamond_search, myhill_collision_search
from .expansivity import expansivity_witness, falsify_expansivity, pigeonhole_holds
from .permutivity import is_permutive, permutive_preimage_build
from .surjectivity import BalanceReport, balance_report, image_counts, orphan_search, over_mean_block
from .verdict import Status, Verdict

__all__ = [
    "BalanceReport", "Bounds", "ClassificationRow", "Diamond", "Status", "Verdict",
    "balance_report", "check_diamond", "classify", "closing_preimage_build", "diamond_search",
    "expansivity_witness", "extension_property_check", "falsify_expansivity", "image_counts",
    "is_permutive", "myhill_collision_search", "non_openness_evidence", "orphan_search",
    "over_mean_block", "permutive_preimage_build", "pigeonhole_holds", "right_closing_at",
    "right_closing_min_N",
]
