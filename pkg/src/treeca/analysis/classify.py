"""One row of properties per rule, for scanning a whole rule space."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import BudgetExceeded, InconsistencyError
from ..rulespec import LocalRule
from .closing import extension_property_check, right_closing_min_N
from .diamonds import diamond_search
from .permutivity import is_permutive
from .surjectivity import balance_report, orphan_search


@dataclass(frozen=True)
class Bounds:
    orphan_n_max: int = 3
    balance_levels: int = 2
    diamond_n: int | None = None  # default 2r + 3, the smallest legal size
    right_closing_N_max: int = 3
    extension_N_max: int = 2
    budget: int | None = None

    def diamond_size(self, radius: int) -> int:
        return self.diamond_n if self.diamond_n is not None else 2 * radius + 3


@dataclass(frozen=True)
class ClassificationRow:
    rule: int
    permutive: bool
    orphan_depth: int | None
    balanced_up_to: int | None
    diamond_size: int | None
    right_closing_N: int | None
    extension_property_N: int | None
    incomplete: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.permutive and self.orphan_depth is not None:
            raise InconsistencyError(f"rule {self.rule}: permutive but has an orphan at depth {self.orphan_depth}")
        if self.permutive and self.diamond_size is not None:
            raise InconsistencyError(f"rule {self.rule}: permutive but has a diamond of size {self.diamond_size}")

    @property
    def complete(self) -> bool:
        return not self.incomplete

    def _pairs(self) -> list[tuple[str, str]]:
        def show(x):
            if x is None:
                return "-"
            if isinstance(x, bool):
                return "true" if x else "false"
            return str(x)

        return [
            ("rule", str(self.rule)),
            ("permutive", show(self.permutive)),
            ("orphan_depth", show(self.orphan_depth)),
            ("balanced_up_to", show(self.balanced_up_to)),
            ("diamond_size", show(self.diamond_size)),
            ("right_closing_N", show(self.right_closing_N)),
            ("extension_property_N", show(self.extension_property_N)),
            ("complete", show(self.complete)),
            ("incomplete", ",".join(self.incomplete) or "-"),
        ]

    def record(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self._pairs())

    def text(self) -> str:
        return "  ".join(v.rjust(w) for (_, v), w in zip(self._pairs(), TEXT_WIDTHS))

    @classmethod
    def from_record(cls, line: str) -> "ClassificationRow":
        fields = dict(part.split("=", 1) for part in line.split())

        def opt(name):
            v = fields[name]
            return None if v == "-" else int(v)

        return cls(
            rule=int(fields["rule"]),
            permutive=fields["permutive"] == "true",
            orphan_depth=opt("orphan_depth"),
            balanced_up_to=opt("balanced_up_to"),
            diamond_size=opt("diamond_size"),
            right_closing_N=opt("right_closing_N"),
            extension_property_N=opt("extension_property_N"),
            incomplete=tuple(x for x in fields["incomplete"].split(",") if x != "-"),
        )


TEXT_HEADER = ("rule", "perm", "orphan", "balanced", "diamond", "rc_N", "ext_N", "complete", "incomplete")
TEXT_WIDTHS = (8, 5, 6, 8, 7, 4, 5, 8, 10)


def text_header() -> str:
    return "  ".join(h.rjust(w) for h, w in zip(TEXT_HEADER, TEXT_WIDTHS))


def classify(rule: LocalRule, bounds: Bounds | None = None) -> ClassificationRow:
    """Run every checker on ``rule``; a checker that runs out of budget leaves
    its field empty and is listed in ``incomplete``."""
    b = bounds or Bounds()
    missing = []
    permutive = is_permutive(rule).certified

    orphan_depth = None
    try:
        v = orphan_search(rule, b.orphan_n_max, b.budget)
        if v.refuted:
            orphan_depth = v.bound
    except BudgetExceeded:
        missing.append("orphan")

    balanced_up_to = None
    try:
        balanced_up_to = 0
        for n in range(1, b.balance_levels + 1):
            if not balance_report(rule, n, b.budget).balanced:
                break
            balanced_up_to = n
    except BudgetExceeded:
        missing.append("balance")
        balanced_up_to = None

    diamond_size = None
    try:
        n = b.diamond_size(rule.radius)
        if diamond_search(rule, n, strict=True, budget=b.budget).refuted:
            diamond_size = n
    except BudgetExceeded:
        missing.append("diamond")

    right_closing_N = None
    try:
        v = right_closing_min_N(rule, b.right_closing_N_max, b.budget)
        if v.certified:
            right_closing_N = v.bound
    except BudgetExceeded:
        missing.append("right_closing")

    extension_N = None
    if rule.radius == 1:
        try:
            for N in range(1, b.extension_N_max + 1):
                if extension_property_check(rule, N, b.budget).certified:
                    extension_N = N
                    break
        except BudgetExceeded:
            missing.append("extension")

    return ClassificationRow(
        rule=rule.number,
        permutive=permutive,
        orphan_depth=orphan_depth,
        balanced_up_to=balanced_up_to,
        diamond_size=diamond_size,
        right_closing_N=right_closing_N,
        extension_property_N=extension_N,
        incomplete=tuple(missing),
    )
