"""Three-valued results of the property checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Status(str, Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    BOUNDED = "bounded-evidence"


@dataclass(frozen=True)
class Verdict:
    """Certified: the finite property holds.  Refuted: ``witness`` breaks it.
    BoundedEvidence: no counterexample up to ``bound``; never a proof.
    """

    status: Status
    bound: int | None = None
    witness: tuple[str, ...] = ()
    detail: dict[str, Any] = field(default_factory=dict)
    payload: Any = field(default=None, compare=False, repr=False)

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED

    @property
    def bounded(self) -> bool:
        return self.status is Status.BOUNDED

    def lines(self) -> list[str]:
        out = [f"verdict: {self.status.value}"]
        if self.bound is not None:
            out.append(f"bound: {self.bound}")
        if self.witness:
            out.append(f"witness: {','.join(self.witness)}")
        if self.detail:
            out.append("detail: " + " ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items()))
        return out

    def record(self) -> str:
        parts = [f"verdict={self.status.value}"]
        if self.bound is not None:
            parts.append(f"bound={self.bound}")
        if self.witness:
            parts.append(f"witness={','.join(self.witness)}")
        parts.extend(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return " ".join(parts)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def degenerate(bound: int | None = None, status: Status = Status.BOUNDED) -> Verdict:
    """|A| = 1: one configuration, every property holds trivially."""
    return Verdict(status, bound, detail={"note": "degenerate-alphabet"})
