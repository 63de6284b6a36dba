"""Finite refutations of positive expansiveness by pigeonhole."""

from __future__ import annotations

from .. import budget as _budget
from ..dynamics import observation_rows
from ..errors import BudgetExceeded, NoWitnessFound, ShapeError
from ..rulespec import LocalRule
from ..treecore import Pattern, assignments
from .diamonds import _first_collision
from .verdict import Status, Verdict


def pigeonhole_holds(rule: LocalRule, N: int, T: int) -> bool:
    """More base blocks of depth N + T r than Delta_N observations over T+1 steps."""
    g, A = rule.geometry, rule.alphabet_size
    return A ** g.delta_size(N + T * rule.radius) > A ** (g.delta_size(N) * (T + 1))


def expansivity_witness(rule: LocalRule, N: int, T: int, budget: int | None = None) -> tuple[Pattern, Pattern]:
    """Two distinct depth N + T r blocks whose Delta_N observations agree at t = 0..T.

    Bases are searched in ascending key order over growing prefixes: the
    first A^L keys vary only the last L cells.  The smallest L whose prefix
    holds a collision is used, and within it the smallest first block and then
    the smallest second block.
    """
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    if N < 1 or T < 0:
        raise ShapeError("need N >= 1 and T >= 0")
    depth = N + T * r
    size = g.delta_size(depth)
    limit = _budget.resolve(budget)
    used = 0
    for L in range(1, size + 1):
        count = A**L
        used += count
        if used > limit:
            raise BudgetExceeded(used, limit, f"expansivity search over the last {L} cells")
        bases = assignments(A, size, range(size - L, size))
        observed = observation_rows(rule, bases, depth, N, T + 1)
        hit = _first_collision(bases, observed)
        if hit is not None:
            i, j = hit
            return (
                Pattern(g, A, depth, tuple(int(a) for a in bases[i])),
                Pattern(g, A, depth, tuple(int(a) for a in bases[j])),
            )
    raise NoWitnessFound(
        f"every depth-{depth} block has its own Delta_{N} trajectory over {T} steps"
    )


def falsify_expansivity(rule: LocalRule, N: int, T: int, budget: int | None = None) -> Verdict:
    """Refuted (expansiveness with constant N, horizon T) with the witness pair,
    or BoundedEvidence(T) when no two bases of this depth share a trajectory."""
    try:
        f1, f2 = expansivity_witness(rule, N, T, budget)
    except NoWitnessFound:
        return Verdict(Status.BOUNDED, T, detail={"N": N, "pigeonhole": pigeonhole_holds(rule, N, T)})
    return Verdict(Status.REFUTED, T, (f1.to_text(), f2.to_text()),
                   {"N": N, "pigeonhole": pigeonhole_holds(rule, N, T)}, payload=(f1, f2))
