"""Orphans (Garden-of-Eden blocks) and preimage-count balance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import budget as _budget
from ..dynamics import CHUNK, apply_array
from ..errors import BudgetExceeded, ShapeError
from ..rulespec import LocalRule
from ..treecore import Pattern, all_patterns, graft_indices, row_keys
from .verdict import Status, Verdict, degenerate


def image_counts(rule: LocalRule, n: int, budget: int | None = None) -> np.ndarray:
    """counts[key(q)] = |mu^{-1}(q)| for every depth-n block q."""
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    if n < 1:
        raise ShapeError("level must be >= 1")
    size = g.delta_size(n + r)
    total = A**size
    _budget.require(total, budget, f"preimage counts at level {n}")
    counts = np.zeros(A ** g.delta_size(n), dtype=np.int64)
    for lo in range(0, total, CHUNK):
        images = apply_array(rule, all_patterns(A, size, lo, min(lo + CHUNK, total)), n + r)
        counts += np.bincount(row_keys(images, A), minlength=len(counts))
    return counts


def image_states(rule: LocalRule, n_max: int, budget: int | None = None):
    """Yield (n, states, images) for n = 1..n_max.

    Row j pairs the top Delta_r block of some depth n+r block g with the
    image of g, and every such pair occurs exactly once.  Level n is built
    from level n-1: the root letter and the children's pairs determine the
    root's neighborhood, hence its image letter and its own top block.  This
    visits far fewer combinations than enumerating all depth n+r blocks.
    """
    g, A, r, k = rule.geometry, rule.alphabet_size, rule.radius, rule.arity
    top = g.delta_size(r)
    limit = _budget.resolve(budget)
    nb = all_patterns(A, g.delta_size(r + 1))
    used = len(nb)
    _budget.require(used, limit, "image states at level 1")
    pairs = np.unique(np.concatenate([nb[:, :top], rule.lookup[row_keys(nb, A)][:, None]], axis=1), axis=0)
    yield 1, pairs[:, :top], pairs[:, top:]
    _, nb_children = graft_indices(k, 1, r)
    for n in range(2, n_max + 1):
        states, images = pairs[:, :top], pairs[:, top:]
        shape = (A,) + (len(pairs),) * k
        total = math.prod(shape)
        used += total
        if used > limit:
            raise BudgetExceeded(used, limit, f"image states at level {n}")
        _, img_children = graft_indices(k, 1, n - 1)
        found = []
        for lo in range(0, total, CHUNK):
            idx = np.unravel_index(np.arange(lo, min(lo + CHUNK, total), dtype=np.int64), shape)
            hood = np.empty((len(idx[0]), g.delta_size(r + 1)), dtype=np.int64)
            image = np.empty((len(idx[0]), g.delta_size(n)), dtype=np.int64)
            hood[:, 0] = idx[0]
            for u in range(k):
                hood[:, list(nb_children[u])] = states[idx[1 + u]]
                image[:, list(img_children[u])] = images[idx[1 + u]]
            image[:, 0] = rule.lookup[row_keys(hood, A)]
            found.append(np.unique(np.concatenate([hood[:, :top], image], axis=1), axis=0))
        pairs = np.unique(np.concatenate(found), axis=0)
        yield n, pairs[:, :top], pairs[:, top:]


def orphan_search(rule: LocalRule, n_max: int, budget: int | None = None) -> Verdict:
    """Refuted(orphan) at the first level n <= n_max with an image-free block,
    otherwise BoundedEvidence(n_max) for surjectivity."""
    if rule.alphabet_size == 1:
        return degenerate(n_max)
    g, A = rule.geometry, rule.alphabet_size
    for n, _, images in image_states(rule, n_max, budget):
        seen = np.zeros(A ** g.delta_size(n), dtype=bool)
        seen[row_keys(images, A)] = True
        if not seen.all():
            q = Pattern.from_key(g, A, n, int(np.argmin(seen)))
            return Verdict(Status.REFUTED, n, (q.to_text(),), {"level": n}, payload=q)
    return Verdict(Status.BOUNDED, n_max)


@dataclass(frozen=True)
class BalanceReport:
    level: int
    expected: int
    min_count: int
    max_count: int
    total: int
    over_witness: Pattern | None = None
    orphan: Pattern | None = None
    under_witness: Pattern | None = None

    @property
    def balanced(self) -> bool:
        return self.min_count == self.max_count == self.expected

    def lines(self) -> list[str]:
        return [
            f"level: {self.level}",
            f"expected: {self.expected}",
            f"min: {self.min_count}",
            f"max: {self.max_count}",
            f"total: {self.total}",
            f"balanced: {'yes' if self.balanced else 'no'}",
            f"over-witness: {self.over_witness if self.over_witness else '-'}",
            f"orphan: {self.orphan if self.orphan else '-'}",
        ]

    def record(self) -> str:
        return (
            f"level={self.level} expected={self.expected} min={self.min_count} max={self.max_count} "
            f"total={self.total} balanced={'true' if self.balanced else 'false'} "
            f"over_witness={self.over_witness or '-'} orphan={self.orphan or '-'}"
        )


def balance_report(rule: LocalRule, n: int, budget: int | None = None) -> BalanceReport:
    """Exact preimage counts of all depth-n blocks against the mean
    |A|^(|Delta_{n+r}| - |Delta_n|)."""
    g, A = rule.geometry, rule.alphabet_size
    counts = image_counts(rule, n, budget)
    expected = A ** (g.delta_size(n + rule.radius) - g.delta_size(n))

    def first(mask) -> Pattern | None:
        hits = np.flatnonzero(mask)
        return Pattern.from_key(g, A, n, int(hits[0])) if len(hits) else None

    return BalanceReport(
        level=n,
        expected=expected,
        min_count=int(counts.min()),
        max_count=int(counts.max()),
        total=int(counts.sum()),
        over_witness=first(counts > expected),
        orphan=first(counts == 0),
        under_witness=first(counts < expected),
    )


def over_mean_block(rule: LocalRule, n_max: int, budget: int | None = None) -> Pattern | None:
    """Smallest over-mean block at the first unbalanced level <= n_max."""
    for n in range(1, n_max + 1):
        report = balance_report(rule, n, budget)
        if report.over_witness is not None:
            return report.over_witness
    return None
