"""The global map on truncated configurations.

A depth-n block determines its image on Delta_{n-r}, so ``apply`` always
returns a block r levels shallower.  Every enumeration here works on numpy
arrays of level-order rows and is charged against the state-space budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import budget as _budget
from .errors import BudgetExceeded, ShapeError, SupportExhausted
from .rulespec import LocalRule
from .treecore import Pattern, all_patterns, graft_indices, neighborhood_indices

CHUNK = 1 << 16


def _check_rule_shape(rule: LocalRule, p: Pattern):
    if p.geometry != rule.geometry or p.alphabet_size != rule.alphabet_size:
        raise ShapeError("pattern and rule disagree on arity or alphabet")


def _weights(rule: LocalRule) -> np.ndarray:
    return rule.alphabet_size ** np.arange(rule.neighborhood_size - 1, -1, -1, dtype=np.int64)


def apply_array(rule: LocalRule, arr: np.ndarray, depth: int | None = None) -> np.ndarray:
    """Apply the rule to every row of ``arr`` (depth-n blocks) -> depth n-r rows."""
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim == 1:
        return apply_array(rule, arr[None, :], depth)[0]
    if depth is None:
        depth = rule.geometry.depth_of_size(arr.shape[1])
    if depth <= rule.radius:
        raise SupportExhausted(f"depth {depth} leaves no cell with a full radius-{rule.radius} neighborhood")
    nbr = neighborhood_indices(rule.arity, depth, rule.radius)
    w = _weights(rule)
    if len(arr) <= CHUNK:
        return rule.lookup[arr[:, nbr] @ w]
    out = np.empty((len(arr), nbr.shape[0]), dtype=np.int64)
    for lo in range(0, len(arr), CHUNK):
        out[lo:lo + CHUNK] = rule.lookup[arr[lo:lo + CHUNK][:, nbr] @ w]
    return out


def apply(rule: LocalRule, p: Pattern) -> Pattern:
    _check_rule_shape(rule, p)
    if p.depth <= rule.radius:
        raise SupportExhausted(f"depth {p.depth} <= radius {rule.radius}")
    out = apply_array(rule, p.array(), p.depth)
    return Pattern(p.geometry, p.alphabet_size, p.depth - rule.radius, tuple(int(a) for a in out))


def iterate(rule: LocalRule, p: Pattern, t: int) -> Pattern:
    if t < 0:
        raise ValueError("t must be >= 0")
    if p.depth <= t * rule.radius:
        raise SupportExhausted(f"depth {p.depth} is exhausted before {t} steps of radius {rule.radius}")
    for _ in range(t):
        p = apply(rule, p)
    return p


def orbit(rule: LocalRule, p: Pattern, t: int) -> list[Pattern]:
    """p, tau(p), ..., tau^t(p) (each r levels shallower than the previous)."""
    if p.depth <= t * rule.radius:
        raise SupportExhausted(f"depth {p.depth} is exhausted before {t} steps of radius {rule.radius}")
    out = [p]
    for _ in range(t):
        out.append(apply(rule, out[-1]))
    return out


# -- trajectories and entropy --------------------------------------------------


@dataclass(frozen=True)
class TrajectoryTuple:
    observation_depth: int
    steps: int
    entries: tuple[Pattern, ...]


@dataclass(frozen=True)
class TrajectoryStats:
    n: int
    t: int
    distinct_count: int
    counts: tuple[int, ...]
    entropy_estimates: tuple[float, ...]

    def lines(self) -> list[str]:
        return [
            f"t={i} count={c} h={h:.6f}"
            for i, (c, h) in enumerate(zip(self.counts, self.entropy_estimates), start=1)
        ]


def trajectory(rule: LocalRule, base: Pattern, n: int, t: int) -> TrajectoryTuple:
    """(tau^i(base)|Delta_n) for i = 0..t-1; base must have depth >= n + (t-1) r."""
    _check_rule_shape(rule, base)
    if t < 1 or n < 1:
        raise ValueError("n and t must be >= 1")
    if base.depth < n + (t - 1) * rule.radius:
        raise SupportExhausted(f"base of depth {base.depth} cannot be observed on Delta_{n} for {t} steps")
    entries = []
    p = base
    for i in range(t):
        entries.append(p.restrict(n))
        if i < t - 1:
            p = apply(rule, p)
    return TrajectoryTuple(n, t, tuple(entries))


def observation_rows(rule: LocalRule, bases: np.ndarray, base_depth: int, n: int, t: int) -> np.ndarray:
    width = rule.geometry.delta_size(n)
    parts = []
    x, depth = bases, base_depth
    for i in range(t):
        parts.append(x[:, :width])
        if i < t - 1:
            x = apply_array(rule, x, depth)
            depth -= rule.radius
    return np.concatenate(parts, axis=1)


def _union_rows(chunks: list[np.ndarray], width: int) -> np.ndarray:
    if not chunks:
        return np.empty((0, width), dtype=np.int64)
    return np.unique(np.concatenate(chunks), axis=0)


def trajectory_rows_from_bases(rule: LocalRule, n: int, t: int, budget: int | None = None) -> np.ndarray:
    """Distinct trajectory rows, by enumerating every base block of depth n + (t-1) r."""
    g, A = rule.geometry, rule.alphabet_size
    base_depth = n + (t - 1) * rule.radius
    size = g.delta_size(base_depth)
    total = A**size
    _budget.require(total, budget, f"trajectory bases of depth {base_depth}")
    width = t * g.delta_size(n)
    found: list[np.ndarray] = []
    for lo in range(0, total, CHUNK):
        bases = all_patterns(A, size, lo, min(lo + CHUNK, total))
        found.append(np.unique(observation_rows(rule, bases, base_depth, n, t), axis=0))
        if len(found) > 32:
            found = [_union_rows(found, width)]
    return _union_rows(found, width)


class _Meter:
    def __init__(self, budget: int | None, what: str):
        self.limit = _budget.resolve(budget)
        self.used = 0
        self.what = what

    def charge(self, amount: int):
        self.used += amount
        if self.used > self.limit:
            raise BudgetExceeded(self.used, self.limit, self.what)


def _extend_columns(rule: LocalRule, top_depth: int, child_cols: np.ndarray, s: int, meter: _Meter) -> np.ndarray:
    """All length-s columns of depth-top_depth blocks, from length s-1 columns of depth-r blocks.

    A column is (tau^i(f)|Delta_top)_{i<s}.  Entry 0 is any block; entry i is
    the image of entry i-1 grafted with entry i-1 of the k^top children's
    depth-r columns.  The subtrees below distinct level-top vertices are
    disjoint, so the child columns vary independently over ``child_cols``.
    """
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    top = all_patterns(A, g.delta_size(top_depth))
    n_children = g.level_size(top_depth)
    shape = (len(top),) + (len(child_cols),) * n_children
    total = math.prod(shape)
    meter.charge(total)
    top_pos, below_pos = graft_indices(g.arity, top_depth, r)
    width = s * g.delta_size(top_depth)
    found: list[np.ndarray] = []
    for lo in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(lo, min(lo + CHUNK, total), dtype=np.int64), shape)
        x = top[idx[0]]
        entries = [x]
        for i in range(1, s):
            big = np.empty((len(x), g.delta_size(top_depth + r)), dtype=np.int64)
            big[:, list(top_pos)] = x
            for u in range(n_children):
                big[:, list(below_pos[u])] = child_cols[idx[1 + u], i - 1, :]
            x = apply_array(rule, big, top_depth + r)
            entries.append(x)
        rows = np.concatenate(entries, axis=1)
        found.append(np.unique(rows, axis=0))
        if len(found) > 32:
            found = [_union_rows(found, width)]
    return _union_rows(found, width).reshape(-1, s, g.delta_size(top_depth))


def trajectory_rows_from_columns(rule: LocalRule, n: int, t: int, budget: int | None = None) -> np.ndarray:
    """Distinct trajectory rows, composed bottom-up from depth-r block columns."""
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    meter = _Meter(budget, f"trajectory columns for n={n}, t={t}")
    if t == 1:
        meter.charge(A ** g.delta_size(n))
        return all_patterns(A, g.delta_size(n))
    cols = all_patterns(A, g.delta_size(r)).reshape(-1, 1, g.delta_size(r))
    for s in range(2, t):
        cols = _extend_columns(rule, r, cols, s, meter)
    return _extend_columns(rule, n, cols, t, meter).reshape(-1, t * g.delta_size(n))


def trajectory_set(rule: LocalRule, n: int, t: int, budget: int | None = None,
                   method: str = "columns") -> TrajectoryStats:
    """|P(tau, n, t')| for t' = 1..t and the estimates log|P| / t' (natural log).

    ``method="bases"`` enumerates all base blocks; ``"columns"`` composes the
    same set from per-subtree columns and reaches much larger t.
    """
    if n < 1 or t < 1:
        raise ValueError("n and t must be >= 1")
    if method == "bases":
        rows = trajectory_rows_from_bases(rule, n, t, budget)
    elif method == "columns":
        rows = trajectory_rows_from_columns(rule, n, t, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    width = rule.geometry.delta_size(n)
    counts = tuple(
        len(rows) if i == t else len(np.unique(rows[:, : i * width], axis=0))
        for i in range(1, t + 1)
    )
    estimates = tuple(math.log(c) / i for i, c in enumerate(counts, start=1))
    return TrajectoryStats(n, t, counts[-1], counts, estimates)


# -- constrained enumeration ---------------------------------------------------


def constrained_search(rule: LocalRule, depth: int, pins: Mapping[int, int] | None = None,
                       image: Mapping[int, int] | None = None, budget: int | None = None) -> np.ndarray:
    """All depth-``depth`` rows g, in ascending key order, with g[i] = pins[i] and
    apply(g)[j] = image[j].

    Cells are assigned one at a time in level order; an image cell is checked
    as soon as the last cell of its neighborhood is assigned, which prunes
    partial rows early.
    """
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    pins = dict(pins or {})
    image = dict(image or {})
    size = g.delta_size(depth)
    if depth <= r and image:
        raise SupportExhausted(f"depth {depth} has no image cells")
    checks: dict[int, list[int]] = {}
    if image:
        nbr = neighborhood_indices(g.arity, depth, r)
        for i in sorted(image):
            if i >= nbr.shape[0]:
                raise ShapeError(f"image cell {i} is outside the depth-{depth - r} image")
            checks.setdefault(int(nbr[i].max()), []).append(i)
        w = _weights(rule)
    meter = _Meter(budget, f"constrained search at depth {depth}")
    frontier = np.zeros((1, size), dtype=np.int64)
    for j in range(size):
        if j in pins:
            frontier[:, j] = pins[j]
        else:
            frontier = np.repeat(frontier, A, axis=0)
            frontier[:, j] = np.tile(np.arange(A, dtype=np.int64), len(frontier) // A)
        meter.charge(len(frontier))
        for i in checks.get(j, ()):
            values = rule.lookup[frontier[:, nbr[i]] @ w]
            frontier = frontier[values == image[i]]
        if not len(frontier):
            break
    return frontier


def preimage_array(rule: LocalRule, q: Pattern, budget: int | None = None) -> np.ndarray:
    _check_rule_shape(rule, q)
    return constrained_search(rule, q.depth + rule.radius, image=dict(enumerate(q.letters)), budget=budget)


def preimage_enumerate(rule: LocalRule, q: Pattern, budget: int | None = None) -> list[Pattern]:
    """Every depth n+r block whose image is q, in ascending key order."""
    rows = preimage_array(rule, q, budget)
    return [Pattern(q.geometry, q.alphabet_size, q.depth + rule.radius, tuple(int(a) for a in row)) for row in rows]


def realizable(rule: LocalRule, p: Pattern, q: Pattern, budget: int | None = None) -> bool:
    """p ->mu q: some configuration extends p and has image extending q.

    Every block extends to a configuration of the full shift, so it is enough
    to find one block g of depth max(n, m + r) with g|Delta_n = p and
    apply(g)|Delta_m = q.
    """
    _check_rule_shape(rule, p)
    _check_rule_shape(rule, q)
    depth = max(p.depth, q.depth + rule.radius)
    rows = constrained_search(rule, depth, pins=dict(enumerate(p.letters)),
                              image=dict(enumerate(q.letters)), budget=budget)
    return len(rows) > 0
