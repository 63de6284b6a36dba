"""Permutivity and the backward-fill preimage construction."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..dynamics import apply
from ..errors import InconsistencyError, ShapeError, UnsupportedRule
from ..rulespec import LocalRule
from ..treecore import Pattern, format_letters, neighborhood_indices, parse_letters
from .verdict import Status, Verdict


def _columns(rule: LocalRule) -> np.ndarray:
    # row a, column b: mu(a <| b) where b is the key of the non-root neighborhood cells
    return rule.lookup.reshape(rule.alphabet_size, -1)


def _boundary_letters(rule: LocalRule, key: int) -> tuple[int, ...]:
    digits = []
    for _ in range(rule.neighborhood_size - 1):
        key, a = divmod(key, rule.alphabet_size)
        digits.append(a)
    return tuple(reversed(digits))


def is_permutive(rule: LocalRule) -> Verdict:
    """Certified iff a -> mu(a <| b) is a bijection of A for every boundary b.

    A refutation carries the smallest failing boundary (level order, root
    omitted).
    """
    A = rule.alphabet_size
    cols = _columns(rule)
    ok = (np.sort(cols, axis=0) == np.arange(A)[:, None]).all(axis=0)
    if ok.all():
        return Verdict(Status.CERTIFIED, rule.radius)
    b = int(np.argmin(ok))
    boundary = format_letters(_boundary_letters(rule, b), A)
    images = format_letters(cols[:, b], A)
    return Verdict(Status.REFUTED, rule.radius, (boundary,), {"images": images})


def permutation_inverse(rule: LocalRule) -> np.ndarray:
    """inv[b, x] = the unique a with mu(a <| b) = x."""
    cols = _columns(rule)
    A = rule.alphabet_size
    if not (np.sort(cols, axis=0) == np.arange(A)[:, None]).all():
        raise UnsupportedRule("rule is not permutive")
    inv = np.empty((cols.shape[1], A), dtype=np.int64)
    inv[np.arange(cols.shape[1])[:, None], cols.T] = np.arange(A)[None, :]
    return inv


def permutive_preimage_build(rule: LocalRule, target: Pattern, filler: Sequence[int] | str) -> Pattern:
    """The unique g of depth n+r with apply(g) = target and the given letters on
    levels n..n+r-1 (level order), solved from level n-1 up to the root."""
    g_, A, r = rule.geometry, rule.alphabet_size, rule.radius
    if target.geometry != g_ or target.alphabet_size != A:
        raise ShapeError("target and rule disagree on arity or alphabet")
    inv = permutation_inverse(rule)
    n = target.depth
    if isinstance(filler, str):
        filler = parse_letters(filler, A)
    filler = [int(a) for a in filler]
    width = g_.delta_size(n + r) - g_.delta_size(n)
    if len(filler) != width:
        raise ShapeError(f"filler needs {width} letters for levels {n}..{n + r - 1}, got {len(filler)}")
    if any(not 0 <= a < A for a in filler):
        raise ShapeError("filler letter outside the alphabet")
    g = np.zeros(g_.delta_size(n + r), dtype=np.int64)
    g[g_.delta_size(n):] = filler
    nbr = neighborhood_indices(g_.arity, n + r, r)
    weights = A ** np.arange(rule.neighborhood_size - 2, -1, -1, dtype=np.int64)
    for i in range(g_.delta_size(n) - 1, -1, -1):
        b = int(g[nbr[i][1:]] @ weights)
        g[i] = inv[b, target.letters[i]]
    out = Pattern(g_, A, n + r, tuple(int(a) for a in g))
    if apply(rule, out) != target:
        raise InconsistencyError("backward fill did not reproduce the target")
    return out
