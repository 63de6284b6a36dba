"""Slow reference validators.

Everything here works on dicts keyed by words and replays the definitions
directly.  None of it touches the index tables or the numpy kernels, so it can
be used to re-check the witnesses that the fast searches report.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from .rulespec import LocalRule
from .treecore import Pattern

Word = tuple[int, ...]


def level_words(k: int, n: int) -> list[Word]:
    """Words of length < n, shortest first, lexicographic within a length."""
    out: list[Word] = []
    for length in range(n):
        out.extend(itertools.product(range(k), repeat=length))
    return out


def as_dict(p: Pattern) -> dict[Word, int]:
    return dict(zip(level_words(p.geometry.arity, p.depth), p.letters))


def _depth(k: int, cells: Mapping[Word, int]) -> int:
    return max((len(v) for v in cells), default=-1) + 1


def slow_mu(rule: LocalRule, cells: Mapping[Word, int], v: Word) -> int:
    key = 0
    for u in level_words(rule.arity, rule.radius + 1):
        key = key * rule.alphabet_size + cells[v + u]
    return rule.table[key]


def slow_apply(rule: LocalRule, cells: Mapping[Word, int]) -> dict[Word, int]:
    n = _depth(rule.arity, cells)
    return {v: slow_mu(rule, cells, v) for v in level_words(rule.arity, n - rule.radius)}


def slow_iterate(rule: LocalRule, cells: Mapping[Word, int], t: int) -> dict[Word, int]:
    out = dict(cells)
    for _ in range(t):
        out = slow_apply(rule, out)
    return out


def restrict(cells: Mapping[Word, int], n: int) -> dict[Word, int]:
    return {v: a for v, a in cells.items() if len(v) < n}


def find_preimage(rule: LocalRule, target: Mapping[Word, int],
                  pins: Mapping[Word, int] | None = None) -> dict[Word, int] | None:
    """Depth-first search for a block g with slow_apply(g) = target and g
    agreeing with ``pins``.  Returns the first solution found or None."""
    k, A, r = rule.arity, rule.alphabet_size, rule.radius
    pins = dict(pins or {})
    n = _depth(k, target)
    order = level_words(k, n + r)
    # image cell v becomes checkable once v (k-1)^r, its last neighbor, is set
    ready: dict[Word, list[Word]] = {}
    for v in target:
        ready.setdefault(v + (k - 1,) * r, []).append(v)
    g: dict[Word, int] = {}

    def step(i: int) -> bool:
        if i == len(order):
            return True
        w = order[i]
        letters = [pins[w]] if w in pins else range(A)
        for a in letters:
            g[w] = a
            if all(slow_mu(rule, g, v) == target[v] for v in ready.get(w, ())):
                if step(i + 1):
                    return True
        g.pop(w, None)
        return False

    return dict(g) if step(0) else None


def all_blocks(k: int, A: int, n: int, pins: Mapping[Word, int] | None = None):
    words = level_words(k, n)
    pins = pins or {}
    choices = [[pins[w]] if w in pins else range(A) for w in words]
    for letters in itertools.product(*choices):
        yield dict(zip(words, letters))


# -- witness checks -------------------------------------------------------------


def verify_orphan(rule: LocalRule, q: Pattern) -> bool:
    return find_preimage(rule, as_dict(q)) is None


def verify_permutive_witness(rule: LocalRule, boundary: Pattern | tuple[int, ...]) -> bool:
    """True when a -> mu(a <| boundary) fails to be a bijection."""
    letters = boundary.letters if isinstance(boundary, Pattern) else tuple(boundary)
    words = level_words(rule.arity, rule.radius + 1)[1:]
    cells = dict(zip(words, letters))
    images = set()
    for a in range(rule.alphabet_size):
        cells[()] = a
        images.add(slow_mu(rule, cells, ()))
    return len(images) < rule.alphabet_size


def verify_diamond(rule: LocalRule, boundary: Pattern, first: Pattern, second: Pattern) -> bool:
    k, r = rule.arity, rule.radius
    n = first.depth
    if second.depth != n or boundary.depth != r or n <= r:
        return False
    f, s, p = as_dict(first), as_dict(second), as_dict(boundary)
    if f == s:
        return False
    roots = [()] + list(itertools.product(range(k), repeat=n - r))
    for cells in (f, s):
        for v in roots:
            if any(cells[v + u] != a for u, a in p.items()):
                return False
    return slow_apply(rule, f) == slow_apply(rule, s)


def verify_expansivity_pair(rule: LocalRule, N: int, T: int, first: Pattern, second: Pattern) -> bool:
    f, s = as_dict(first), as_dict(second)
    if f == s or first.depth != second.depth or first.depth < N + T * rule.radius:
        return False
    for _ in range(T + 1):
        if restrict(f, N) != restrict(s, N):
            return False
        if _depth(rule.arity, f) > rule.radius:
            f, s = slow_apply(rule, f), slow_apply(rule, s)
    return True


def verify_right_closing_witness(rule: LocalRule, N: int, p: Pattern, q: Pattern,
                                 g1: Pattern, g2: Pattern) -> bool:
    """g1 and g2 share the top p, map onto q, and differ below Delta_r."""
    r = rule.radius
    depth = r * N + r
    if g1.depth != depth or g2.depth != depth or q.depth != r * N or p.depth != r:
        return False
    a, b, top = as_dict(g1), as_dict(g2), as_dict(p)
    if restrict(a, r) != top or restrict(b, r) != top:
        return False
    target = as_dict(q)
    if slow_apply(rule, a) != target or slow_apply(rule, b) != target:
        return False
    ring = [w for w in level_words(rule.arity, 2 * r) if len(w) >= r]
    return any(a[w] != b[w] for w in ring)


def extension_solutions(rule: LocalRule, a: int, q: Pattern, b: tuple[int, ...]) -> int:
    """Number of child tuples c with a <| c ->mu q <| b (radius 1)."""
    k = rule.arity
    N = q.depth
    target = as_dict(q)
    target.update(zip(itertools.product(range(k), repeat=N), b))
    found = 0
    for c in itertools.product(range(rule.alphabet_size), repeat=k):
        pins = {(): a}
        pins.update({(s,): x for s, x in enumerate(c)})
        if find_preimage(rule, target, pins) is not None:
            found += 1
    return found


def verify_extension_witness(rule: LocalRule, a: int, q: Pattern, b: tuple[int, ...]) -> bool:
    """True when a ->mu q holds and the tuple b leaves other than one choice."""
    if find_preimage(rule, as_dict(q), {(): a}) is None:
        return False
    return extension_solutions(rule, a, q, b) != 1


def verify_openness_witness(rule: LocalRule, a: int, q: Pattern, q_prime: Pattern) -> bool:
    """q extends to q', q is an image of a block with root a, q' is an image of
    some block but of none with root a."""
    small, big = as_dict(q), as_dict(q_prime)
    if restrict(big, q.depth) != small:
        return False
    if find_preimage(rule, small, {(): a}) is None:
        return False
    if find_preimage(rule, big) is None:
        return False
    return find_preimage(rule, big, {(): a}) is None
