"""Right-closingness, the radius-1 extension property and openness evidence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import budget as _budget
from ..dynamics import CHUNK, apply, apply_array, constrained_search
from ..errors import InconsistencyError, PreconditionError, ShapeError, UnsupportedRule
from ..rulespec import LocalRule
from ..treecore import Pattern, all_patterns, format_letters, row_keys, subtree
from .verdict import Status, Verdict


def _rows(rule: LocalRule, depth: int, budget: int | None, what: str):
    g, A = rule.geometry, rule.alphabet_size
    size = g.delta_size(depth)
    total = A**size
    _budget.require(total, budget, what)
    for lo in range(0, total, CHUNK):
        yield all_patterns(A, size, lo, min(lo + CHUNK, total))


def right_closing_at(rule: LocalRule, N: int, budget: int | None = None) -> Verdict:
    """Certified iff every (p, q) with p in A^(Delta_r), q in A^(Delta_rN) and
    p ->mu q admits exactly one filling of Delta_2r minus Delta_r.

    The observation window is Delta_{rN}; every depth rN + r block is
    enumerated and grouped by (p, image).  A refutation carries the smallest
    failing (p, q) and its two smallest extensions with different children.
    """
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    if N < 1:
        raise ShapeError("N must be >= 1")
    depth = r * N + r
    top, mid = g.delta_size(r), g.delta_size(2 * r)
    found = []
    for rows in _rows(rule, depth, budget, f"right-closing enumeration at N={N}"):
        images = apply_array(rule, rows, depth)
        found.append(np.unique(np.concatenate([rows[:, :top], images, rows[:, top:mid]], axis=1), axis=0))
    triples = np.unique(np.concatenate(found), axis=0)
    width_pq = top + images.shape[1]
    pq, counts = np.unique(triples[:, :width_pq], axis=0, return_counts=True)
    bad = np.flatnonzero(counts > 1)
    if not len(bad):
        return Verdict(Status.CERTIFIED, N)
    p_row, q_row = pq[bad[0], :top], pq[bad[0], top:]
    sols = constrained_search(rule, depth, pins=dict(enumerate(int(a) for a in p_row)),
                              image=dict(enumerate(int(a) for a in q_row)), budget=budget)
    g1 = sols[0]
    g2 = next(s for s in sols if not np.array_equal(s[top:mid], g1[top:mid]))
    texts = tuple(format_letters(x, A) for x in (p_row, q_row, g1, g2))
    return Verdict(Status.REFUTED, N, texts, {"extensions": int(counts[bad[0]])})


def right_closing_min_N(rule: LocalRule, N_max: int, budget: int | None = None) -> Verdict:
    """Smallest N <= N_max at which ``right_closing_at`` certifies.

    Failing every N <= N_max is only evidence against right-closingness.
    """
    last = None
    for N in range(1, N_max + 1):
        last = right_closing_at(rule, N, budget)
        if last.certified:
            return Verdict(Status.CERTIFIED, N, detail={"min_N": N})
    return Verdict(Status.BOUNDED, N_max, last.witness if last else (), {"min_N": None})


@dataclass(frozen=True)
class _ExtensionTable:
    """reach[a, c, q'] for depth N+1 images q' of blocks a <| c <| ..."""

    N: int
    reach: np.ndarray  # bool, shape (A, A**k, A**|Delta_{N+1}|)

    def counts(self) -> np.ndarray:
        return self.reach.sum(axis=1)


def _extension_table(rule: LocalRule, N: int, budget: int | None) -> _ExtensionTable:
    g, A, k = rule.geometry, rule.alphabet_size, rule.arity
    if rule.radius != 1:
        raise UnsupportedRule("the extension property is only defined for radius 1")
    if N < 1:
        raise ShapeError("N must be >= 1")
    depth = N + 2
    reach = np.zeros((A, A**k, A ** g.delta_size(N + 1)), dtype=bool)
    for rows in _rows(rule, depth, budget, f"extension enumeration at N={N}"):
        images = apply_array(rule, rows, depth)
        reach[rows[:, 0], row_keys(rows[:, 1:1 + k], A), row_keys(images, A)] = True
    return _ExtensionTable(N, reach)


def extension_property_check(rule: LocalRule, N: int, budget: int | None = None) -> Verdict:
    """Radius 1 only.  Certified iff for every a ->mu q (q of depth N) and every
    tuple b in A^(k^N), exactly one child tuple c has a <| c ->mu q <| b.

    A refutation carries the smallest failing (a, q, b) and its solution count.
    """
    g, A, k = rule.geometry, rule.alphabet_size, rule.arity
    table = _extension_table(rule, N, budget)
    counts = table.counts().reshape(A, A ** g.delta_size(N), A ** (k**N))
    realizable = (counts > 0).any(axis=2)
    bad = realizable[:, :, None] & (counts != 1)
    if not bad.any():
        return Verdict(Status.CERTIFIED, N)
    a, q_key, b_key = (int(x) for x in np.argwhere(bad)[0])
    q = Pattern.from_key(g, A, N, q_key)
    solutions = int(counts[a, q_key, b_key])
    b_letters = []
    for _ in range(k**N):
        b_key, x = divmod(b_key, A)
        b_letters.append(x)
    b_text = format_letters(b_letters[::-1], A)
    return Verdict(Status.REFUTED, N, (format_letters((a,), A), q.to_text(), b_text),
                   {"solutions": solutions})


def closing_preimage_build(rule: LocalRule, a: int, target: Pattern, N: int,
                           budget: int | None = None) -> Pattern:
    """A block g of depth D+1 (target depth N+D) with g(eps) = a and
    apply(g) = target|Delta_D, built level by level from the unique child
    tuple at each vertex."""
    g_, A, k = rule.geometry, rule.alphabet_size, rule.arity
    if target.geometry != g_ or target.alphabet_size != A:
        raise ShapeError("target and rule disagree on arity or alphabet")
    D = target.depth - N
    if D < 1:
        raise ShapeError(f"target must be deeper than N = {N}")
    if not 0 <= a < A:
        raise ShapeError(f"letter {a} outside the alphabet")
    verdict = extension_property_check(rule, N, budget)
    if not verdict.certified:
        raise PreconditionError(f"extension property fails at N={N}: {','.join(verdict.witness)}")
    reach = _extension_table(rule, N, budget).reach
    q = target.restrict(N)
    q_keys = q.key * A ** (k**N) + np.arange(A ** (k**N))
    if not reach[a][:, q_keys].any():
        raise PreconditionError(f"{a} ->mu {q} does not hold")
    letters = np.zeros(g_.delta_size(D + 1), dtype=np.int64)
    letters[0] = a
    for i in range(g_.delta_size(D)):
        v = g_.word_of_index(i)
        window = subtree(target, v).restrict(N + 1)
        children = np.flatnonzero(reach[letters[i], :, window.key])
        if len(children) != 1:
            raise InconsistencyError(
                f"vertex {''.join(map(str, v)) or 'ε'}: {len(children)} child tuples extend "
                f"{letters[i]} towards {window}"
            )
        c = int(children[0])
        for s in range(k - 1, -1, -1):
            c, letters[g_.child(i, s)] = divmod(c, A)
    out = Pattern(g_, A, D + 1, tuple(int(x) for x in letters))
    if apply(rule, out) != target.restrict(D):
        raise InconsistencyError("constructed block does not map onto the target")
    return out


def non_openness_evidence(rule: LocalRule, a: int, m: int, m_prime: int,
                          budget: int | None = None) -> Verdict:
    """Window test for openness of tau(C(a)).

    S_m(a) is the set of depth-m image blocks of inputs with root a.  The
    window condition fails when some q in S_m(a) has an extension q' of depth
    m' that is an image block of some input but of no input with root a:
    the cylinder C(q) then meets the image outside tau(C(a)) at depth m'.
    Refuted refers to this finite condition only; it is evidence, not a proof,
    that tau(C(a)) is not open.
    """
    g, A, r = rule.geometry, rule.alphabet_size, rule.radius
    if not 1 <= m < m_prime:
        raise ShapeError("need 1 <= m < m_prime")
    if not 0 <= a < A:
        raise ShapeError(f"letter {a} outside the alphabet")
    depth = m_prime + r
    from_a, from_any = [], []
    for rows in _rows(rule, depth, budget, f"openness window at depth {m_prime}"):
        images = apply_array(rule, rows, depth)
        from_any.append(np.unique(images, axis=0))
        from_a.append(np.unique(images[rows[:, 0] == a], axis=0))
    s_any = np.unique(np.concatenate(from_any), axis=0)
    s_a = np.unique(np.concatenate(from_a), axis=0)
    small = g.delta_size(m)
    s_a_keys = set(row_keys(s_a, A).tolist())
    prefix_ok = set(row_keys(s_a[:, :small], A).tolist())
    any_keys = row_keys(s_any, A)
    for row, key in zip(s_any, any_keys):
        if int(key) in s_a_keys:
            continue
        if int(row_keys(row[None, :small], A)[0]) in prefix_ok:
            texts = (format_letters(row[:small], A), format_letters(row, A))
            return Verdict(Status.REFUTED, m_prime, texts,
                           {"letter": a, "m": m, "m_prime": m_prime, "scope": "window"})
    return Verdict(Status.BOUNDED, m_prime, detail={"letter": a, "m": m, "m_prime": m_prime,
                                                    "images_from_letter": len(s_a),
                                                    "images": len(s_any)})
