"""Tree-domain combinatorics for the full k-ary tree.

Vertices of the tree are words over {0..k-1}.  The finite set Delta_n of
words shorter than n is laid out in level order (BFS heap layout), so that
index(empty) = 0 and index(v s) = k * index(v) + s + 1.  With this layout
Delta_n is a prefix of Delta_{n+1}; restriction is a slice and the level
boundaries are the values of ``delta_size``.

Blocks (``Pattern``) store their letters as a dense level-order tuple.  The
key of a block is the base-|A| integer whose most significant digit is the
root letter, followed by the remaining letters in level order; ascending key
order is the lexicographic order of the level-order letter strings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidWordError, PatternParseError, ShapeError

Word = tuple[int, ...]


@dataclass(frozen=True)
class TreeGeometry:
    arity: int

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise ShapeError(f"arity must be an integer >= 1, got {self.arity!r}")

    def level_size(self, n: int) -> int:
        return self.arity**n

    def delta_size(self, n: int) -> int:
        """Number of words of length < n."""
        if n < 0:
            raise ShapeError(f"negative depth {n}")
        k = self.arity
        if k == 1:
            return n
        return (k**n - 1) // (k - 1)

    def depth_of_size(self, size: int) -> int:
        """Inverse of ``delta_size``; raises if ``size`` is not a block size."""
        n = 1
        while self.delta_size(n) < size:
            n += 1
        if self.delta_size(n) != size or size == 0:
            raise ShapeError(f"{size} letters do not fill Delta_n for any n (arity {self.arity})")
        return n

    def level_of_index(self, index: int) -> int:
        level = 0
        while self.delta_size(level + 1) <= index:
            level += 1
        return level

    def index_of_word(self, word: Sequence[int]) -> int:
        index = 0
        for s in word:
            if not 0 <= s < self.arity:
                raise InvalidWordError(f"digit {s} is not a child index for arity {self.arity}")
            index = self.arity * index + s + 1
        return index

    def word_of_index(self, index: int) -> Word:
        if index < 0:
            raise InvalidWordError(f"negative index {index}")
        digits = []
        while index > 0:
            index -= 1
            digits.append(index % self.arity)
            index //= self.arity
        return tuple(reversed(digits))

    def child(self, index: int, s: int) -> int:
        return self.arity * index + s + 1

    def words(self, length: int) -> list[Word]:
        """All words of the given length in lexicographic order."""
        return list(itertools.product(range(self.arity), repeat=length))

    def descend(self, index: int, word: Sequence[int]) -> int:
        """Index of (word_of_index(index) + word)."""
        for s in word:
            index = self.arity * index + s + 1
        return index


def parse_word(text: str) -> Word:
    """'' or 'eps' is the root; '01' and '0,1' both denote the word 0 1."""
    text = text.strip()
    if text in ("", "eps", "ε"):
        return ()
    parts = text.split(",") if "," in text else list(text)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise InvalidWordError(f"malformed word {text!r}") from None


def format_word(word: Sequence[int]) -> str:
    if not word:
        return "ε"
    if any(s >= 10 for s in word):
        return ",".join(str(s) for s in word)
    return "".join(str(s) for s in word)


@dataclass(frozen=True)
class Pattern:
    """A block p: Delta_depth -> A, letters in level order."""

    geometry: TreeGeometry
    alphabet_size: int
    depth: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise ShapeError("alphabet_size must be >= 1")
        if self.depth < 1:
            raise ShapeError("patterns must have depth >= 1")
        if len(self.letters) != self.geometry.delta_size(self.depth):
            raise ShapeError(
                f"{len(self.letters)} letters given, depth {self.depth} needs "
                f"{self.geometry.delta_size(self.depth)}"
            )
        for a in self.letters:
            if not 0 <= a < self.alphabet_size:
                raise ShapeError(f"letter {a} outside alphabet of size {self.alphabet_size}")

    @classmethod
    def of(cls, letters: Iterable[int], arity: int = 2, alphabet: int = 2) -> "Pattern":
        letters = tuple(int(a) for a in letters)
        g = TreeGeometry(arity)
        return cls(g, alphabet, g.depth_of_size(len(letters)), letters)

    @classmethod
    def from_array(cls, geometry: TreeGeometry, alphabet: int, row) -> "Pattern":
        letters = tuple(int(a) for a in row)
        return cls(geometry, alphabet, geometry.depth_of_size(len(letters)), letters)

    @classmethod
    def constant(cls, geometry: TreeGeometry, alphabet: int, depth: int, letter: int = 0) -> "Pattern":
        return cls(geometry, alphabet, depth, (letter,) * geometry.delta_size(depth))

    @classmethod
    def from_key(cls, geometry: TreeGeometry, alphabet: int, depth: int, key: int) -> "Pattern":
        size = geometry.delta_size(depth)
        if not 0 <= key < alphabet**size:
            raise ShapeError(f"key {key} out of range for depth {depth}")
        digits = []
        for _ in range(size):
            key, a = divmod(key, alphabet)
            digits.append(a)
        return cls(geometry, alphabet, depth, tuple(reversed(digits)))

    @property
    def arity(self) -> int:
        return self.geometry.arity

    @property
    def key(self) -> int:
        key = 0
        for a in self.letters:
            key = key * self.alphabet_size + a
        return key

    def __getitem__(self, word) -> int:
        if isinstance(word, str):
            word = parse_word(word)
        if len(word) >= self.depth:
            raise InvalidWordError(f"word of length {len(word)} outside Delta_{self.depth}")
        return self.letters[self.geometry.index_of_word(word)]

    def array(self) -> np.ndarray:
        return np.asarray(self.letters, dtype=np.int64)

    def same_shape(self, other: "Pattern") -> bool:
        return (
            self.geometry == other.geometry
            and self.alphabet_size == other.alphabet_size
            and self.depth == other.depth
        )

    def restrict(self, n: int) -> "Pattern":
        return restrict(self, n)

    def subtree(self, word) -> "Pattern":
        return subtree(self, word)

    def to_text(self) -> str:
        return format_letters(self.letters, self.alphabet_size)

    def __str__(self) -> str:
        return self.to_text()


def format_letters(letters: Sequence[int], alphabet_size: int) -> str:
    if alphabet_size <= 10:
        return "".join(str(int(a)) for a in letters)
    return ",".join(str(int(a)) for a in letters)


def parse_letters(text: str, alphabet_size: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        raise PatternParseError("empty pattern string")
    if alphabet_size <= 10 and "," not in text:
        parts = list(text)
    else:
        parts = text.split(",")
    try:
        letters = tuple(int(p) for p in parts)
    except ValueError:
        raise PatternParseError(f"malformed pattern string {text!r}") from None
    bad = [a for a in letters if not 0 <= a < alphabet_size]
    if bad:
        raise PatternParseError(f"letter {bad[0]} outside alphabet of size {alphabet_size}")
    return letters


def parse_pattern(text: str, geometry: TreeGeometry, alphabet_size: int) -> Pattern:
    """Parse the level-order text form; the depth is implied by the length."""
    letters = parse_letters(text, alphabet_size)
    try:
        depth = geometry.depth_of_size(len(letters))
    except ShapeError as exc:
        raise PatternParseError(str(exc)) from None
    return Pattern(geometry, alphabet_size, depth, letters)


def index_of_word(g: TreeGeometry, v: Sequence[int]) -> int:
    return g.index_of_word(v)


def word_of_index(g: TreeGeometry, index: int) -> Word:
    return g.word_of_index(index)


def restrict(p: Pattern, n: int) -> Pattern:
    if not 1 <= n <= p.depth:
        raise ShapeError(f"cannot restrict depth-{p.depth} pattern to depth {n}")
    return Pattern(p.geometry, p.alphabet_size, n, p.letters[: p.geometry.delta_size(n)])


def subtree(p: Pattern, word) -> Pattern:
    """The block w -> p(vw) on Delta_{depth - |v|}."""
    if isinstance(word, str):
        word = parse_word(word)
    word = tuple(word)
    if len(word) >= p.depth:
        raise ShapeError(f"|v| = {len(word)} must be below depth {p.depth}")
    root = p.geometry.index_of_word(word)
    idx = subtree_indices(p.arity, p.depth, root, len(word))
    return Pattern(p.geometry, p.alphabet_size, p.depth - len(word), tuple(p.letters[i] for i in idx))


def graft(p: Pattern, children: Sequence[Pattern]) -> Pattern:
    """p on Delta_n with children[i] hung at the i-th word of length n."""
    k, n = p.arity, p.depth
    if len(children) != k**n:
        raise ShapeError(f"graft needs {k**n} children, got {len(children)}")
    m = children[0].depth
    for c in children:
        if c.geometry != p.geometry or c.alphabet_size != p.alphabet_size:
            raise ShapeError("children must share geometry and alphabet with the parent")
        if c.depth != m:
            raise ShapeError("children must all have the same depth")
    top, below = graft_indices(k, n, m)
    out = [0] * p.geometry.delta_size(n + m)
    for i, a in zip(top, p.letters):
        out[i] = a
    for positions, c in zip(below, children):
        for i, a in zip(positions, c.letters):
            out[i] = a
    return Pattern(p.geometry, p.alphabet_size, n + m, tuple(out))


def truncated_distance(p1: Pattern, p2: Pattern) -> Fraction:
    """1/n for the smallest Delta_n on which they differ; 0 if they agree everywhere."""
    if not p1.same_shape(p2):
        raise ShapeError("distance needs patterns of the same shape")
    for i, (a, b) in enumerate(zip(p1.letters, p2.letters)):
        if a != b:
            return Fraction(1, p1.geometry.level_of_index(i) + 1)
    return Fraction(0)


# -- index tables for batch kernels -------------------------------------------


@lru_cache(maxsize=None)
def subtree_indices(arity: int, depth: int, root: int, root_level: int) -> tuple[int, ...]:
    """Indices of root.w for w in Delta_{depth - root_level}, level order."""
    out = [root]
    frontier = [root]
    for _ in range(depth - root_level - 1):
        frontier = [arity * i + s + 1 for i in frontier for s in range(arity)]
        out.extend(frontier)
    return tuple(out)


@lru_cache(maxsize=None)
def neighborhood_indices(arity: int, depth: int, radius: int) -> np.ndarray:
    """Row i lists the indices of v.w, w in Delta_{radius+1}, for v = word i < depth - radius."""
    g = TreeGeometry(arity)
    rows = []
    for i in range(g.delta_size(depth - radius)):
        level = g.level_of_index(i)
        rows.append(subtree_indices(arity, level + radius + 1, i, level))
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), g.delta_size(radius + 1))
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def graft_indices(arity: int, n: int, m: int) -> tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]:
    """Positions in a depth n+m array of the parent cells and of each child's cells."""
    g = TreeGeometry(arity)
    top = tuple(range(g.delta_size(n)))
    below = []
    for v in g.words(n):
        root = g.index_of_word(v)
        below.append(subtree_indices(arity, n + m, root, n))
    return top, tuple(below)


def letter_dtype(alphabet_size: int):
    return np.uint8 if alphabet_size <= 256 else np.int64


def assignments(alphabet: int, width: int, free: Sequence[int], start: int = 0,
                stop: int | None = None, fixed=None) -> np.ndarray:
    """Rows for assignment numbers start..stop-1 of the free positions.

    The first free position is the most significant digit, so when ``free`` is
    ascending the rows come out in ascending key order.
    """
    free = list(free)
    total = alphabet ** len(free)
    if stop is None:
        stop = total
    count = max(stop - start, 0)
    base = np.zeros(width, dtype=np.int64) if fixed is None else np.asarray(fixed, dtype=np.int64)
    out = np.empty((count, width), dtype=np.int64)
    out[:] = base
    if count == 0 or not free:
        return out
    numbers = np.arange(start, stop, dtype=np.int64) if len(free) < 62 else None
    if numbers is None:
        # numbers too wide for int64; decode with python ints
        for row, number in zip(out, range(start, stop)):
            for pos in reversed(free):
                number, row[pos] = divmod(number, alphabet)
        return out
    for pos in reversed(free):
        out[:, pos] = numbers % alphabet
        numbers = numbers // alphabet
    return out


def all_patterns(alphabet: int, size: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    return assignments(alphabet, size, range(size), start, stop)


def row_keys(arr: np.ndarray, alphabet: int) -> np.ndarray:
    """Big-endian keys of each row (requires alphabet**width < 2**63)."""
    weights = alphabet ** np.arange(arr.shape[1] - 1, -1, -1, dtype=np.int64)
    return arr @ weights
