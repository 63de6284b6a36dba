"""Local rules mu: A^(Delta_{r+1}) -> A as dense lookup tables.

A neighborhood block is addressed by its key (root letter most significant,
then level order), so ``table[key]`` is the image letter.  Formula rules
(the built-in families) only exist as generators of such tables.

The number of a rule is its table read as a base-|A| integer with entry 0 as
the least significant digit, the same convention as Wolfram's elementary
rule numbers: for k=2, r=1, |A|=2 the identity is rule 240, the OR rule is
254 and the rule summing the two children is 102.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from . import budget as _budget
from .errors import RuleParseError, ShapeError
from .treecore import Pattern, TreeGeometry, format_letters, parse_letters

FORMAT_HEADER = "treeca-rule v1"
FAMILIES = ("or-all", "xor-children", "xor-all", "identity", "first-child", "sum-mod")


@dataclass(frozen=True)
class LocalRule:
    geometry: TreeGeometry
    alphabet_size: int
    radius: int
    table: tuple[int, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise ShapeError("alphabet_size must be >= 1")
        if self.radius < 1:
            raise ShapeError("radius must be >= 1")
        if len(self.table) != self.table_length:
            raise ShapeError(f"table has {len(self.table)} entries, expected {self.table_length}")
        for a in self.table:
            if not 0 <= a < self.alphabet_size:
                raise ShapeError(f"table entry {a} outside alphabet of size {self.alphabet_size}")

    @property
    def arity(self) -> int:
        return self.geometry.arity

    @property
    def neighborhood_size(self) -> int:
        return self.geometry.delta_size(self.radius + 1)

    @property
    def table_length(self) -> int:
        return self.alphabet_size**self.neighborhood_size

    @cached_property
    def lookup(self) -> np.ndarray:
        arr = np.asarray(self.table, dtype=np.int64)
        arr.flags.writeable = False
        return arr

    @property
    def number(self) -> int:
        return rule_number(self)

    def label(self) -> str:
        return self.name or f"rule-{self.number}"


def rule_lookup(rule: LocalRule, neighborhood: Pattern) -> int:
    if (
        neighborhood.geometry != rule.geometry
        or neighborhood.alphabet_size != rule.alphabet_size
        or neighborhood.depth != rule.radius + 1
    ):
        raise ShapeError("neighborhood must be a depth r+1 block over the rule's alphabet and arity")
    return rule.table[neighborhood.key]


def rule_number(rule: LocalRule) -> int:
    number = 0
    for a in reversed(rule.table):
        number = number * rule.alphabet_size + a
    return number


def rule_from_number(number: int, arity: int, alphabet: int, radius: int, name: str | None = None) -> LocalRule:
    g = TreeGeometry(arity)
    length = alphabet ** g.delta_size(radius + 1)
    if not 0 <= number < alphabet**length:
        raise ShapeError(f"rule number {number} out of range")
    table = []
    for _ in range(length):
        number, a = divmod(number, alphabet)
        table.append(a)
    return LocalRule(g, alphabet, radius, tuple(table), name)


def neighborhoods(arity: int, alphabet: int, radius: int) -> np.ndarray:
    """All neighborhood blocks in key order, one row each."""
    size = TreeGeometry(arity).delta_size(radius + 1)
    return np.array(list(itertools.product(range(alphabet), repeat=size)), dtype=np.int64).reshape(-1, size)


@dataclass(frozen=True)
class RuleFamily:
    kind: str
    positions: tuple[int, ...] | None = None

    def expand(self, arity: int, alphabet: int, radius: int = 1) -> LocalRule:
        g = TreeGeometry(arity)
        size = g.delta_size(radius + 1)
        rows = neighborhoods(arity, alphabet, radius)
        kind = self.kind
        if kind == "or-all":
            # 0 iff every letter is 0; the maximum letter otherwise (OR when |A| = 2)
            values = rows.max(axis=1)
        elif kind == "identity":
            values = rows[:, 0]
        elif kind == "first-child":
            values = rows[:, 1]
        elif kind in ("xor-children", "xor-all", "sum-mod"):
            if kind == "xor-children":
                positions = range(1, 1 + arity)
            elif kind == "xor-all":
                positions = range(size)
            else:
                if not self.positions:
                    raise ShapeError("sum-mod needs a non-empty list of positions")
                positions = self.positions
            positions = list(positions)
            if any(not 0 <= i < size for i in positions):
                raise ShapeError(f"sum-mod positions must lie in 0..{size - 1}")
            values = rows[:, positions].sum(axis=1) % alphabet
        else:
            raise ShapeError(f"unknown rule family {kind!r}; known: {', '.join(FAMILIES)}")
        return LocalRule(g, alphabet, radius, tuple(int(v) for v in values), kind)


def builtin(kind: str, arity: int = 2, alphabet: int = 2, radius: int = 1,
            positions: Sequence[int] | None = None) -> LocalRule:
    return RuleFamily(kind, tuple(positions) if positions else None).expand(arity, alphabet, radius)


def serialize_rule(rule: LocalRule) -> str:
    """Table form of the rule file format, one entry per key in key order."""
    lines = [
        FORMAT_HEADER,
        f"arity: {rule.arity}",
        f"alphabet: {rule.alphabet_size}",
        f"radius: {rule.radius}",
        "kind: table",
    ]
    if rule.name:
        lines.append(f"name: {rule.name}")
    for key, row in enumerate(itertools.product(range(rule.alphabet_size), repeat=rule.neighborhood_size)):
        out = format_letters((rule.table[key],), rule.alphabet_size)
        lines.append(f"{format_letters(row, rule.alphabet_size)} -> {out}")
    return "\n".join(lines) + "\n"


_HEADER_RE = re.compile(r"^([a-z]+)\s*:\s*(.*)$")


def parse_rule(text: str) -> LocalRule:
    lines = text.splitlines()
    headers: dict[str, tuple[str, int]] = {}
    entries: list[tuple[str, str, int]] = []
    seen_magic = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_magic:
            if line != FORMAT_HEADER:
                raise RuleParseError(f"expected {FORMAT_HEADER!r}", lineno)
            seen_magic = True
            continue
        if "->" in line:
            lhs, rhs = (s.strip() for s in line.split("->", 1))
            entries.append((lhs, rhs, lineno))
            continue
        m = _HEADER_RE.match(line)
        if not m:
            raise RuleParseError(f"cannot parse {line!r}", lineno)
        key, value = m.group(1), m.group(2).strip()
        if key in headers:
            raise RuleParseError(f"duplicate header {key!r}", lineno)
        headers[key] = (value, lineno)
    if not seen_magic:
        raise RuleParseError(f"missing {FORMAT_HEADER!r} line", 1)

    def number(key: str) -> int:
        if key not in headers:
            raise RuleParseError(f"missing header {key!r}")
        value, lineno = headers[key]
        try:
            return int(value)
        except ValueError:
            raise RuleParseError(f"header {key!r} must be an integer, got {value!r}", lineno) from None

    arity, alphabet, radius = number("arity"), number("alphabet"), number("radius")
    if arity < 1 or alphabet < 1 or radius < 1:
        raise RuleParseError("arity, alphabet and radius must be >= 1")
    kind, kind_line = headers.get("kind", (None, None))
    name = headers.get("name", (None, None))[0]
    unknown = set(headers) - {"arity", "alphabet", "radius", "kind", "name", "positions"}
    if unknown:
        raise RuleParseError(f"unknown header {sorted(unknown)[0]!r}", headers[sorted(unknown)[0]][1])

    if kind == "builtin":
        if entries:
            raise RuleParseError("builtin rules take no table entries", entries[0][2])
        if not name:
            raise RuleParseError("builtin rules need a 'name:' header", kind_line)
        positions = None
        if "positions" in headers:
            value, lineno = headers["positions"]
            try:
                positions = tuple(int(p) for p in re.split(r"[\s,]+", value) if p)
            except ValueError:
                raise RuleParseError(f"malformed positions {value!r}", lineno) from None
        try:
            return builtin(name, arity, alphabet, radius, positions)
        except ShapeError as exc:
            raise RuleParseError(str(exc), headers["name"][1]) from None
    if kind != "table":
        raise RuleParseError(f"kind must be 'table' or 'builtin', got {kind!r}", kind_line)

    size = TreeGeometry(arity).delta_size(radius + 1)
    length = alphabet**size
    table: list[int | None] = [None] * length
    for lhs, rhs, lineno in entries:
        try:
            row = parse_letters(lhs, alphabet)
            (out,) = parse_letters(rhs, alphabet)
        except ValueError as exc:
            raise RuleParseError(str(exc), lineno) from None
        if len(row) != size:
            raise RuleParseError(f"neighborhood {lhs!r} has {len(row)} letters, expected {size}", lineno)
        key = 0
        for a in row:
            key = key * alphabet + a
        if table[key] is not None:
            raise RuleParseError(f"duplicate key {lhs!r}", lineno)
        table[key] = out
    missing = [k for k, v in enumerate(table) if v is None]
    if missing:
        row = []
        key = missing[0]
        for _ in range(size):
            key, a = divmod(key, alphabet)
            row.append(a)
        raise RuleParseError(f"missing key {format_letters(reversed(row), alphabet)!r}")
    return LocalRule(TreeGeometry(arity), alphabet, radius, tuple(table), name)


def count_rules(arity: int, alphabet: int, radius: int) -> int:
    length = alphabet ** TreeGeometry(arity).delta_size(radius + 1)
    return alphabet**length


def enumerate_rules(arity: int, alphabet: int, radius: int, budget: int | None = None,
                    start: int = 0, stop: int | None = None) -> Iterator[LocalRule]:
    """Every rule exactly once, in ascending rule number.

    ``start``/``stop`` select a disjoint number range for parallel consumers.
    """
    total = count_rules(arity, alphabet, radius)
    stop = total if stop is None else min(stop, total)
    _budget.require(max(0, stop - start), budget, f"rules {start}..{stop - 1} of {total}")
    for number in range(start, stop):
        yield rule_from_number(number, arity, alphabet, radius)
