import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeca import verify
from treeca.dynamics import (
    apply,
    apply_array,
    iterate,
    orbit,
    preimage_enumerate,
    realizable,
    trajectory,
    trajectory_set,
)
from treeca.errors import BudgetExceeded, ShapeError, SupportExhausted
from treeca.rulespec import LocalRule, builtin, enumerate_rules, rule_from_number
from treeca.treecore import Pattern, TreeGeometry, all_patterns, subtree, subtree_indices

G2 = TreeGeometry(2)


def P(text, arity=2, alphabet=2):
    return Pattern.of([int(c) for c in text], arity, alphabet)


def test_apply_examples():
    assert apply(builtin("or-all"), Pattern.constant(G2, 2, 3)) == Pattern.constant(G2, 2, 2)
    assert str(apply(builtin("xor-children"), P("0110011"))) == "000"
    p = P("101101011010110")
    assert apply(builtin("identity"), p) == p.restrict(3)


def test_iterate_examples():
    p = P("101101011010110")
    assert iterate(builtin("or-all"), p, 0) == p
    assert iterate(builtin("identity"), p, 3) == p.restrict(1)
    xor = builtin("xor-children")
    assert str(apply(xor, P("0000011"))) == "000"
    assert str(iterate(xor, P("0000011"), 2)) == "0"
    with pytest.raises(SupportExhausted):
        iterate(xor, P("0000011"), 3)


def test_orbit():
    out = orbit(builtin("xor-children"), P("0000011"), 2)
    assert [str(p) for p in out] == ["0000011", "000", "0"]


def test_apply_rejects_shallow_or_mismatched():
    with pytest.raises(SupportExhausted):
        apply(builtin("or-all"), P("1"))
    with pytest.raises(ShapeError):
        apply(builtin("or-all"), P("1011", arity=3))


def test_shift_commutation_exhaustive():
    rows = all_patterns(2, G2.delta_size(4))
    for rule in enumerate_rules(2, 2, 1):
        images = apply_array(rule, rows, 4)
        for v in [(), (0,), (1,)]:
            pos = list(_positions(3, v))
            pos_in = list(_positions(4, v))
            assert np.array_equal(images[:, pos], apply_array(rule, rows[:, pos_in], 4 - len(v)))


def _positions(depth, v):
    return subtree_indices(2, depth, G2.index_of_word(v), len(v))


def test_shift_commutation_on_patterns():
    rng = np.random.default_rng(0)
    rule = builtin("or-all")
    g = Pattern(G2, 2, 4, tuple(int(a) for a in rng.integers(0, 2, 15)))
    for v in ["0", "1", "01"]:
        assert subtree(apply(rule, g), v) == apply(rule, subtree(g, v))


def test_slow_evaluator_agrees_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        k = int(rng.integers(1, 4))
        A = int(rng.integers(2, 4))
        r = int(rng.integers(1, 3)) if k < 3 else 1
        g = TreeGeometry(k)
        table = tuple(int(a) for a in rng.integers(0, A, A ** g.delta_size(r + 1)))
        rule = LocalRule(g, A, r, table)
        t = int(rng.integers(0, 3))
        depth = t * r + int(rng.integers(1, 3))
        p = Pattern(g, A, depth, tuple(int(a) for a in rng.integers(0, A, g.delta_size(depth))))
        fast = iterate(rule, p, t)
        slow = verify.slow_iterate(rule, verify.as_dict(p), t)
        assert verify.as_dict(fast) == slow


@pytest.mark.parametrize("name", ["or-all", "xor-children", "xor-all", "identity", "first-child"])
@pytest.mark.parametrize("n", [1, 2])
def test_partition_identity(name, n):
    rule = builtin(name)
    total = sum(len(preimage_enumerate(rule, Pattern.from_key(G2, 2, n, key)))
                for key in range(2 ** G2.delta_size(n)))
    assert total == 2 ** G2.delta_size(n + 1)


def test_preimage_examples():
    xor_all = builtin("xor-all")
    assert len(preimage_enumerate(xor_all, P("0"))) == 4
    or_all = builtin("or-all")
    assert [str(p) for p in preimage_enumerate(or_all, P("0"))] == ["000"]
    ones = preimage_enumerate(or_all, P("1"))
    assert len(ones) == 7
    assert [p.key for p in ones] == sorted(p.key for p in ones)


def test_preimages_match_brute_force():
    rule = rule_from_number(150, 2, 2, 1)
    rows = all_patterns(2, 7)
    images = apply_array(rule, rows, 3)
    for key in range(8):
        q = Pattern.from_key(G2, 2, 2, key)
        expect = [tuple(r) for r, img in zip(rows.tolist(), images.tolist()) if img == list(q.letters)]
        assert [p.letters for p in preimage_enumerate(rule, q)] == expect


def test_realizable_examples():
    assert realizable(builtin("identity"), P("0"), P("011"))
    assert not realizable(builtin("identity"), P("1"), P("011"))
    assert not realizable(builtin("or-all"), P("1"), P("0"))
    rule = builtin("xor-children")
    g = P("101100111010110")
    assert realizable(rule, g.restrict(2), apply(rule, g))


def test_trajectory_tuple():
    tr = trajectory(builtin("xor-children"), P("0000011"), 1, 3)
    assert [str(p) for p in tr.entries] == ["0", "0", "0"]


def test_trajectory_set_examples():
    ident = trajectory_set(builtin("identity"), 1, 3)
    assert ident.distinct_count == 2
    xor = trajectory_set(builtin("xor-children"), 1, 2)
    assert xor.distinct_count == 4
    assert xor.counts == (2, 4)
    assert xor.entropy_estimates[1] == pytest.approx(math.log(4) / 2)
    assert xor.lines()[0] == "t=1 count=2 h=0.693147"


@pytest.mark.parametrize("number", [0, 1, 30, 102, 110, 150, 204, 232, 240, 254])
@pytest.mark.parametrize("n, t", [(1, 1), (1, 3), (1, 4), (2, 2), (2, 3)])
def test_columns_match_bases(number, n, t):
    rule = rule_from_number(number, 2, 2, 1)
    a = trajectory_set(rule, n, t, method="columns")
    b = trajectory_set(rule, n, t, method="bases")
    assert a == b


def test_columns_match_bases_other_shapes():
    cases = [(builtin("xor-all", arity=3), 3), (builtin("first-child", arity=1), 5),
             (builtin("or-all", alphabet=3), 3), (builtin("xor-children", radius=2), 2)]
    for rule, t in cases:
        assert trajectory_set(rule, 1, t, method="columns") == trajectory_set(rule, 1, t, method="bases")


@pytest.mark.parametrize("number", [30, 102, 254, 232])
def test_trajectory_counts_monotone_and_bounded(number):
    rule = rule_from_number(number, 2, 2, 1)
    one, two = trajectory_set(rule, 1, 4), trajectory_set(rule, 2, 4)
    for i in range(4):
        assert one.counts[i] <= two.counts[i]
        assert two.counts[i] <= 2 ** (G2.delta_size(2) * (i + 1))
        if i:
            assert one.counts[i - 1] <= one.counts[i]


def test_budget_is_enforced(monkeypatch):
    with pytest.raises(BudgetExceeded):
        trajectory_set(builtin("xor-children"), 2, 4, budget=1000)
    monkeypatch.setenv("TREECA_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        preimage_enumerate(builtin("or-all"), P("1111111"))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 255), st.integers(0, 2**15 - 1))
def test_apply_matches_slow_evaluator(number, key):
    rule = rule_from_number(number, 2, 2, 1)
    p = Pattern.from_key(G2, 2, 4, key)
    assert verify.as_dict(apply(rule, p)) == verify.slow_apply(rule, verify.as_dict(p))
