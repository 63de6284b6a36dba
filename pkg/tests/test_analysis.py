import numpy as np
import pytest

from treeca import verify
from treeca.analysis import (
    Bounds,
    ClassificationRow,
    Diamond,
    Status,
    Verdict,
    balance_report,
    check_diamond,
    classify,
    closing_preimage_build,
    diamond_search,
    expansivity_witness,
    extension_property_check,
    falsify_expansivity,
    image_counts,
    is_permutive,
    myhill_collision_search,
    non_openness_evidence,
    orphan_search,
    over_mean_block,
    permutive_preimage_build,
    pigeonhole_holds,
    right_closing_at,
    right_closing_min_N,
)
from treeca.dynamics import apply
from treeca.errors import (
    BudgetExceeded,
    InconsistencyError,
    NoWitnessFound,
    PreconditionError,
    UnsupportedRule,
)
from treeca.rulespec import LocalRule, builtin, enumerate_rules
from treeca.treecore import Pattern, TreeGeometry

G2 = TreeGeometry(2)
XOR = builtin("xor-children")
OR = builtin("or-all")
ID = builtin("identity")
XOR_ALL = builtin("xor-all")
FIRST = builtin("first-child")
SHIFT1 = builtin("first-child", arity=1)
ALL_RULES = list(enumerate_rules(2, 2, 1))


def P(text, arity=2, alphabet=2):
    return Pattern.of([int(c) for c in text], arity, alphabet)


def zeros_except(size, ones):
    return "".join("1" if i in ones else "0" for i in range(size))


# -- verdicts -----------------------------------------------------------------------


def test_verdict_serialization():
    v = Verdict(Status.REFUTED, 5, ("0", "000"), {"core_size": 3, "ok": True, "none": None})
    assert v.lines() == ["verdict: refuted", "bound: 5", "witness: 0,000", "detail: core_size=3 ok=true none=-"]
    assert v.record() == "verdict=refuted bound=5 witness=0,000 core_size=3 ok=true none=-"
    assert Verdict(Status.CERTIFIED).lines() == ["verdict: certified"]
    assert Verdict(Status.BOUNDED, 3).bounded


# -- permutivity --------------------------------------------------------------------


def test_permutivity_examples():
    assert is_permutive(ID).certified
    assert is_permutive(XOR_ALL).certified
    v = is_permutive(OR)
    assert v.refuted and v.witness == ("01",)
    # the smallest failing boundary; "10" fails too
    assert verify.verify_permutive_witness(OR, (0, 1))
    assert verify.verify_permutive_witness(OR, (1, 0))
    assert not verify.verify_permutive_witness(OR, (0, 0))


def test_permutive_rules_count_and_witnesses():
    permutive = [r for r in ALL_RULES if is_permutive(r).certified]
    # a -> mu(a, b, c) must be a bijection for each (b, c): 2 choices per boundary
    assert len(permutive) == 16
    for r in ALL_RULES:
        v = is_permutive(r)
        if v.refuted:
            assert verify.verify_permutive_witness(r, tuple(int(c) for c in v.witness[0]))


def test_permutive_preimage_examples():
    g = permutive_preimage_build(XOR_ALL, P("0"), "00")
    assert str(g) == "000"
    target = P("1011001")
    g = permutive_preimage_build(ID, target, "01" * 4)
    assert g.restrict(3) == target
    with pytest.raises(UnsupportedRule):
        permutive_preimage_build(OR, P("1"), "00")


def test_permutive_preimage_other_shapes():
    rng = np.random.default_rng(7)
    for rule in (builtin("xor-all", arity=3, alphabet=3), builtin("sum-mod", radius=2, positions=[0, 5]),
                 builtin("xor-all", arity=1)):
        g = rule.geometry
        target = Pattern(g, rule.alphabet_size, 3, tuple(int(a) for a in rng.integers(0, rule.alphabet_size, g.delta_size(3))))
        width = g.delta_size(3 + rule.radius) - g.delta_size(3)
        filler = [int(a) for a in rng.integers(0, rule.alphabet_size, width)]
        assert apply(rule, permutive_preimage_build(rule, target, filler)) == target


# -- orphans and balance --------------------------------------------------------------


def test_orphan_examples():
    v = orphan_search(OR, 3)
    assert v.refuted and v.bound == 3
    assert v.witness == ("0010000",)
    assert verify.verify_orphan(OR, P("0010000"))
    # the other level-1 mirror image is an orphan as well
    assert verify.verify_orphan(OR, P("0100000"))
    assert orphan_search(XOR, 3) == Verdict(Status.BOUNDED, 3)
    assert orphan_search(ID, 4).bounded


def test_orphan_witnesses_reverify_for_all_rules():
    for r in ALL_RULES:
        v = orphan_search(r, 3)
        if v.refuted:
            q = P(v.witness[0])
            assert q.depth == v.bound
            assert verify.verify_orphan(r, q)
            if q.depth > 1:
                # nothing shallower is an orphan
                assert orphan_search(r, q.depth - 1).bounded


@pytest.mark.parametrize("rule", [OR, XOR, builtin("or-all", arity=3), builtin("or-all", alphabet=3),
                                  builtin("first-child", radius=2), builtin("xor-children", arity=1)])
def test_orphan_search_matches_image_counts(rule):
    n_max = 1 if rule.radius == 2 else 2
    expect = None
    for n in range(1, n_max + 1):
        empty = np.flatnonzero(image_counts(rule, n) == 0)
        if len(empty):
            expect = (n, int(empty[0]))
            break
    v = orphan_search(rule, n_max)
    assert ((v.bound, v.payload.key) if v.refuted else None) == expect


def test_balance_examples():
    rep = balance_report(XOR_ALL, 1)
    assert (rep.expected, rep.min_count, rep.max_count) == (4, 4, 4) and rep.balanced
    rep = balance_report(OR, 1)
    assert (rep.expected, rep.min_count, rep.max_count, rep.total) == (4, 1, 7, 8)
    assert str(rep.over_witness) == "1" and str(rep.under_witness) == "0"
    assert rep.orphan is None
    assert "balanced: no" in rep.lines()
    rep = balance_report(ID, 1)
    assert rep.balanced


def test_balance_identities_for_all_rules():
    for r in ALL_RULES:
        for n in (1, 2):
            rep = balance_report(r, n)
            assert rep.total == 2 ** G2.delta_size(n + 1)
            assert (rep.min_count < rep.expected) == (rep.max_count > rep.expected)
            if rep.orphan is not None:
                assert rep.over_witness is not None


# -- diamonds -----------------------------------------------------------------------


def test_xor_diamond_core():
    v = diamond_search(XOR, 5)
    assert v.refuted
    boundary, first, second = v.witness
    assert boundary == "0"
    assert first == "0" * 31
    assert second == zeros_except(31, {1, 2})
    assert P(second).restrict(3) == P("0110000")
    assert verify.verify_diamond(XOR, P(boundary), P(first), P(second))


def test_or_diamond():
    v = diamond_search(OR, 5)
    assert v.refuted and v.witness[0] == "1"
    assert verify.verify_diamond(OR, *(P(w) for w in v.witness))
    # all ones against node "00" set to 0 is another diamond
    other = "1" * 3 + "0" + "1" * 27
    d = Diamond(P("1"), 5, P("1" * 31), P(other))
    assert check_diamond(OR, d, strict=True) == []


def test_identity_has_no_diamond():
    assert diamond_search(ID, 5) == Verdict(Status.BOUNDED, 5)


def test_diamond_size_rules():
    with pytest.raises(PreconditionError):
        diamond_search(XOR, 4)
    v = diamond_search(XOR, 3, strict=False)
    assert v.refuted and v.witness[2] == "0110000"
    d = Diamond(P("0"), 3, P("0000000"), P("0110000"))
    assert check_diamond(XOR, d) == []
    assert check_diamond(XOR, d, strict=True)


def test_check_diamond_reports_problems():
    d = Diamond(P("0"), 3, P("0000000"), P("0000000"))
    assert "blocks are equal" in check_diamond(XOR, d)
    d = Diamond(P("0"), 3, P("0000000"), P("1000000"))
    problems = check_diamond(XOR, d)
    assert any("boundary" in p for p in problems)


def test_diamond_witnesses_reverify_for_all_rules():
    for r in ALL_RULES[::5]:
        v = diamond_search(r, 5)
        if v.refuted:
            assert verify.verify_diamond(r, *(P(w) for w in v.witness))


def test_myhill_collision_search():
    q = over_mean_block(OR, 2)
    assert str(q) == "1"
    v = myhill_collision_search(OR, q, m_max=2)
    assert v.refuted
    d = v.payload
    assert check_diamond(OR, d) == []
    assert verify.verify_diamond(OR, d.boundary, d.first, d.second)
    assert v.detail["xi"] == 7 and v.detail["mean"] == 4
    with pytest.raises(PreconditionError):
        myhill_collision_search(XOR_ALL, P("0"))
    assert over_mean_block(XOR_ALL, 2) is None


def test_myhill_on_other_unbalanced_rules():
    found = 0
    for r in ALL_RULES[::17]:
        q = over_mean_block(r, 1)
        if q is None:
            continue
        v = myhill_collision_search(r, q, m_max=1)
        if v.refuted:
            found += 1
            assert verify.verify_diamond(r, v.payload.boundary, v.payload.first, v.payload.second)
    assert found


# -- right-closing and the extension property ----------------------------------------


def test_right_closing_examples():
    assert right_closing_at(ID, 2).certified
    assert right_closing_at(ID, 1).refuted
    assert right_closing_min_N(ID, 3) == Verdict(Status.CERTIFIED, 2, detail={"min_N": 2})
    v = right_closing_at(XOR, 2)
    assert v.refuted
    p, q, g1, g2 = v.witness
    assert (p, q, g1, g2) == ("0", "000", "0000000", "0110000")
    assert verify.verify_right_closing_witness(XOR, 2, P(p), P(q), P(g1), P(g2))
    assert right_closing_min_N(XOR, 3).bounded
    v = right_closing_at(FIRST, 2)
    assert v.refuted
    g1, g2 = P(v.witness[2]), P(v.witness[3])
    assert g1["0"] == g2["0"] and g1["1"] != g2["1"]


def test_right_closing_on_the_line():
    v = right_closing_min_N(SHIFT1, 2)
    assert v.certified and v.bound <= 2


def test_right_closing_witnesses_reverify_for_all_rules():
    for r in ALL_RULES:
        v = right_closing_at(r, 1)
        if v.refuted:
            p, q, g1, g2 = (P(w) for w in v.witness)
            assert verify.verify_right_closing_witness(r, 1, p, q, g1, g2)


def test_extension_property_examples():
    assert extension_property_check(ID, 2).certified
    v = extension_property_check(XOR, 1)
    assert v.refuted and v.detail["solutions"] >= 2
    assert v.witness == ("0", "0", "00")
    v = extension_property_check(OR, 1)
    assert v.refuted and v.detail["solutions"] == 0
    with pytest.raises(UnsupportedRule):
        extension_property_check(builtin("identity", radius=2), 1)


def test_extension_witnesses_reverify():
    for r in ALL_RULES[::3]:
        v = extension_property_check(r, 1)
        if v.refuted:
            a, q, b = v.witness
            assert verify.verify_extension_witness(r, int(a), P(q), tuple(int(c) for c in b))
            assert verify.extension_solutions(r, int(a), P(q), tuple(int(c) for c in b)) == v.detail["solutions"]


def test_closing_preimage_build():
    rng = np.random.default_rng(3)
    for _ in range(10):
        target = Pattern(G2, 2, 4, tuple(int(a) for a in rng.integers(0, 2, 15)))
        g = closing_preimage_build(ID, target.letters[0], target, 1)
        assert g == target
        g = closing_preimage_build(ID, target.letters[0], target, 2)
        assert g == target.restrict(3)
    with pytest.raises(PreconditionError):
        closing_preimage_build(ID, 1, P("0110100"), 1)
    with pytest.raises(PreconditionError):
        closing_preimage_build(XOR, 0, P("0000000"), 1)


# -- openness --------------------------------------------------------------------------


def _window_brute_force(rule, a, m, m_prime):
    """True when the window condition fails, by direct enumeration."""
    k = rule.arity
    images, from_a = set(), set()
    for cells in verify.all_blocks(k, 2, m_prime + rule.radius):
        img = tuple(sorted(verify.slow_apply(rule, cells).items()))
        images.add(img)
        if cells[()] == a:
            from_a.add(img)
    prefixes = {tuple((v, x) for v, x in img if len(v) < m) for img in from_a}
    return any(img not in from_a and tuple((v, x) for v, x in img if len(v) < m) in prefixes
               for img in images)


@pytest.mark.parametrize("rule, a, m, m_prime", [
    (ID, 0, 1, 2),
    (FIRST, 0, 1, 2),
    (XOR, 0, 1, 3),
    (OR, 0, 1, 2),
    (OR, 1, 1, 2),
])
def test_openness_matches_brute_force(rule, a, m, m_prime):
    v = non_openness_evidence(rule, a, m, m_prime)
    assert v.refuted == _window_brute_force(rule, a, m, m_prime)
    if v.refuted:
        assert verify.verify_openness_witness(rule, a, P(v.witness[0]), P(v.witness[1]))


def test_openness_recorded_outputs():
    assert non_openness_evidence(ID, 0, 1, 2).bounded
    v = non_openness_evidence(FIRST, 0, 1, 2)
    assert v.bounded and v.detail["images_from_letter"] == v.detail["images"] == 8
    v = non_openness_evidence(XOR, 0, 1, 3)
    assert v.bounded and v.detail["images"] == 128


def test_openness_finds_a_window_violation():
    hits = [r for r in ALL_RULES if non_openness_evidence(r, 0, 1, 2).refuted]
    assert hits
    for r in hits[:10]:
        v = non_openness_evidence(r, 0, 1, 2)
        assert verify.verify_openness_witness(r, 0, P(v.witness[0]), P(v.witness[1]))


# -- expansivity -------------------------------------------------------------------------


def test_expansivity_examples():
    f1, f2 = expansivity_witness(XOR, 1, 2)
    assert (str(f1), str(f2)) == ("0000000", "0000011")
    f1, f2 = expansivity_witness(ID, 1, 5)
    assert f1.depth == 6 and f1 != f2
    assert verify.verify_expansivity_pair(ID, 1, 5, f1, f2)


def test_expansivity_all_rules():
    for r in ALL_RULES:
        assert pigeonhole_holds(r, 1, 2)
        v = falsify_expansivity(r, 1, 2)
        assert v.refuted
        f1, f2 = v.payload
        assert verify.verify_expansivity_pair(r, 1, 2, f1, f2)


def test_expansivity_on_the_line_has_no_witness():
    # the one-sided shift is expansive: no two blocks share a trajectory
    assert not pigeonhole_holds(SHIFT1, 1, 3)
    with pytest.raises(NoWitnessFound):
        expansivity_witness(SHIFT1, 1, 3)
    assert falsify_expansivity(SHIFT1, 1, 3).bounded


# -- degenerate inputs and budgets ---------------------------------------------------------


def test_degenerate_alphabet():
    trivial = LocalRule(G2, 1, 1, (0,))
    assert orphan_search(trivial, 3).detail["note"] == "degenerate-alphabet"
    assert diamond_search(trivial, 5).bounded
    assert is_permutive(trivial).certified
    assert balance_report(trivial, 2).balanced


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        orphan_search(OR, 3, budget=10)
    with pytest.raises(BudgetExceeded):
        diamond_search(ID, 5, budget=100)
    with pytest.raises(BudgetExceeded):
        right_closing_at(XOR, 3, budget=100)


# -- classification --------------------------------------------------------------------------


def test_classify_examples():
    row = classify(XOR)
    assert (row.permutive, row.orphan_depth, row.diamond_size, row.right_closing_N) == (False, None, 5, None)
    row = classify(OR)
    assert row.orphan_depth == 3 and row.diamond_size == 5
    row = classify(ID)
    assert row.permutive and row.orphan_depth is None and row.diamond_size is None
    assert row.right_closing_N == 2 and row.complete
    assert ClassificationRow.from_record(row.record()) == row


def test_classify_marks_incomplete():
    row = classify(ID, Bounds(budget=5000))
    assert not row.complete
    assert "diamond" in row.incomplete and row.diamond_size is None
    assert row.permutive
    assert "incomplete=" in row.record()


def test_classification_row_invariant():
    with pytest.raises(InconsistencyError):
        ClassificationRow(1, True, 3, 0, None, None, None)
    with pytest.raises(InconsistencyError):
        ClassificationRow(1, True, None, 0, 5, None, None)


def test_classify_on_the_line():
    row = classify(SHIFT1)
    assert row.orphan_depth is None and row.diamond_size is None
    assert row.balanced_up_to == 2 and row.right_closing_N == 1


# -- the slow validators reject bad witnesses ----------------------------------------------------


def test_slow_validators_reject_non_witnesses():
    assert not verify.verify_orphan(OR, P("1"))
    assert not verify.verify_permutive_witness(XOR_ALL, (0, 1))
    assert not verify.verify_diamond(ID, P("0"), P("0000000"), P("0110000"))
    assert not verify.verify_diamond(XOR, P("0"), P("0000000"), P("0000000"))
    assert not verify.verify_expansivity_pair(XOR, 1, 2, P("0000000"), P("0000001"))
    assert not verify.verify_expansivity_pair(XOR, 1, 2, P("0000000"), P("0000000"))
    assert not verify.verify_right_closing_witness(ID, 2, P("0"), P("000"), P("0000000"), P("0000000"))
    assert not verify.verify_extension_witness(ID, 0, P("011"), (0, 1, 1, 0))
    assert not verify.verify_openness_witness(ID, 0, P("0"), P("001"))
