import pytest

from backdoorkit.detect import (
    ALGORITHMS, BackdoorKind, BackdoorQuery, BackdoorResult, backdoor_size,
    deletion_graph, deletion_pairs, detect, detect_bruteforce,
    detect_deletion_clu, detect_deletion_forest, detect_deletion_rhorn,
    detect_strong_schaefer, detect_strong_searchtree, detect_weak_searchtree,
    enumerate_obstructions, supported_algorithms, verify_backdoor,
)
from backdoorkit.errors import BudgetExceeded, UnsupportedQuery
from backdoorkit.formula import CnfFormula, brute_force_sat, delete_vars, rename
from backdoorkit.genbench import SetSystem, hs_weak_instance, or_gadget, strong_rhorn_instance
from backdoorkit.graphkit import min_vertex_cover, var_vertex
from backdoorkit.islands import (
    ALL_CLASSES, CLU, FOREST, HORN, HORN_MINUS, ONE_VAL, RHORN, TWO_CNF, UP,
    ZERO_VAL, is_member,
)

F = CnfFormula.of
WEAK, STRONG, DELETION = BackdoorKind.WEAK, BackdoorKind.STRONG, BackdoorKind.DELETION
SCHAEFER = (HORN, HORN_MINUS, TWO_CNF, ZERO_VAL, ONE_VAL)
COMPLETE_2 = F([1, 2], [-1, 2], [1, -2], [-1, -2])


def specialized_pairs():
    for kind in BackdoorKind:
        for base in ALL_CLASSES:
            for algorithm in supported_algorithms(kind, base):
                if algorithm != "bruteforce":
                    yield kind, base, algorithm


def oracle_minimum(formula, kind, base):
    found = detect_bruteforce(formula, BackdoorQuery(kind, base, len(formula.variables)), force=True)
    return None if found is None else found.variables


def check_against_oracle(formula, every_k=True):
    n = len(formula.variables)
    minima = {}
    for kind, base, algorithm in specialized_pairs():
        if (kind, base) not in minima:
            minima[kind, base] = oracle_minimum(formula, kind, base)
        expected = minima[kind, base]
        budgets = range(n + 1) if every_k else sorted({n, max(len(expected or ()) - 1, 0)})
        for k in budgets:
            found = detect(formula, kind, base, k, algorithm=algorithm)
            context = (formula, kind, base, algorithm, k)
            if expected is None or len(expected) > k:
                assert found is None, context
                continue
            assert found is not None and found.size == len(expected), context
            assert verify_backdoor(formula, found.variables, kind, base), context
            if algorithm != "deletion-rhorn":
                assert found.variables == expected, context


# Queries and dispatch

def test_deletion_undefined_for_subsolvers():
    """Deletion backdoors make no sense for classes that are not clause-induced."""
    with pytest.raises(UnsupportedQuery, match="deletion undefined for subsolver classes"):
        BackdoorQuery(DELETION, UP, 1)
    with pytest.raises(UnsupportedQuery):
        detect(F([1]), DELETION, UP, 1)
    with pytest.raises(UnsupportedQuery):
        BackdoorQuery(DELETION, HORN.with_empty(), 1)


def test_negative_budget():
    """k must be non-negative."""
    with pytest.raises(ValueError):
        BackdoorQuery(STRONG, HORN, -1)


def test_supported_algorithms_order():
    """Specialized algorithm first, brute force last."""
    assert supported_algorithms(STRONG, HORN) == ["strong-schaefer", "strong-searchtree", "bruteforce"]
    assert supported_algorithms(DELETION, FOREST) == ["deletion-forest", "bruteforce"]
    assert supported_algorithms(WEAK, RHORN) == ["bruteforce"]
    assert supported_algorithms(DELETION, UP) == []
    assert set(a for kind, base, a in specialized_pairs()) | {"bruteforce"} == set(ALGORITHMS)


def test_unsupported_algorithm():
    """Asking for an algorithm that does not cover the query fails."""
    with pytest.raises(UnsupportedQuery):
        detect(F([1, 2]), STRONG, FOREST, 1, algorithm="strong-schaefer")


def test_brute_force_budget():
    """Brute force refuses oversized enumerations unless forced."""
    wide = CnfFormula.of(*[[v, v + 1] for v in range(1, 30)])
    with pytest.raises(BudgetExceeded):
        detect(wide, STRONG, FOREST, 30, algorithm="bruteforce")


def test_result_dict():
    """Serialized results carry the certificate and the minimality flag."""
    result = BackdoorResult(WEAK, frozenset({3, 1}), "bruteforce", witness={1: 1, 3: 0})
    assert result.to_dict() == {
        "kind": "weak", "variables": [1, 3], "size": 2,
        "certificate": {"witness": {"1": 1, "3": 0}}, "minimum": True, "algorithm": "bruteforce",
    }


# Verification

def test_verify_examples():
    """All variables, the empty set and a deletion check."""
    formula = F([1, 2], [-1, 3])
    assert verify_backdoor(formula, formula.variables, STRONG, HORN)
    rejected = verify_backdoor(F([1, 2]), set(), STRONG, HORN)
    assert not rejected and rejected.counterexample == {}
    assert verify_backdoor(COMPLETE_2, {1}, DELETION, RHORN)


def test_verify_weak_certificate():
    """A weak Accept carries the first witnessing assignment."""
    verdict = verify_backdoor(F([1, 2, 3]), {1}, WEAK, HORN)
    assert verdict and verdict.certificate == {1: 1}
    assert not verify_backdoor(F([]), set(), WEAK, HORN)


def test_verify_in_parallel():
    """Worker processes give the same verdict as the sequential loop."""
    formula = F([1, 2, 3], [-1, 2, 4], [3, 4])
    for jobs in (1, 2):
        verdict = verify_backdoor(formula, {2, 3}, STRONG, HORN, jobs=jobs)
        assert verdict
        rejected = verify_backdoor(formula, {4}, STRONG, HORN, jobs=jobs)
        assert rejected.counterexample == {4: 0}


# Worked detection cases

def test_brute_force_examples():
    """Members need nothing, {∅} has no weak backdoor, or-gadgets need one variable."""
    member = F([-1, 2], [-2])
    for kind in BackdoorKind:
        assert detect_bruteforce(member, BackdoorQuery(kind, HORN, 0)).variables == frozenset()
    for base in ALL_CLASSES:
        assert detect_bruteforce(F([]), BackdoorQuery(WEAK, base, 3)) is None
    gadget = or_gadget(CLU, [1, 2])
    found = detect_bruteforce(gadget, BackdoorQuery(WEAK, CLU, 2))
    assert found.variables == {1} and found.witness == {1: 1}


@pytest.mark.parametrize("kind,base,k", [
    (STRONG, HORN, 3), (WEAK, CLU, 2), (DELETION, RHORN, 2), (STRONG, FOREST, 1),
])
def test_brute_force_in_parallel(kind, base, k):
    """Worker processes find the same set and certificate as the sequential loop."""
    formulas = [COMPLETE_2, or_gadget(CLU, [1, 2]), F([1, 2, 3], [-1, 2, 4], [3, 4], [-2, -3])]
    for formula in formulas:
        query = BackdoorQuery(kind, base, k)
        assert detect_bruteforce(formula, query, jobs=2) == detect_bruteforce(formula, query)
        assert detect(formula, kind, base, k, algorithm="bruteforce", jobs=2) == \
            detect_bruteforce(formula, query)


def test_weak_searchtree_examples():
    """Weak detection by obstruction branching."""
    assert detect_weak_searchtree(F([-1, 2]), HORN, 0).variables == frozenset()
    instance = hs_weak_instance(SetSystem.of([{1, 2}, {2, 3}], 1), HORN)
    assert detect_weak_searchtree(instance, HORN, 1).variables == {2}
    found = detect_weak_searchtree(F([1, 2, 3]), HORN, 1)
    assert found.variables == {1} and found.witness == {1: 1}


def test_strong_searchtree_examples():
    """Strong detection by growing B along obstructions."""
    assert detect_strong_searchtree(F([-1, 2]), HORN, 0).variables == frozenset()
    assert detect_strong_searchtree(F([1, 2], [2, 3]), HORN, 1).variables == {2}
    overlapping = F([1], [1, 2], [2])
    assert detect_strong_searchtree(overlapping, CLU, 0) is None
    assert detect_strong_searchtree(overlapping, CLU, 1).variables == {1}


def test_strong_schaefer_examples():
    """Vertex cover of the primal graph, 3-hitting set for 2CNF."""
    assert detect_strong_schaefer(F([-1, -2, 3]), HORN, 0).variables == frozenset()
    assert detect_strong_schaefer(F([1, 2], [2, 3]), HORN, 1).variables == {2}
    wide = F([1, 2, 3, 4])
    assert detect_strong_schaefer(wide, TWO_CNF, 1) is None
    assert detect_strong_schaefer(wide, TWO_CNF, 2).size == 2


def test_zero_one_val_blocking_clauses():
    """A positive clause blocks every strong ZeroVal backdoor, a negative one OneVal."""
    assert detect_strong_schaefer(F([1, -2]), ZERO_VAL, 0).variables == frozenset()
    assert detect_strong_schaefer(F([1, 2]), ZERO_VAL, 2) is None
    assert detect_strong_schaefer(F([-1]), ONE_VAL, 1) is None
    assert oracle_minimum(F([1, 2]), STRONG, ZERO_VAL) is None


def test_obstruction_examples():
    """Overlap and clash obstructions."""
    assert enumerate_obstructions(F([1, 2], [-1, -2])) == []
    overlaps = enumerate_obstructions(F([1], [1, 2]))
    assert [o.kind for o in overlaps] == ["overlap"]
    clashes = enumerate_obstructions(F([1], [-1, 2], [-2]))
    assert any(o.kind == "clash" and o.clauses == (frozenset({1}), frozenset({-1, 2}), frozenset({-2}))
               for o in clashes)


def test_deletion_pairs_and_graph():
    """An overlap obstruction yields the pair {var(C1 ∩ C2), var(C1 Δ C2)}."""
    formula = F([1], [1, 2])
    pairs = deletion_pairs(formula)
    assert [(p.left, p.right) for p in pairs] == [(frozenset({1}), frozenset({2}))]
    assert {frozenset(e) for e in deletion_graph(formula).edges} == {frozenset({var_vertex(1), var_vertex(2)})}


def test_deletion_clu_examples():
    """Members need nothing, one overlap needs one deletion."""
    assert detect_deletion_clu(F([1, 2], [-1, -2]), 0).variables == frozenset()
    assert detect_deletion_clu(F([1], [1, 2]), 1).variables == {1}
    assert detect_deletion_clu(F([1], [1, 2]), 0) is None


def test_deletion_clu_least_cover_on_ties():
    """{1,3}, {1,4} and {2,3} all cover G_F; the least one is returned."""
    formula = F([1, 2], [3, 4], [1, 3])
    assert {frozenset(p.left | p.right) for p in deletion_pairs(formula)} == {
        frozenset({1, 2, 3}), frozenset({1, 3, 4})}
    found = detect_deletion_clu(formula, 2)
    assert found.variables == {1, 3}
    assert found.variables == oracle_minimum(formula, DELETION, CLU)
    assert detect_deletion_clu(formula, 1) is None


def test_deletion_clu_cover_that_breaks_a_clash():
    """Deleting the cover {1} merges a clash into an overlap; the next cover is used."""
    formula = F([1, 2], [-1, 2, 3], [1, 4])
    cover = min_vertex_cover(deletion_graph(formula))
    assert cover == {var_vertex(1)}
    assert not verify_backdoor(formula, {1}, DELETION, CLU)
    assert detect_deletion_clu(formula, 2).variables == {1, 2}
    assert oracle_minimum(formula, DELETION, CLU) == {1, 2}
    assert detect_deletion_clu(formula, 1) is None


def test_deletion_forest_examples():
    """One 4-cycle needs one deletion, two disjoint ones need two."""
    assert detect_deletion_forest(F([1, 2]), 0).variables == frozenset()
    assert detect_deletion_forest(F([1, 2], [-1, -2]), 1).size == 1
    double = F([1, 2], [-1, -2], [3, 4], [-3, -4])
    assert detect_deletion_forest(double, 2).size == 2
    assert detect_deletion_forest(double, 1) is None


def test_deletion_rhorn_examples():
    """Literal-graph cover with a renaming certificate."""
    member = detect_deletion_rhorn(F([1, 2], [-1, 3]), 0)
    assert member.variables == frozenset()
    assert is_member(HORN, rename(F([1, 2], [-1, 3]), member.renaming))
    complete = detect_deletion_rhorn(COMPLETE_2, 1)
    assert complete.size == 1
    remaining = rename(delete_vars(COMPLETE_2, complete.variables), complete.renaming)
    assert is_member(HORN, remaining)
    assert detect_deletion_rhorn(COMPLETE_2, 0) is None
    assert detect_deletion_rhorn(CnfFormula(), 0).variables == frozenset()
    gadget = strong_rhorn_instance(SetSystem.of([{1}], 0))
    assert detect_deletion_rhorn(gadget, 3).size == 1


def test_backdoor_size_parameters():
    """wb, sb and db as smallest sizes."""
    formula = F([1, 2], [2, 3])
    assert backdoor_size(formula, STRONG, HORN) == 1
    assert backdoor_size(formula, WEAK, HORN) == 1
    assert backdoor_size(formula, DELETION, HORN) == 1
    assert backdoor_size(F([1, 2]), STRONG, ZERO_VAL) is None


# Oracle equivalence and cross-kind properties

def test_detectors_match_oracle_sample(universe_sample):
    """Specialized detectors equal brute force for every k on a slice of the universe."""
    for formula in universe_sample:
        check_against_oracle(formula)


@pytest.mark.slow
def test_detectors_match_oracle_universe(universe):
    """Specialized detectors equal brute force for every k on the whole universe."""
    for formula in universe:
        check_against_oracle(formula)


def test_detectors_match_oracle_random_sample(seeded_formulas):
    """Specialized detectors equal brute force on the first random formulas."""
    for formula in seeded_formulas[:12]:
        check_against_oracle(formula, every_k=False)


@pytest.mark.slow
def test_detectors_match_oracle_random(seeded_formulas):
    """Specialized detectors equal brute force on all 200 random formulas."""
    for formula in seeded_formulas:
        check_against_oracle(formula, every_k=False)


def test_schaefer_strong_equals_deletion(universe):
    """For the Schaefer classes strong and deletion minima coincide."""
    for formula in universe:
        n = len(formula.variables)
        for base in SCHAEFER:
            strong = detect(formula, STRONG, base, n)
            deletion = detect(formula, DELETION, base, n)
            assert (strong is None) == (deletion is None)
            if strong is not None:
                assert strong.size == deletion.size


def test_deletion_implies_strong(universe_sample):
    """Deletion backdoors of clause-induced classes are strong backdoors."""
    for formula in universe_sample:
        for base in ALL_CLASSES:
            if not base.clause_induced:
                continue
            found = detect(formula, DELETION, base, len(formula.variables))
            if found is not None:
                assert verify_backdoor(formula, found.variables, STRONG, base)


def test_strong_monotone_for_self_reducible(universe_sample):
    """Supersets of strong backdoors stay strong backdoors."""
    for formula in universe_sample:
        for base in ALL_CLASSES:
            if not base.self_reducible:
                continue
            found = detect(formula, STRONG, base, len(formula.variables))
            if found is None:
                continue
            for extra in formula.variables - found.variables:
                assert verify_backdoor(formula, found.variables | {extra}, STRONG, base)


def test_weak_implies_satisfiable(universe_sample):
    """Any weak backdoor found witnesses satisfiability."""
    for formula in universe_sample:
        for base in ALL_CLASSES + tuple(c.with_empty() for c in ALL_CLASSES):
            if detect(formula, WEAK, base, len(formula.variables)) is not None:
                assert brute_force_sat(formula).satisfiable
