from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given

from backdoorkit.errors import NotInClass, UnsupportedClass
from backdoorkit.formula import (
    CnfFormula, Weighting, brute_force_count, brute_force_sat, clause_vars,
    iter_assignments, reduce, rename, satisfies,
)
from backdoorkit.genbench import or_gadget
from backdoorkit.islands import (
    ALL_CLASSES, CLU, FOREST, HORN, ONE_VAL, PL, RHORN, TWO_CNF, UP, UPPL,
    ZERO_VAL, BaseClass, Island, Outcome, clause_components, count,
    find_renaming, first_clu_obstruction, is_hitting, is_member, solve,
    subsolver_run,
)
from strategies import cnf_formulas

F = CnfFormula.of
WRAPPED = tuple(c.with_empty() for c in ALL_CLASSES)


# Definition-level checkers, written independently of the library

def _positives(clause):
    return sum(1 for lit in clause if lit > 0)


def _is_forest_by_counting(formula):
    """A graph is a forest iff |E| = |V| - #components (union-find)."""
    parent = {}

    def find(node):
        while parent.setdefault(node, node) != node:
            node = parent[node]
        return node

    edges = 0
    for clause in formula.clauses:
        find(("c", clause))
        for lit in clause:
            edges += 1
            a, b = find(("c", clause)), find(("v", abs(lit)))
            if a != b:
                parent[a] = b
    components = len({find(node) for node in list(parent)})
    return edges == len(parent) - components


def _is_clu_by_definition(formula):
    """Variable-disjoint union of hitting formulas, components grown by hand."""
    remaining = list(formula.clauses)
    while remaining:
        component = [remaining.pop()]
        grown = True
        while grown:
            grown = False
            for clause in list(remaining):
                if any(clause_vars(clause) & clause_vars(c) for c in component):
                    component.append(clause)
                    remaining.remove(clause)
                    grown = True
        if any(not any(-lit in c2 for lit in c1) for c1, c2 in combinations(component, 2)):
            return False
    return True


def _subsolver_decides(which, formula):
    """Highest-variable-first propagation; confluence makes the order irrelevant."""
    current = formula
    while current.clauses and not current.has_empty_clause:
        literals = {lit for c in current.clauses for lit in c}
        units = [next(iter(c)) for c in current.clauses if len(c) == 1] if which != Island.PL else []
        pure = [lit for lit in literals if -lit not in literals] if which != Island.UP else []
        pick = max(units or pure, key=abs, default=None)
        if pick is None:
            return False
        current = reduce(current, {abs(pick): int(pick > 0)})
    return True


def reference_member(base, formula):
    if base.empty_clause_detection and formula.has_empty_clause:
        return True
    island = base.island
    clauses = formula.clauses
    if island is Island.HORN:
        return all(_positives(c) <= 1 for c in clauses)
    if island is Island.HORN_MINUS:
        return all(len(c) - _positives(c) <= 1 for c in clauses)
    if island is Island.TWO_CNF:
        return all(len(c) <= 2 for c in clauses)
    if island is Island.ZERO_VAL:
        return all(_positives(c) < len(c) for c in clauses)
    if island is Island.ONE_VAL:
        return all(_positives(c) > 0 for c in clauses)
    if island is Island.RHORN:
        variables = sorted(formula.variables)
        return any(
            all(_positives(c) <= 1 for c in rename(formula, set(flips)).clauses)
            for size in range(len(variables) + 1) for flips in combinations(variables, size)
        )
    if island is Island.FOREST:
        return _is_forest_by_counting(formula)
    if island is Island.CLU:
        return _is_clu_by_definition(formula)
    return _subsolver_decides(island, formula)


# Capability metadata

def test_capability_flags():
    """Clause-induced, clause-defined, self-reducible and countable per class."""
    schaefer = {Island.HORN, Island.HORN_MINUS, Island.TWO_CNF, Island.ZERO_VAL, Island.ONE_VAL}
    subsolvers = {Island.UP, Island.PL, Island.UPPL}
    for base in ALL_CLASSES:
        assert base.clause_induced == (base.island not in subsolvers)
        assert base.clause_defined == (base.island in schaefer)
        assert base.disjoint_union_closed == (base.island not in subsolvers)
        assert base.countable == (base.island in (Island.CLU, Island.FOREST))
    non_subsolvers = [b for b in ALL_CLASSES if b.island not in subsolvers]
    assert [b for b in non_subsolvers if not b.self_reducible] == [ZERO_VAL, ONE_VAL]


@pytest.mark.parametrize("token, expected", [
    ("horn", BaseClass(Island.HORN)),
    ("2CNF", BaseClass(Island.TWO_CNF)),
    ("clu+empty", BaseClass(Island.CLU, True)),
    ("up-pl", BaseClass(Island.UPPL)),
])
def test_parse_class_tokens(token, expected):
    """Lowercase ids with the optional +empty suffix."""
    assert BaseClass.parse(token) == expected
    assert BaseClass.parse(expected.token) == expected


def test_parse_unknown_class():
    """Unknown tokens raise UnsupportedClass."""
    with pytest.raises(UnsupportedClass):
        BaseClass.parse("affine")


# Membership

def test_membership_examples():
    """Worked membership cases."""
    assert is_member(HORN, F([-1, -2, 3]))
    assert not is_member(CLU, F([1], [1, 2]))
    assert not is_member(RHORN, or_gadget(RHORN, [1]))
    assert is_member(CLU, CnfFormula())


def test_empty_clause_membership():
    """∅ is a member everywhere except ZeroVal and OneVal; wrappers accept it."""
    empty = F([])
    for base in ALL_CLASSES:
        expected = base not in (ZERO_VAL, ONE_VAL)
        assert is_member(base, empty) == expected, base
        assert is_member(base.with_empty(), empty)
    for base in ALL_CLASSES:
        assert is_member(base, CnfFormula())


def test_membership_matches_definitions(universe):
    """is_member agrees with the definition-level checkers on the tiny universe."""
    for formula in universe:
        for base in ALL_CLASSES + WRAPPED:
            assert is_member(base, formula) == reference_member(base, formula), (base, formula)


def test_clause_defined_membership(universe_sample):
    """Clause-defined classes decide membership clause by clause."""
    for formula in universe_sample:
        for base in ALL_CLASSES:
            if base.clause_defined:
                per_clause = all(is_member(base, F(c)) for c in formula.clauses)
                assert is_member(base, formula) == per_clause


def test_clause_induced_closure(universe_sample):
    """Members of clause-induced classes keep every subset of their clauses."""
    for formula in universe_sample:
        for base in ALL_CLASSES:
            if base.clause_induced and is_member(base, formula):
                for size in range(len(formula)):
                    for part in combinations(formula.ordered, size):
                        assert is_member(base, CnfFormula(frozenset(part)))


def test_self_reducible_closure(universe_sample):
    """Members of self-reducible classes stay members under any reduction."""
    for formula in universe_sample:
        for base in ALL_CLASSES:
            if not (base.self_reducible and is_member(base, formula)):
                continue
            variables = sorted(formula.variables)
            for size in range(1, len(variables) + 1):
                for domain in combinations(variables, size):
                    for tau in iter_assignments(domain):
                        assert is_member(base, reduce(formula, tau)), (base, formula, tau)


def test_zero_val_is_not_self_reducible():
    """A ZeroVal member can reduce to {∅}."""
    formula = F([-1])
    assert is_member(ZERO_VAL, formula)
    assert not is_member(ZERO_VAL, reduce(formula, {1: 1}))


@given(cnf_formulas(max_vars=3, max_clauses=3), cnf_formulas(max_vars=3, max_clauses=3))
def test_disjoint_union_closure(first, second):
    """Members with disjoint variables stay members together."""
    shifted = CnfFormula.from_clauses([[lit + 10 if lit > 0 else lit - 10 for lit in c] for c in second.clauses])
    union = first.union(shifted)
    for base in ALL_CLASSES:
        if base.disjoint_union_closed and is_member(base, first) and is_member(base, shifted):
            assert is_member(base, union), (base, union)


def test_clu_two_way_recognition(universe):
    """No obstruction iff the formula splits into hitting components."""
    for formula in universe:
        obstruction_free = first_clu_obstruction(formula) is None
        decomposed = all(is_hitting(part) for part in clause_components(formula))
        assert obstruction_free == decomposed


# Renaming

def test_find_renaming_examples():
    """Horn needs no flips, {x, y} one flip, the complete formula none works."""
    assert find_renaming(F([-1, 2])) == frozenset()
    assert find_renaming(F([1, 2])) in ({1}, {2})
    assert find_renaming(F([1, 2], [-1, 2], [1, -2], [-1, -2])) is None


def test_find_renaming_yields_horn(universe):
    """A returned renaming always produces a Horn formula."""
    for formula in universe:
        flips = find_renaming(formula)
        if flips is not None:
            assert is_member(HORN, rename(formula, flips))


# Solving

def test_solve_examples():
    """Worked solving cases."""
    assert solve(ZERO_VAL, F([-1], [-1, -2])).model == {1: 0, 2: 0}
    assert not solve(TWO_CNF, F([1, 2], [-1, 2], [1, -2], [-1, -2])).satisfiable
    assert solve(FOREST, F([1, 2])).satisfiable
    assert solve(ONE_VAL, F([1, -2])).model == {1: 1, 2: 1}


def test_solve_outside_class():
    """solve checks its precondition."""
    with pytest.raises(NotInClass):
        solve(HORN, F([1, 2]))


def test_solve_matches_brute_force(universe):
    """On members, solve agrees with brute force and its models satisfy F."""
    for formula in universe:
        expected = brute_force_sat(formula).satisfiable
        for base in ALL_CLASSES + WRAPPED:
            if not is_member(base, formula):
                continue
            result = solve(base, formula)
            assert result.satisfiable == expected, (base, formula)
            if result.satisfiable:
                assert set(result.model) >= formula.variables
                assert satisfies(formula, result.model)


# Subsolvers

def test_subsolver_examples():
    """Unit chains, stuck formulas and pure literals."""
    assert subsolver_run(Island.UP, F([1], [-1, 2])).outcome is Outcome.DECIDED_SAT
    assert subsolver_run(Island.UP, F([1, 2], [-1, -2])).outcome is Outcome.GIVE_UP
    assert subsolver_run(Island.PL, F([1, 2])).outcome is Outcome.DECIDED_SAT
    assert subsolver_run(Island.UP, F([1], [-1])).outcome is Outcome.DECIDED_UNSAT


def test_subsolver_trace_order():
    """Lowest variable first, units before pure literals."""
    trace = subsolver_run(Island.UPPL, F([2], [-2, 3], [1, 3, 4]))
    assert [(s.rule, s.literal) for s in trace.steps] == [("unit", 2), ("unit", 3)]
    trace = subsolver_run(Island.UPPL, F([1, 2], [-1, 2], [3, -2]))
    assert trace.steps[0].rule == "pure" and trace.steps[0].literal == 3


def test_subsolver_membership():
    """Membership means the run decides."""
    assert is_member(UP, F([1], [-1, 2]))
    assert not is_member(UP, F([1, 2], [-1, -2]))
    assert is_member(PL, F([1, 2], [1, -2]))
    assert is_member(UPPL, F([1], [-1, 2], [3, 4]))


def test_pl_member_reduces_out_of_class():
    """PL is not self-reducible: fixing x = 0 strands {y}, {¬y}."""
    formula = F([1, 2], [1, -2])
    assert is_member(PL, formula)
    assert not is_member(PL, reduce(formula, {1: 0}))


def test_subsolver_rejects_other_classes():
    """Only UP, PL and UP+PL are subsolvers."""
    with pytest.raises(UnsupportedClass):
        subsolver_run(Island.HORN, F([1]))


# Counting

def test_count_examples():
    """Worked counting cases under uniform weights."""
    uniform = Weighting.uniform()
    assert count(CLU, CnfFormula(), uniform) == 1
    assert count(CLU, F([1, 2], [-1, -2]), uniform) == Fraction(1, 2)
    assert count(FOREST, F([1, 2]), uniform) == Fraction(3, 4)
    assert count(FOREST, F([]), uniform) == 0


def test_count_rejects_other_classes():
    """Counting is defined for Clu and Forest only."""
    with pytest.raises(UnsupportedClass):
        count(HORN, F([1]), Weighting.uniform())
    with pytest.raises(NotInClass):
        count(CLU, F([1], [1, 2]), Weighting.uniform())


@pytest.mark.parametrize("weighting", [
    Weighting.uniform(),
    Weighting({1: Fraction(1, 3), 2: Fraction(3, 4), 3: Fraction(0)}),
    Weighting({1: Fraction(1), 2: Fraction(2, 7)}, Fraction(1, 5)),
])
def test_count_matches_brute_force(universe, weighting):
    """Clu and Forest counts equal the enumerated weighted count exactly."""
    for formula in universe:
        expected = brute_force_count(formula, weighting)
        for base in (CLU, FOREST, CLU.with_empty(), FOREST.with_empty()):
            if is_member(base, formula):
                assert count(base, formula, weighting) == expected, (base, formula)


@given(cnf_formulas(max_vars=6, max_clauses=6))
def test_forest_count_on_larger_forests(formula):
    """Forest counting on random members with more variables."""
    if is_member(FOREST, formula):
        assert count(FOREST, formula, Weighting.uniform()) == brute_force_count(formula, Weighting.uniform())
