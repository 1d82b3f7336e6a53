"""
Islands of Tractability
=======================

Recognition, polynomial-time solving and (for Clu and Forest) weighted model
counting for every base class, plus the unit-propagation / pure-literal
subsolvers and the empty-clause-detection wrapper C^{}.

Classes are named by an :class:`Island` id wrapped in a :class:`BaseClass`,
which carries the capability metadata the detection algorithms dispatch on.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import networkx as nx

from backdoorkit import graphkit
from backdoorkit.errors import NotInClass, UnsupportedClass
from backdoorkit.formula import (
    Clause, CnfFormula, SatResult, Weighting, clashes, clause_key, clause_vars,
    complete_model, literal_key, literal_polarity, make_literal, reduce, rename,
)

logger = logging.getLogger(__name__)

EMPTY_SUFFIX = "+empty"


class Island(Enum):
    HORN = "horn"
    HORN_MINUS = "horn-minus"
    TWO_CNF = "2cnf"
    ZERO_VAL = "0val"
    ONE_VAL = "1val"
    RHORN = "rhorn"
    FOREST = "forest"
    CLU = "clu"
    UP = "up"
    PL = "pl"
    UPPL = "up-pl"


SCHAEFER = frozenset({
    Island.HORN, Island.HORN_MINUS, Island.TWO_CNF, Island.ZERO_VAL, Island.ONE_VAL,
})
SUBSOLVERS = frozenset({Island.UP, Island.PL, Island.UPPL})
COUNTABLE = frozenset({Island.CLU, Island.FOREST})


@dataclass(frozen=True)
class BaseClass:
    """A base class, optionally extended by empty clause detection."""

    island: Island
    empty_clause_detection: bool = False

    @classmethod
    def parse(cls, token: str) -> "BaseClass":
        """Parse a CLI token such as ``horn`` or ``clu+empty``."""
        name = token.strip().lower()
        wrapped = name.endswith(EMPTY_SUFFIX)
        if wrapped:
            name = name[: -len(EMPTY_SUFFIX)]
        try:
            return cls(Island(name), wrapped)
        except ValueError:
            known = ", ".join(i.value for i in Island)
            raise UnsupportedClass(f"unknown class {token!r} (known: {known})") from None

    @property
    def token(self) -> str:
        return self.island.value + (EMPTY_SUFFIX if self.empty_clause_detection else "")

    def with_empty(self) -> "BaseClass":
        return BaseClass(self.island, True)

    @property
    def is_schaefer(self) -> bool:
        return self.island in SCHAEFER and not self.empty_clause_detection

    @property
    def is_subsolver(self) -> bool:
        return self.island in SUBSOLVERS

    @property
    def clause_induced(self) -> bool:
        return not self.is_subsolver and not self.empty_clause_detection

    @property
    def clause_defined(self) -> bool:
        return self.is_schaefer

    @property
    def self_reducible(self) -> bool:
        return not self.is_subsolver and self.island not in (Island.ZERO_VAL, Island.ONE_VAL)

    @property
    def disjoint_union_closed(self) -> bool:
        return not self.is_subsolver

    @property
    def countable(self) -> bool:
        return self.island in COUNTABLE

    def __str__(self) -> str:
        return self.token


HORN = BaseClass(Island.HORN)
HORN_MINUS = BaseClass(Island.HORN_MINUS)
TWO_CNF = BaseClass(Island.TWO_CNF)
ZERO_VAL = BaseClass(Island.ZERO_VAL)
ONE_VAL = BaseClass(Island.ONE_VAL)
RHORN = BaseClass(Island.RHORN)
FOREST = BaseClass(Island.FOREST)
CLU = BaseClass(Island.CLU)
UP = BaseClass(Island.UP)
PL = BaseClass(Island.PL)
UPPL = BaseClass(Island.UPPL)

ALL_CLASSES: Tuple[BaseClass, ...] = tuple(BaseClass(i) for i in Island)


# Subsolvers

class Outcome(Enum):
    DECIDED_SAT = "decided-sat"
    DECIDED_UNSAT = "decided-unsat"
    GIVE_UP = "give-up"


@dataclass(frozen=True)
class SubsolverStep:
    rule: str  # "unit" or "pure"
    literal: int


@dataclass(frozen=True)
class SubsolverTrace:
    steps: Tuple[SubsolverStep, ...]
    outcome: Outcome
    assignment: Tuple[Tuple[int, int], ...] = ()

    @property
    def decided(self) -> bool:
        return self.outcome is not Outcome.GIVE_UP


def _first_unit(formula: CnfFormula) -> Optional[int]:
    units = [next(iter(c)) for c in formula.clauses if len(c) == 1]
    return min(units, key=literal_key) if units else None


def _first_pure(formula: CnfFormula) -> Optional[int]:
    occurring = {lit for c in formula.clauses for lit in c}
    pure = [lit for lit in occurring if -lit not in occurring]
    return min(pure, key=literal_key) if pure else None


def subsolver_run(which: Island, formula: CnfFormula) -> SubsolverTrace:
    """
    Apply unit propagation and/or pure literal elimination to fixpoint.

    Steps always take the literal of lowest variable id, unit propagation
    before pure literals when both are enabled.
    """
    if which not in SUBSOLVERS:
        raise UnsupportedClass(f"{which.value} is not a subsolver class")
    use_units = which in (Island.UP, Island.UPPL)
    use_pure = which in (Island.PL, Island.UPPL)

    steps: List[SubsolverStep] = []
    assignment: Dict[int, int] = {}
    current = formula
    while True:
        if current.has_empty_clause:
            outcome = Outcome.DECIDED_UNSAT
            break
        if not current.clauses:
            outcome = Outcome.DECIDED_SAT
            break
        lit, rule = None, ""
        if use_units:
            lit, rule = _first_unit(current), "unit"
        if lit is None and use_pure:
            lit, rule = _first_pure(current), "pure"
        if lit is None:
            outcome = Outcome.GIVE_UP
            break
        steps.append(SubsolverStep(rule, lit))
        assignment[abs(lit)] = literal_polarity(lit)
        current = reduce(current, {abs(lit): literal_polarity(lit)})

    logger.debug(f"{which.value} subsolver: {len(steps)} steps, {outcome.value}")
    return SubsolverTrace(tuple(steps), outcome, tuple(sorted(assignment.items())))


# Clu

@dataclass(frozen=True)
class Obstruction:
    """
    A witness that a formula is not a clustering formula.

    ``overlap``: two clauses sharing a literal without clashing.
    ``clash``: (D1, D2, D3) where D1, D2 clash and D2, D3 clash but D1, D3 do not.
    """

    kind: str
    clauses: Tuple[Clause, ...]

    @property
    def variables(self) -> FrozenSet[int]:
        return frozenset(v for c in self.clauses for v in clause_vars(c))


def iter_clu_obstructions(formula: CnfFormula) -> Iterator[Obstruction]:
    """Overlap obstructions by clause pair, then clash obstructions by triple."""
    ordered = formula.ordered
    for c1, c2 in combinations(ordered, 2):
        if c1 & c2 and not clashes(c1, c2):
            yield Obstruction("overlap", (c1, c2))
    for d1, d3 in combinations(ordered, 2):
        if clashes(d1, d3):
            continue
        for d2 in ordered:
            if d2 not in (d1, d3) and clashes(d1, d2) and clashes(d2, d3):
                yield Obstruction("clash", (d1, d2, d3))


def first_clu_obstruction(formula: CnfFormula) -> Optional[Obstruction]:
    return next(iter_clu_obstructions(formula), None)


def clause_components(formula: CnfFormula) -> List[CnfFormula]:
    """Split F into its variable-sharing components."""
    graph = graphkit.incidence_graph(formula)
    parts = []
    for nodes in nx.connected_components(graph):
        clauses = [graph.nodes[n]["clause"] for n in nodes if n[0] == graphkit.CLAUSE]
        parts.append(CnfFormula(frozenset(clauses)))
    parts.sort(key=lambda part: clause_key(part.ordered[0]))
    return parts


def is_hitting(formula: CnfFormula) -> bool:
    """Every two distinct clauses clash."""
    return all(clashes(c1, c2) for c1, c2 in combinations(formula.ordered, 2))


def _is_clu(formula: CnfFormula) -> bool:
    return all(is_hitting(part) for part in clause_components(formula))


# Renamable Horn

def find_renaming(formula: CnfFormula) -> Optional[FrozenSet[int]]:
    """
    Find X with rename(F, X) in Horn, or None if F is not renamable Horn.

    The indicator of variable x shares its id and is true iff x is flipped.
    A literal is positive after renaming exactly when its complement is true
    over the indicators, so forbidding two positive literals in one clause
    yields the 2-clause made of the two literals themselves.
    """
    system = set()
    for clause in formula.clauses:
        for pair in combinations(sorted(clause, key=literal_key), 2):
            system.add(frozenset(pair))
    indicators = CnfFormula(frozenset(system))
    result = graphkit.two_sat(indicators)
    if not result.satisfiable:
        return None
    return frozenset(var for var, value in result.model.items() if value == 1)


# Horn

def _is_horn(formula: CnfFormula) -> bool:
    return all(sum(1 for lit in c if lit > 0) <= 1 for c in formula.clauses)


def _horn_sat(formula: CnfFormula) -> SatResult:
    """Forward chaining from the all-false assignment."""
    true_vars = set()
    changed = True
    while changed:
        changed = False
        for clause in formula.ordered:
            if any((lit > 0) == (abs(lit) in true_vars) for lit in clause):
                continue
            heads = [lit for lit in clause if lit > 0]
            if not heads:
                return SatResult.unsat()
            true_vars.add(heads[0])
            changed = True
    return SatResult.sat({var: int(var in true_vars) for var in formula.variables})


def _flip(model: Dict[int, int], variables) -> Dict[int, int]:
    return {var: (1 - value if var in variables else value) for var, value in model.items()}


# Forest counting

def _forest_count(formula: CnfFormula, weighting: Weighting) -> Fraction:
    """Bottom-up product over the incidence forest, one rooted tree at a time."""
    graph = graphkit.incidence_graph(formula)
    total = Fraction(1)
    for component in nx.connected_components(graph):
        root = min(component)
        parent = nx.dfs_predecessors(graph, root)
        table: Dict[tuple, Tuple[Fraction, Fraction]] = {}

        def clause_factor(node, parent_var: Optional[int], value: int) -> Fraction:
            clause = graph.nodes[node]["clause"]
            by_var = {abs(lit): lit for lit in clause}
            tot, fals = Fraction(1), Fraction(1)
            for child in graph[node]:
                var = child[1]
                if var == parent_var:
                    continue
                a0, a1 = table[child]
                tot *= a0 + a1
                fals *= (a1, a0)[literal_polarity(by_var[var])]
            if parent_var is not None and literal_polarity(by_var[parent_var]) == value:
                return tot
            return tot - fals

        for node in nx.dfs_postorder_nodes(graph, root):
            if node[0] != graphkit.VAR:
                continue
            var = node[1]
            pair = []
            for value in (0, 1):
                acc = weighting.of_literal(make_literal(var, value))
                for child in graph[node]:
                    if child != parent.get(node):
                        acc *= clause_factor(child, var, value)
                pair.append(acc)
            table[node] = (pair[0], pair[1])

        if root[0] == graphkit.VAR:
            total *= sum(table[root])
        else:
            total *= clause_factor(root, None, 0)
    return total


def _clu_count(formula: CnfFormula, weighting: Weighting) -> Fraction:
    total = Fraction(1)
    for part in clause_components(formula):
        falsified = Fraction(0)
        for clause in part.clauses:
            term = Fraction(1)
            for lit in clause:
                term *= weighting.of_literal(-lit)
            falsified += term
        total *= 1 - falsified
    return total


def _self_reduce(base: BaseClass, formula: CnfFormula) -> SatResult:
    """Fix variables in id order, keeping the branch with nonzero count."""
    uniform = Weighting.uniform()
    if count(base, formula, uniform) == 0:
        return SatResult.unsat()
    model: Dict[int, int] = {}
    current = formula
    for var in sorted(formula.variables):
        low = reduce(current, {var: 0})
        if count(base, low, uniform) > 0:
            model[var], current = 0, low
        else:
            model[var], current = 1, reduce(current, {var: 1})
    return SatResult.sat(model)


# Public API

def _base_member(island: Island, formula: CnfFormula) -> bool:
    if island is Island.HORN:
        return _is_horn(formula)
    if island is Island.HORN_MINUS:
        return all(sum(1 for lit in c if lit < 0) <= 1 for c in formula.clauses)
    if island is Island.TWO_CNF:
        return formula.width <= 2
    if island is Island.ZERO_VAL:
        return all(any(lit < 0 for lit in c) for c in formula.clauses)
    if island is Island.ONE_VAL:
        return all(any(lit > 0 for lit in c) for c in formula.clauses)
    if island is Island.RHORN:
        return find_renaming(formula) is not None
    if island is Island.FOREST:
        return graphkit.is_forest(graphkit.incidence_graph(formula))
    if island is Island.CLU:
        return _is_clu(formula)
    return subsolver_run(island, formula).decided


def is_member(base: BaseClass, formula: CnfFormula) -> bool:
    """True iff F lies in the class; wrappers also accept any F containing ∅."""
    if base.empty_clause_detection and formula.has_empty_clause:
        return True
    return _base_member(base.island, formula)


def solve(base: BaseClass, formula: CnfFormula) -> SatResult:
    """
    Decide satisfiability of an in-class formula in polynomial time.

    Args:
        base: The base class F belongs to
        formula: The formula to decide

    Returns:
        Sat with a model over var(F), or Unsat

    Raises:
        NotInClass: If F is not a member of the class
    """
    if not is_member(base, formula):
        raise NotInClass(f"formula is not in {base.token}")
    if formula.has_empty_clause:
        return SatResult.unsat()

    island = base.island
    if island is Island.HORN:
        return _horn_sat(formula)
    if island is Island.HORN_MINUS:
        flipped = _horn_sat(rename(formula, formula.variables))
        if not flipped.satisfiable:
            return flipped
        return SatResult.sat(_flip(flipped.model, formula.variables))
    if island is Island.TWO_CNF:
        return graphkit.two_sat(formula)
    if island is Island.ZERO_VAL:
        return SatResult.sat({var: 0 for var in formula.variables})
    if island is Island.ONE_VAL:
        return SatResult.sat({var: 1 for var in formula.variables})
    if island is Island.RHORN:
        flips = find_renaming(formula)
        result = _horn_sat(rename(formula, flips))
        return SatResult.sat(_flip(result.model, flips)) if result.satisfiable else result
    if island in COUNTABLE:
        return _self_reduce(BaseClass(island), formula)

    trace = subsolver_run(island, formula)
    if trace.outcome is Outcome.DECIDED_UNSAT:
        return SatResult.unsat()
    return SatResult.sat(complete_model(formula, dict(trace.assignment)))


def count(base: BaseClass, formula: CnfFormula, weighting: Weighting) -> Fraction:
    """Weighted model count over var(F) for Clu and Forest members."""
    if not base.countable:
        raise UnsupportedClass(f"weighted counting is not available for {base.token}")
    if not is_member(base, formula):
        raise NotInClass(f"formula is not in {base.token}")
    if formula.has_empty_clause:
        return Fraction(0)
    if base.island is Island.CLU:
        return _clu_count(formula, weighting)
    return _forest_count(formula, weighting)
