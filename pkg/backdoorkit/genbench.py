"""
Benchmark Generators
====================

Formula constructions used as fixtures and benchmark instances: or-gadgets
and the hitting-set reductions built from them, the renamable-Horn gadgets,
the backdoor-tree family, partitioned-clique formulas, the literal-graph
2SAT chain with its exact deletion checkers, and seeded random CNF.

Gadgets take their internal variables from a :class:`FreshVars` counter
that starts above every external id, so output is deterministic.
"""

import logging
import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from backdoorkit import graphkit
from backdoorkit.errors import UnsupportedClass, WidthExceeded
from backdoorkit.formula import (
    CnfFormula, clause_key, is_negative_clause, make_clause, rename,
)
from backdoorkit.islands import BaseClass, Island

logger = logging.getLogger(__name__)

GADGET_ISLANDS = frozenset({
    Island.TWO_CNF, Island.HORN, Island.HORN_MINUS, Island.ZERO_VAL, Island.ONE_VAL,
    Island.RHORN, Island.FOREST, Island.CLU,
})


class FreshVars:
    """Monotone allocator of unused variable ids."""

    def __init__(self, start: int) -> None:
        self._next = max(start, 1)

    @classmethod
    def above(cls, used: Iterable[int]) -> "FreshVars":
        return cls(max(used, default=0) + 1)

    def take(self, count: int = 1) -> List[int]:
        taken = list(range(self._next, self._next + count))
        self._next += count
        return taken

    @property
    def next_id(self) -> int:
        return self._next


@dataclass(frozen=True)
class SetSystem:
    """Hitting-set instance: family of nonempty variable sets and a budget."""

    sets: Tuple[FrozenSet[int], ...]
    k: int

    def __post_init__(self) -> None:
        if any(not s for s in self.sets):
            raise ValueError("hitting-set family contains an empty set")
        if any(v < 1 for s in self.sets for v in s):
            raise ValueError("set elements must be positive variable ids")

    @classmethod
    def of(cls, sets: Iterable[Iterable[int]], k: int) -> "SetSystem":
        return cls(tuple(frozenset(s) for s in sets), k)

    @property
    def universe(self) -> FrozenSet[int]:
        return frozenset(v for s in self.sets for v in s)

    def is_hit_by(self, hitting: AbstractSet[int]) -> bool:
        return all(s & hitting for s in self.sets)


@dataclass(frozen=True)
class PartiteGraph:
    parts: Tuple[FrozenSet[int], ...]
    edges: FrozenSet[FrozenSet[int]]

    @classmethod
    def of(cls, parts: Iterable[Iterable[int]], edges: Iterable[Tuple[int, int]]) -> "PartiteGraph":
        return cls(tuple(frozenset(p) for p in parts), frozenset(frozenset(e) for e in edges))

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges


def _island(base) -> Island:
    return base.island if isinstance(base, BaseClass) else base


def or_gadget(base, external: Iterable[int], fresh: Optional[FreshVars] = None) -> CnfFormula:
    """
    The or-gadget G(C) over external variables X.

    Setting any x ∈ X to 1 puts the gadget into the class, while the gadget
    itself is not in the class. HornMinus and OneVal use the Horn / 0-Val
    gadget with every variable flipped, so there x = 0 is the satisfying choice.

    Raises:
        UnsupportedClass: For classes without a gadget
    """
    island = _island(base)
    xs = sorted(set(external))
    if not xs:
        raise ValueError("or-gadget needs at least one external variable")
    if island not in GADGET_ISLANDS:
        raise UnsupportedClass(f"no or-gadget for {island.value}")
    fresh = fresh or FreshVars.above(xs)

    if island in (Island.HORN_MINUS, Island.ONE_VAL):
        plain = or_gadget(Island.HORN, xs, fresh)
        return rename(plain, plain.variables)

    if island is Island.TWO_CNF:
        z1, z2 = fresh.take(2)
        return CnfFormula.of(xs + [z1, z2])
    if island in (Island.HORN, Island.ZERO_VAL):
        (z1,) = fresh.take(1)
        return CnfFormula.of(xs + [z1])
    if island is Island.RHORN:
        z1, z2 = fresh.take(2)
        return CnfFormula.of(xs + [-z1, -z2], [z1, -z2], [-z1, z2], [z1, z2])
    if island is Island.FOREST:
        z1, z2 = fresh.take(2)
        return CnfFormula.of(xs + [-z1, -z2], [z1, z2])
    (z1,) = fresh.take(1)
    return CnfFormula.of(xs + [z1], [z1])


def _copies(system: SetSystem, build) -> CnfFormula:
    fresh = FreshVars.above(system.universe)
    clauses = set()
    for members in system.sets:
        for _ in range(system.k + 1):
            clauses |= build(sorted(members), fresh).clauses
    return CnfFormula(frozenset(clauses))


def hs_weak_instance(system: SetSystem, base) -> CnfFormula:
    """k+1 fresh copies of or_gadget(C, S_i) for every set S_i."""
    return _copies(system, lambda xs, fresh: or_gadget(base, xs, fresh))


def rhorn_weak_gadget(external: Sequence[int], fresh: Optional[FreshVars] = None) -> CnfFormula:
    """
    {z_i, ¬x_i, ¬z_{i+1}} for i = 1..s, plus {¬z_1, z_{s+1}}, {¬z_1, ¬z_{s+1}},
    {z_1, z_{s+1}}: the complete formula on z_1, z_{s+1} with {z_1, ¬z_{s+1}}
    subdivided by the external variables.
    """
    xs = sorted(set(external))
    if not xs:
        raise ValueError("gadget needs at least one external variable")
    fresh = fresh or FreshVars.above(xs)
    zs = fresh.take(len(xs) + 1)
    chain = [[zs[i], -x, -zs[i + 1]] for i, x in enumerate(xs)]
    first, last = zs[0], zs[-1]
    return CnfFormula.of(*chain, [-first, last], [-first, -last], [first, last])


def rhorn_weak_instance(system: SetSystem) -> CnfFormula:
    """3CNF hitting-set reduction for weak RHorn; witnesses set the hitting set to 0."""
    return _copies(system, rhorn_weak_gadget)


def strong_rhorn_instance(system: SetSystem) -> CnfFormula:
    """
    k+1 gadgets per set S_i, each {S_i ∪ {z1, z2}, {z1, ¬z2}, {¬z1, z2}, ¬V ∪ {¬z1, ¬z2}}
    with V the union of all sets.
    """
    negated_union = [-v for v in sorted(system.universe)]

    def gadget(xs: List[int], fresh: FreshVars) -> CnfFormula:
        z1, z2 = fresh.take(2)
        return CnfFormula.of(xs + [z1, z2], [z1, -z2], [-z1, z2], negated_union + [-z1, -z2])

    return _copies(system, gadget)


def backdoor_tree_family(n: int) -> CnfFormula:
    """
    2n clauses over x_1..x_2n (ids 1..2n) and y_1..y_n (ids 2n+1..3n):
    {y_i, x_{2i-1}} and {y_i, x_{2i}}, each completed by ¬x_j for every other j.
    """
    if n < 1:
        raise ValueError("family index n must be at least 1")
    xs = list(range(1, 2 * n + 1))
    clauses = []
    for i in range(1, n + 1):
        y = 2 * n + i
        for positive in (2 * i - 1, 2 * i):
            clauses.append([y] + [x if x == positive else -x for x in xs])
    return CnfFormula.of(*clauses)


def family_y_vars(n: int) -> FrozenSet[int]:
    return frozenset(range(2 * n + 1, 3 * n + 1))


def pclique_instance(graph: PartiteGraph) -> CnfFormula:
    """The clause V_i per part and {¬u, ¬v} for every non-adjacent pair of distinct vertices."""
    if any(not part for part in graph.parts):
        raise ValueError("every part must be nonempty")
    vertices = sorted(set().union(*graph.parts)) if graph.parts else []
    clauses = [sorted(part) for part in graph.parts]
    for u, v in combinations(vertices, 2):
        if not graph.adjacent(u, v):
            clauses.append([-u, -v])
    return CnfFormula.of(*clauses)


def has_partitioned_clique(graph: PartiteGraph) -> bool:
    """Brute force: one vertex per part, pairwise adjacent."""
    def extend(index: int, chosen: List[int]) -> bool:
        if index == len(graph.parts):
            return True
        return any(
            all(graph.adjacent(v, u) for u in chosen) and extend(index + 1, chosen + [v])
            for v in sorted(graph.parts[index])
        )
    return extend(0, [])


# Literal-graph 2SAT chain

def literal_var(var: int, polarity: int) -> int:
    """Variable id of literal x^e in the chain formulas: x_0 = 2x-1, x_1 = 2x."""
    return 2 * var - 1 + polarity


def lemma_2sat_chain(formula: CnfFormula, k: int,
                     variables: Optional[Iterable[int]] = None) -> Tuple[CnfFormula, CnfFormula]:
    """
    Build (F2, F2*) from the literal graph of F.

    F2 has a negative clause {¬x_0, ¬x_1} per matching edge and a positive
    clause per co-occurrence edge. F2* replaces each positive clause
    {a, b} by {a, z^i}, {¬z^i, b} for i = 1..k+1 with fresh z.
    """
    lemma = graphkit.lemma_graph(formula, variables)
    negative, positive = [], []
    for u, v, matched in sorted(lemma.graph.edges(data="matched")):
        a, b = literal_var(u[1], u[2]), literal_var(v[1], v[2])
        (negative if matched else positive).append(sorted((a, b)))
    f2 = CnfFormula.of(*([[-a, -b] for a, b in negative] + positive))

    fresh = FreshVars.above(f2.variables)
    mixed = [[-a, -b] for a, b in negative]
    for a, b in positive:
        for z in fresh.take(k + 1):
            mixed.extend(([a, z], [-z, b]))
    return f2, CnfFormula.of(*mixed)


def _contradiction(formula: CnfFormula) -> Optional[FrozenSet[FrozenSet[int]]]:
    """Clauses along x ⇝ ¬x ⇝ x in the implication graph, or None if satisfiable."""
    graph = graphkit.implication_graph(formula)
    for var in sorted(formula.variables):
        try:
            path = nx.shortest_path(graph, var, -var) + nx.shortest_path(graph, -var, var)[1:]
        except nx.NetworkXNoPath:
            continue
        return frozenset(frozenset((-u, v)) for u, v in zip(path, path[1:]))
    return None


def _min_deletions(formula: CnfFormula, deletable) -> Optional[int]:
    """
    Fewest deletable clauses to drop from a 2CNF formula to make it satisfiable.

    Every solution drops a deletable clause from each contradiction cycle, so
    branching on the clauses of one cycle is exact.
    """
    # largest budget known to be too small for each clause set
    too_small: Dict[FrozenSet[FrozenSet[int]], int] = {}

    def fixable(current: FrozenSet[FrozenSet[int]], budget: int) -> bool:
        if too_small.get(current, -1) >= budget:
            return False
        cycle = _contradiction(CnfFormula(current))
        if cycle is None:
            return True
        if budget > 0 and any(
            fixable(current - {clause}, budget - 1)
            for clause in sorted(cycle, key=clause_key) if deletable(clause)
        ):
            return True
        too_small[current] = budget
        return False

    if formula.width > 2:
        raise WidthExceeded("deletion checks take 2CNF formulas only")
    if formula.has_empty_clause:
        return None
    for size in range(len(formula) + 1):
        if fixable(formula.clauses, size):
            return size
    return None


def min_negative_deletions(f2: CnfFormula) -> Optional[int]:
    """Fewest negative clauses whose removal makes F2 satisfiable."""
    return _min_deletions(f2, is_negative_clause)


def min_clause_deletions(formula: CnfFormula) -> Optional[int]:
    """Fewest clauses whose removal makes a 2CNF formula satisfiable."""
    return _min_deletions(formula, lambda clause: True)


# Random formulas

def random_cnf(n: int, m: int, width: int, seed: int) -> CnfFormula:
    """
    m distinct clauses over variables 1..n, each with 1..width literals on
    distinct variables, drawn from ``random.Random(seed)``.

    Raises:
        ValueError: If m distinct clauses cannot exist for n and width
    """
    if n < 0 or m < 0 or width < 0:
        raise ValueError("n, m and width must be non-negative")
    if m and (n == 0 or width == 0):
        raise ValueError(f"cannot draw {m} nonempty clauses over {n} variables of width {width}")
    top = min(width, n)
    available = sum(comb(n, w) * 2 ** w for w in range(1, top + 1))
    if m > available:
        raise ValueError(f"only {available} distinct clauses exist, {m} requested")

    rng = random.Random(seed)
    clauses: Dict[FrozenSet[int], None] = {}
    while len(clauses) < m:
        size = rng.randint(1, top)
        chosen = rng.sample(range(1, n + 1), size)
        clause = make_clause(v if rng.random() < 0.5 else -v for v in chosen)
        clauses.setdefault(clause, None)
    logger.debug(f"random_cnf(n={n}, m={m}, width={width}, seed={seed})")
    return CnfFormula(frozenset(clauses), declared_vars=n)
