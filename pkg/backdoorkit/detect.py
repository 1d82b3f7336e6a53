"""
Backdoor Detection
==================

Weak, strong and deletion backdoor-set detection for the base classes in
``backdoorkit.islands``:

    bruteforce          every (kind, class); budget-guarded subset enumeration
    weak-searchtree     weak, clause-defined classes and Clu
    strong-searchtree   strong, clause-defined classes and Clu
    strong-schaefer     strong, Schaefer classes (vertex cover / 3-hitting set)
    deletion-schaefer   deletion, Schaefer classes (same sets as strong)
    deletion-clu        deletion, Clu (vertex cover of the deletion-pair graph)
    deletion-forest     deletion, Forest (variable feedback vertex set)
    deletion-rhorn      deletion, RHorn (vertex cover of the literal graph)

All detectors return a minimum backdoor set of size at most k, the
lexicographically least one where the method allows it, or None.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb
from multiprocessing import Pool, cpu_count
from typing import (
    Any, Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple,
)

import networkx as nx
from tqdm import tqdm

from backdoorkit import graphkit
from backdoorkit.errors import (
    BudgetExceeded, InvalidBackdoor, UnsupportedClass, UnsupportedQuery,
)
from backdoorkit.formula import (
    CnfFormula, clause_vars, delete_vars, is_negative_clause,
    is_positive_clause, iter_assignments, reduce, rename,
)
from backdoorkit.islands import (
    CLU, FOREST, HORN, RHORN, BaseClass, Island, Obstruction, first_clu_obstruction,
    is_member, iter_clu_obstructions, solve,
)

logger = logging.getLogger(__name__)

BRUTEFORCE_BUDGET = 2 ** 24


class BackdoorKind(Enum):
    WEAK = "weak"
    STRONG = "strong"
    DELETION = "deletion"


def _deletion_undefined(base: BaseClass) -> str:
    if base.is_subsolver:
        return "deletion undefined for subsolver classes"
    return f"deletion undefined for {base.token}: the class is not clause-induced"


@dataclass(frozen=True)
class BackdoorQuery:
    kind: BackdoorKind
    base: BaseClass
    k: int

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"budget k must be non-negative, got {self.k}")
        if self.kind is BackdoorKind.DELETION and not self.base.clause_induced:
            raise UnsupportedQuery(_deletion_undefined(self.base))


@dataclass(frozen=True)
class BackdoorResult:
    """A backdoor set with its certificate and the algorithm that found it."""

    kind: BackdoorKind
    variables: FrozenSet[int]
    algorithm: str
    witness: Optional[Dict[int, int]] = None
    renaming: Optional[FrozenSet[int]] = None
    minimum: bool = True

    @property
    def size(self) -> int:
        return len(self.variables)

    def to_dict(self) -> Dict[str, Any]:
        certificate: Dict[str, Any] = {}
        if self.witness is not None:
            certificate["witness"] = {str(v): self.witness[v] for v in sorted(self.witness)}
        if self.renaming is not None:
            certificate["renaming"] = sorted(self.renaming)
        return {
            "kind": self.kind.value,
            "variables": sorted(self.variables),
            "size": self.size,
            "certificate": certificate,
            "minimum": self.minimum,
            "algorithm": self.algorithm,
        }


@dataclass(frozen=True)
class Verdict:
    """Accept with an optional witness, or Reject with a counterexample."""

    accepted: bool
    certificate: Optional[Dict[int, int]] = None
    counterexample: Optional[Dict[int, int]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class DeletionPair:
    left: FrozenSet[int]
    right: FrozenSet[int]
    source: Optional[Obstruction] = field(default=None, compare=False, repr=False)


# Worker pool

def parallel_map(func: Callable, items: Iterable, jobs: int = 1) -> Iterator:
    """
    Ordered map, fanned out to a process pool when jobs > 1.

    ``jobs == 0`` uses every core. Results arrive in input order, so callers
    that stop at the first hit behave exactly as the sequential loop.
    """
    if jobs == 1:
        yield from map(func, items)
        return
    workers = cpu_count() if jobs <= 0 else jobs
    with Pool(workers) as pool:
        yield from pool.imap(func, items)


def _reduct_member(args: Tuple[CnfFormula, BaseClass, Dict[int, int]]) -> bool:
    formula, base, tau = args
    return is_member(base, reduce(formula, tau))


def _reduct_solvable(args: Tuple[CnfFormula, BaseClass, Dict[int, int]]) -> bool:
    formula, base, tau = args
    reduct = reduce(formula, tau)
    return is_member(base, reduct) and solve(base, reduct).satisfiable


# Verification

def verify_backdoor(formula: CnfFormula, variables: Iterable[int], kind: BackdoorKind,
                    base: BaseClass, jobs: int = 1) -> Verdict:
    """
    Check a claimed backdoor set against its definition.

    Args:
        formula: The formula
        variables: The claimed backdoor set
        kind: weak, strong or deletion
        base: The base class
        jobs: Worker processes for the 2^|B| reductions

    Returns:
        Verdict; a weak Accept carries the first witness τ in assignment order,
        a strong Reject the first τ whose reduct leaves the class

    Raises:
        UnsupportedQuery: Deletion check on a class that is not clause-induced
    """
    backdoor = frozenset(variables)
    if kind is BackdoorKind.DELETION:
        if not base.clause_induced:
            raise UnsupportedQuery(_deletion_undefined(base))
        if is_member(base, delete_vars(formula, backdoor)):
            return Verdict(True)
        return Verdict(False, reason=f"F - B is not in {base.token}")

    taus = list(iter_assignments(backdoor))
    tasks = [(formula, base, tau) for tau in taus]
    if kind is BackdoorKind.STRONG:
        for tau, ok in zip(taus, parallel_map(_reduct_member, tasks, jobs)):
            if not ok:
                return Verdict(False, counterexample=tau, reason=f"reduct leaves {base.token}")
        return Verdict(True)

    for tau, ok in zip(taus, parallel_map(_reduct_solvable, tasks, jobs)):
        if ok:
            return Verdict(True, certificate=tau)
    return Verdict(False, reason=f"no assignment gives a satisfiable reduct in {base.token}")


# Obstructions

def enumerate_obstructions(formula: CnfFormula) -> List[Obstruction]:
    """All overlap and clash obstructions; empty iff F is a clustering formula."""
    return list(iter_clu_obstructions(formula))


def _obstruction_vars(base: BaseClass, formula: CnfFormula) -> Optional[FrozenSet[int]]:
    """Variables of the first obstruction to membership, or None if F is in the class."""
    if base.clause_defined:
        for clause in formula.ordered:
            if not is_member(base, CnfFormula(frozenset([clause]))):
                return clause_vars(clause)
        return None
    if base == CLU:
        found = first_clu_obstruction(formula)
        return None if found is None else found.variables
    raise UnsupportedClass(f"no bounded obstructions for {base.token}")


def _require_obstructions(base: BaseClass) -> None:
    if not (base.clause_defined or base == CLU):
        raise UnsupportedClass(f"search tree needs a clause-defined class or clu, got {base.token}")


# Bounded search over variable sets

# Maps a candidate set to the variables of an obstruction it leaves, or None.
ObstructionCheck = Callable[[FrozenSet[int]], Optional[FrozenSet[int]]]


def _lex(variables: FrozenSet[int]) -> Tuple[int, ...]:
    return tuple(sorted(variables))


def _branch_min(check: ObstructionCheck, k: int) -> Optional[FrozenSet[int]]:
    """
    Lexicographically least smallest S with check(S) None and |S| ≤ k.

    ``check`` returns the candidate variables one of which every acceptable
    superset of S must add, or None when S itself is acceptable.
    """
    checked: Dict[FrozenSet[int], Optional[FrozenSet[int]]] = {}
    for size in range(k + 1):
        found: Set[FrozenSet[int]] = set()
        seen: Set[FrozenSet[int]] = set()
        stack = [frozenset()]
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            if current not in checked:
                checked[current] = check(current)
            candidates = checked[current]
            if candidates is None:
                found.add(current)
            elif len(current) < size:
                stack.extend(current | {v} for v in sorted(candidates - current, reverse=True))
        if found:
            logger.debug(f"Search tree: {len(found)} sets of size {size}, {len(seen)} nodes")
            return min(found, key=_lex)
    return None


def _brute_force_estimate(n: int, k: int, kind: BackdoorKind) -> int:
    per_set = (lambda i: 1) if kind is BackdoorKind.DELETION else (lambda i: 2 ** i)
    return sum(comb(n, i) * per_set(i) for i in range(min(n, k) + 1))


def _check_candidate(args: Tuple[CnfFormula, Tuple[int, ...], BackdoorKind, BaseClass],
                     ) -> Tuple[Tuple[int, ...], Verdict]:
    formula, subset, kind, base = args
    return subset, verify_backdoor(formula, subset, kind, base)


def detect_bruteforce(formula: CnfFormula, query: BackdoorQuery, force: bool = False,
                      progress: bool = False, jobs: int = 1) -> Optional[BackdoorResult]:
    """
    Enumerate candidate sets by size, then in lexicographic order.

    With ``jobs > 1`` the candidates of each size are checked in a worker
    pool; results are consumed in order, so the answer is the sequential one.

    Raises:
        BudgetExceeded: If Σ C(n,i)·2^i over i ≤ k exceeds BRUTEFORCE_BUDGET
            and ``force`` is not set
    """
    variables = sorted(formula.variables)
    limit = min(query.k, len(variables))
    estimate = _brute_force_estimate(len(variables), limit, query.kind)
    logger.debug(f"Brute force {query.kind.value} {query.base.token}: {estimate} candidates")
    if estimate > BRUTEFORCE_BUDGET and not force:
        raise BudgetExceeded(f"brute-force {query.kind.value} detection", estimate,
                             BRUTEFORCE_BUDGET)

    total = sum(comb(len(variables), i) for i in range(limit + 1))
    with tqdm(total=total, desc="Candidate sets", disable=not progress, leave=False) as bar:
        for size in range(limit + 1):
            tasks = ((formula, subset, query.kind, query.base)
                     for subset in combinations(variables, size))
            for subset, verdict in parallel_map(_check_candidate, tasks, jobs):
                bar.update(1)
                if verdict:
                    return BackdoorResult(query.kind, frozenset(subset), "bruteforce",
                                          witness=verdict.certificate)
    return None


def detect_weak_searchtree(formula: CnfFormula, base: BaseClass,
                           k: int) -> Optional[BackdoorResult]:
    """
    Weak detection by branching on the variables of an obstruction and both
    of their values. Exponential in clause width times k on unbounded-width input.
    """
    _require_obstructions(base)
    for depth in range(k + 1):
        domains: Set[FrozenSet[int]] = set()
        seen: Set[Tuple[Tuple[int, int], ...]] = set()
        stack: List[Dict[int, int]] = [{}]
        while stack:
            tau = stack.pop()
            key = tuple(sorted(tau.items()))
            if key in seen:
                continue
            seen.add(key)
            reduct = reduce(formula, tau)
            obstruction = _obstruction_vars(base, reduct)
            if obstruction is None:
                if solve(base, reduct).satisfiable:
                    domains.add(frozenset(tau))
                continue
            if len(tau) < depth:
                for var in sorted(obstruction, reverse=True):
                    for value in (1, 0):
                        stack.append({**tau, var: value})
        if domains:
            chosen = min(domains, key=_lex)
            verdict = verify_backdoor(formula, chosen, BackdoorKind.WEAK, base)
            logger.debug(f"Weak search tree: depth {depth}, {len(seen)} nodes")
            return BackdoorResult(BackdoorKind.WEAK, chosen, "weak-searchtree",
                                  witness=verdict.certificate)
    return None


def _strong_check(formula: CnfFormula, base: BaseClass) -> ObstructionCheck:
    def check(variables: FrozenSet[int]) -> Optional[FrozenSet[int]]:
        for tau in iter_assignments(variables):
            found = _obstruction_vars(base, reduce(formula, tau))
            if found is not None:
                return found
        return None
    return check


def detect_strong_searchtree(formula: CnfFormula, base: BaseClass,
                             k: int) -> Optional[BackdoorResult]:
    """Strong detection: grow B by a variable of an obstruction in some reduct."""
    _require_obstructions(base)
    found = _branch_min(_strong_check(formula, base), min(k, len(formula.variables)))
    if found is None:
        return None
    return BackdoorResult(BackdoorKind.STRONG, found, "strong-searchtree")


def _zero_one_val_set(formula: CnfFormula, base: BaseClass) -> Optional[FrozenSet[int]]:
    """
    Union of var(C) over the clauses without a literal of the needed sign.

    Any such clause survives (or empties) under the assignment falsifying it,
    so the union is a backdoor only when it is empty.
    """
    blocking = is_positive_clause if base.island is Island.ZERO_VAL else is_negative_clause
    candidate = frozenset(v for c in formula.clauses if blocking(c) for v in clause_vars(c))
    if verify_backdoor(formula, candidate, BackdoorKind.STRONG, base):
        return candidate
    logger.debug(f"{base.token}: union of blocking clauses {sorted(candidate)} is not a backdoor")
    return None


def _schaefer_set(formula: CnfFormula, base: BaseClass, k: int) -> Optional[FrozenSet[int]]:
    if not base.is_schaefer:
        raise UnsupportedClass(f"{base.token} is not a Schaefer class")
    island = base.island
    if island in (Island.ZERO_VAL, Island.ONE_VAL):
        found = _zero_one_val_set(formula, base)
        return found if found is not None and len(found) <= k else None
    if island is Island.TWO_CNF:
        triples = {frozenset(t) for c in formula.clauses
                   for t in combinations(sorted(clause_vars(c)), 3)}
        return graphkit.min_hitting_set_3(triples, k)
    primal = (graphkit.positive_primal_graph if island is Island.HORN
              else graphkit.negative_primal_graph)(formula)
    cover = graphkit.min_vertex_cover(primal, k)
    return None if cover is None else frozenset(v[1] for v in cover)


def detect_strong_schaefer(formula: CnfFormula, base: BaseClass,
                           k: int) -> Optional[BackdoorResult]:
    found = _schaefer_set(formula, base, k)
    return None if found is None else BackdoorResult(BackdoorKind.STRONG, found, "strong-schaefer")


def detect_deletion_schaefer(formula: CnfFormula, base: BaseClass,
                             k: int) -> Optional[BackdoorResult]:
    """Deletion and strong backdoor sets coincide for the Schaefer classes."""
    found = _schaefer_set(formula, base, k)
    if found is None:
        return None
    if not verify_backdoor(formula, found, BackdoorKind.DELETION, base):
        raise InvalidBackdoor(f"strong {base.token} set {sorted(found)} fails as a deletion set")
    return BackdoorResult(BackdoorKind.DELETION, found, "deletion-schaefer")


def deletion_pairs(formula: CnfFormula) -> List[DeletionPair]:
    pairs = []
    for obstruction in iter_clu_obstructions(formula):
        if obstruction.kind == "overlap":
            c1, c2 = obstruction.clauses
            left, right = clause_vars(c1 & c2), clause_vars(c1 ^ c2)
        else:
            d1, d2, d3 = obstruction.clauses
            negated = frozenset(-lit for lit in d2)
            left, right = clause_vars((d1 - d3) & negated), clause_vars((d3 - d1) & negated)
        pairs.append(DeletionPair(left, right, obstruction))
    return pairs


def deletion_graph(formula: CnfFormula) -> nx.Graph:
    """G_F: edge xy iff some deletion pair {X, Y} has x ∈ X and y ∈ Y."""
    graph = nx.Graph()
    graph.add_nodes_from(graphkit.var_vertex(v) for v in formula.variables)
    for pair in deletion_pairs(formula):
        graph.add_edges_from(
            (graphkit.var_vertex(x), graphkit.var_vertex(y)) for x in pair.left for y in pair.right
        )
    return graph


def _forest_check(formula: CnfFormula) -> ObstructionCheck:
    def check(variables: FrozenSet[int]) -> Optional[FrozenSet[int]]:
        graph = graphkit.incidence_graph(delete_vars(formula, variables))
        if graphkit.is_forest(graph):
            return None
        cycle = nx.find_cycle(graph)
        clauses = [graph.nodes[n]["clause"] for edge in cycle for n in edge
                   if n[0] == graphkit.CLAUSE]
        return frozenset(v for c in clauses for v in clause_vars(c))
    return check


def _first_clu_cover(formula: CnfFormula, graph: nx.Graph, start: int,
                     k: int) -> Optional[FrozenSet[int]]:
    variables = sorted(formula.variables)
    for size in range(start, min(k, len(variables)) + 1):
        for subset in combinations(variables, size):
            chosen = frozenset(subset)
            if not graphkit.is_vertex_cover(graph, {graphkit.var_vertex(v) for v in chosen}):
                continue
            if verify_backdoor(formula, chosen, BackdoorKind.DELETION, CLU):
                return chosen
    return None


def detect_deletion_clu(formula: CnfFormula, k: int) -> Optional[BackdoorResult]:
    """
    Every deletion Clu-backdoor set is a vertex cover of G_F, so the least
    minimum cover is tried first. Deleting variables can break clashes; when
    it fails, covers of increasing size are tried in lexicographic order.
    """
    graph = deletion_graph(formula)
    cover = graphkit.min_vertex_cover(graph, k)
    if cover is None:
        return None
    found: Optional[FrozenSet[int]] = frozenset(v[1] for v in cover)
    if not verify_backdoor(formula, found, BackdoorKind.DELETION, CLU):
        logger.debug(f"Cover {sorted(found)} of G_F fails, trying covers from size {len(found)}")
        found = _first_clu_cover(formula, graph, len(found), k)
        if found is None:
            return None
    return BackdoorResult(BackdoorKind.DELETION, found, "deletion-clu")


def detect_deletion_forest(formula: CnfFormula, k: int) -> Optional[BackdoorResult]:
    """
    Variable feedback vertex set of the incidence graph as the upper bound,
    then an exact search up to that size (clauses merging after deletion can
    make smaller sets work).
    """
    graph = graphkit.incidence_graph(formula)
    fvs = graphkit.min_fvs_constrained(graph, lambda v: v[0] == graphkit.VAR)
    limit = min(len(fvs), k)
    found = _branch_min(_forest_check(formula), limit)
    if found is None:
        return None
    return BackdoorResult(BackdoorKind.DELETION, found, "deletion-forest")


def detect_deletion_rhorn(formula: CnfFormula, k: int) -> Optional[BackdoorResult]:
    """
    F has a deletion RHorn-backdoor set of size ≤ k iff its literal graph has
    a vertex cover of at most |M| + k vertices. Variables with both literals
    in the cover are deleted; those with only x^1 in the cover are renamed.
    """
    lemma = graphkit.lemma_graph(formula)
    matched = lemma.matching_size
    if matched == 0:
        return BackdoorResult(BackdoorKind.DELETION, frozenset(), "deletion-rhorn",
                              renaming=frozenset())
    cover = graphkit.min_vertex_cover(lemma.graph, matched + k)
    if cover is None:
        return None
    negative_covered = {x for x in formula.variables if graphkit.lit_vertex(x, 0) in cover}
    deleted = frozenset(x for x in negative_covered if graphkit.lit_vertex(x, 1) in cover)
    flips = frozenset(x for x in formula.variables
                      if x not in deleted and graphkit.lit_vertex(x, 1) in cover)
    remaining = rename(delete_vars(formula, deleted), flips)
    if not is_member(HORN, remaining):
        raise InvalidBackdoor(
            f"renaming {sorted(flips)} after deleting {sorted(deleted)} is not Horn")
    logger.debug(f"Literal graph cover {len(cover)} = {matched} + {len(deleted)}")
    return BackdoorResult(BackdoorKind.DELETION, deleted, "deletion-rhorn", renaming=flips)


# Dispatch

ALGORITHMS = (
    "bruteforce", "weak-searchtree", "strong-searchtree", "strong-schaefer",
    "deletion-schaefer", "deletion-clu", "deletion-forest", "deletion-rhorn",
)


def supported_algorithms(kind: BackdoorKind, base: BaseClass) -> List[str]:
    """Algorithm ids able to answer (kind, base), preferred first."""
    if kind is BackdoorKind.DELETION and not base.clause_induced:
        return []
    searchable = base.clause_defined or base == CLU
    found = []
    if kind is BackdoorKind.WEAK and searchable:
        found.append("weak-searchtree")
    if kind is BackdoorKind.STRONG:
        if base.is_schaefer:
            found.append("strong-schaefer")
        if searchable:
            found.append("strong-searchtree")
    if kind is BackdoorKind.DELETION:
        if base.is_schaefer:
            found.append("deletion-schaefer")
        found.extend({CLU: ["deletion-clu"], FOREST: ["deletion-forest"],
                      RHORN: ["deletion-rhorn"]}.get(base, []))
    found.append("bruteforce")
    return found


def detect(formula: CnfFormula, kind: BackdoorKind, base: BaseClass, k: int,
           algorithm: str = "auto", force: bool = False,
           progress: bool = False, jobs: int = 1) -> Optional[BackdoorResult]:
    """
    Find a minimum backdoor set of size at most k.

    Args:
        formula: The formula
        kind: weak, strong or deletion
        base: The base class
        k: Size budget
        algorithm: ``auto`` or one of ALGORITHMS
        force: Let brute force exceed BRUTEFORCE_BUDGET
        progress: Show a progress bar during brute force
        jobs: Worker processes for brute force (0 = all cores)

    Returns:
        The backdoor, or None if there is none of size at most k

    Raises:
        UnsupportedQuery: Deletion on a class that is not clause-induced, or
            an algorithm that does not cover (kind, base)
        BudgetExceeded: Brute force over budget without ``force``
    """
    query = BackdoorQuery(kind, base, k)
    available = supported_algorithms(kind, base)
    chosen = available[0] if algorithm == "auto" else algorithm
    if chosen not in available:
        raise UnsupportedQuery(f"algorithm {chosen} does not handle {kind.value} {base.token}")
    logger.debug(f"Detecting {kind.value} {base.token} backdoor, k={k}, via {chosen}")

    if chosen == "bruteforce":
        return detect_bruteforce(formula, query, force=force, progress=progress, jobs=jobs)
    if chosen == "weak-searchtree":
        return detect_weak_searchtree(formula, base, k)
    if chosen == "strong-searchtree":
        return detect_strong_searchtree(formula, base, k)
    if chosen == "strong-schaefer":
        return detect_strong_schaefer(formula, base, k)
    if chosen == "deletion-schaefer":
        return detect_deletion_schaefer(formula, base, k)
    if chosen == "deletion-clu":
        return detect_deletion_clu(formula, k)
    if chosen == "deletion-forest":
        return detect_deletion_forest(formula, k)
    return detect_deletion_rhorn(formula, k)


def backdoor_size(formula: CnfFormula, kind: BackdoorKind, base: BaseClass,
                  algorithm: str = "auto", force: bool = False) -> Optional[int]:
    """wb / sb / db: size of a smallest backdoor, None if none exists at all."""
    found = detect(formula, kind, base, len(formula.variables), algorithm, force)
    return None if found is None else found.size
