"""
Graph Kit
=========

Graph constructions over CNF formulas and the exact combinatorial engines
the detection algorithms reduce to: vertex cover, 3-hitting set,
feedback vertex set restricted to deletable vertices, and 2SAT.

Vertices are sortable tuples tagged by kind:

    ('var', x)           variable x
    ('clause', key)      clause with canonical key; the clause is the 'clause' node attribute
    ('lit', x, e)        literal x^e

Every engine returns the lexicographically least minimum solution (vertices
compared by their tuple ids), so results match exhaustive enumeration
exactly. Minimum size comes from iterative deepening over a bounded search
tree; the canonical answer from a greedy pass that keeps a vertex whenever
a solution of that size still exists with it.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import (
    AbstractSet, Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional,
    Sequence, Set, Tuple,
)

import networkx as nx

from backdoorkit.errors import Infeasible, WidthExceeded
from backdoorkit.formula import CnfFormula, SatResult, clause_key, literal_key

logger = logging.getLogger(__name__)

VAR = "var"
CLAUSE = "clause"
LIT = "lit"

Vertex = Tuple


def var_vertex(var: int) -> Vertex:
    return (VAR, var)


def lit_vertex(var: int, polarity: int) -> Vertex:
    return (LIT, var, polarity)


def is_forest(graph: nx.Graph) -> bool:
    """nx.is_forest that accepts the empty graph."""
    return graph.number_of_nodes() == 0 or nx.is_forest(graph)


def incidence_graph(formula: CnfFormula) -> nx.Graph:
    graph = nx.Graph()
    for clause in formula.ordered:
        node = (CLAUSE, clause_key(clause))
        graph.add_node(node, tag=CLAUSE, clause=clause)
        for lit in clause:
            graph.add_node(var_vertex(abs(lit)), tag=VAR)
            graph.add_edge(node, var_vertex(abs(lit)))
    return graph


def _primal_graph(formula: CnfFormula, positive: bool) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from((var_vertex(v) for v in formula.variables), tag=VAR)
    for clause in formula.clauses:
        chosen = sorted(abs(lit) for lit in clause if (lit > 0) == positive)
        graph.add_edges_from((var_vertex(a), var_vertex(b)) for a, b in combinations(chosen, 2))
    return graph


def positive_primal_graph(formula: CnfFormula) -> nx.Graph:
    """Edge xy iff some clause contains both x and y positively."""
    return _primal_graph(formula, True)


def negative_primal_graph(formula: CnfFormula) -> nx.Graph:
    """Edge xy iff some clause contains both ¬x and ¬y."""
    return _primal_graph(formula, False)


@dataclass(frozen=True)
class MatchedLiteralGraph:
    """Literal graph with its distinguished perfect matching x^0 x^1."""

    graph: nx.Graph
    matching: FrozenSet[FrozenSet[Vertex]]

    @property
    def matching_size(self) -> int:
        return len(self.matching)


def lemma_graph(formula: CnfFormula,
                variables: Optional[Iterable[int]] = None) -> MatchedLiteralGraph:
    """
    Literal vertices x^0, x^1 for every variable; matching edges x^0 x^1 and
    co-occurrence edges between literals of distinct variables sharing a clause.

    ``variables`` defaults to var(F).
    """
    scope = sorted(formula.variables if variables is None else set(variables) | formula.variables)
    graph = nx.Graph()
    matching = set()
    for var in scope:
        graph.add_edge(lit_vertex(var, 0), lit_vertex(var, 1), matched=True)
        matching.add(frozenset((lit_vertex(var, 0), lit_vertex(var, 1))))
    for clause in formula.clauses:
        for a, b in combinations(sorted(clause, key=literal_key), 2):
            u, v = lit_vertex(abs(a), int(a > 0)), lit_vertex(abs(b), int(b > 0))
            graph.add_edge(u, v, matched=False)
    return MatchedLiteralGraph(graph, frozenset(matching))


def dump_adjacency(graph: nx.Graph) -> str:
    """Adjacency listing for debugging, one vertex per line."""
    lines = ["graph {"]
    for node in sorted(graph.nodes):
        neighbours = " ".join(str(n) for n in sorted(graph[node]))
        lines.append(f"  {node} -- {{ {neighbours} }}")
    lines.append("}")
    return "\n".join(lines)


# Canonical minimum search shared by all engines

def _canonical_minimum(universe: Sequence[Hashable],
                       feasible: Callable[[FrozenSet, FrozenSet, int], bool],
                       k: Optional[int],
                       what: str) -> Optional[FrozenSet]:
    """
    Lexicographically least minimum solution.

    ``feasible(forced_in, forced_out, size)`` must say whether a solution of
    at most ``size`` elements exists containing ``forced_in`` and avoiding
    ``forced_out``.
    """
    limit = len(universe) if k is None else min(k, len(universe))
    size = next((s for s in range(limit + 1) if feasible(frozenset(), frozenset(), s)), None)
    if size is None:
        logger.debug(f"{what}: none within {limit}")
        return None

    chosen: Set = set()
    rejected: Set = set()
    for vertex in sorted(universe):
        if len(chosen) == size:
            break
        if feasible(frozenset(chosen | {vertex}), frozenset(rejected), size):
            chosen.add(vertex)
        else:
            rejected.add(vertex)
    logger.debug(f"{what}: minimum {size}")
    return frozenset(chosen)


# Vertex cover

def _vc_branch(adj: Dict, allowed: AbstractSet, budget: int) -> bool:
    adj = {v: set(ns) for v, ns in adj.items() if ns}
    while True:
        # degree-1 vertices: take the neighbour if allowed, else the vertex itself
        leaf = next((v for v in sorted(adj) if len(adj[v]) == 1), None)
        if leaf is None:
            break
        (other,) = adj[leaf]
        pick = other if other in allowed else leaf
        if pick not in allowed or budget == 0:
            return False
        budget -= 1
        _remove_vertex(adj, pick)
    if not adj:
        return True
    if _greedy_matching_size(adj) > budget:
        return False

    vertex = max(sorted(adj), key=lambda v: len(adj[v]))
    if vertex in allowed:
        rest = {v: set(ns) for v, ns in adj.items()}
        _remove_vertex(rest, vertex)
        if _vc_branch(rest, allowed, budget - 1):
            return True
    neighbours = adj[vertex]
    if len(neighbours) <= budget and neighbours <= allowed:
        rest = {v: set(ns) for v, ns in adj.items()}
        for n in list(neighbours):
            _remove_vertex(rest, n)
        return _vc_branch(rest, allowed, budget - len(neighbours))
    return False


def _greedy_matching_size(adj: Dict) -> int:
    """Size of a maximal matching; a lower bound on every cover."""
    matched = set()
    size = 0
    for v in sorted(adj):
        if v in matched:
            continue
        partner = next((n for n in sorted(adj[v]) if n not in matched), None)
        if partner is not None:
            matched.update((v, partner))
            size += 1
    return size


def _remove_vertex(adj: Dict, vertex) -> None:
    for n in adj.pop(vertex, ()):
        adj[n].discard(vertex)
        if not adj[n]:
            del adj[n]


def is_vertex_cover(graph: nx.Graph, cover: AbstractSet) -> bool:
    return all(u in cover or v in cover for u, v in graph.edges)


def min_vertex_cover(graph: nx.Graph, k: Optional[int] = None,
                     deletable: Optional[Callable[[Vertex], bool]] = None,
                     ) -> Optional[FrozenSet[Vertex]]:
    """
    Exact minimum vertex cover drawn from the deletable vertices.

    Args:
        graph: Undirected simple graph
        k: Size budget; None means unbounded
        deletable: Predicate for vertices allowed in the cover (default all)

    Returns:
        The lexicographically least minimum cover, or None if none has at most k vertices
    """
    allowed_all = frozenset(v for v in graph.nodes if deletable is None or deletable(v))
    base = {v: set(graph[v]) - {v} for v in graph.nodes}

    def feasible(forced_in: FrozenSet, forced_out: FrozenSet, size: int) -> bool:
        budget = size - len(forced_in)
        if budget < 0:
            return False
        adj = {v: set(ns) for v, ns in base.items()}
        for v in forced_in:
            _remove_vertex(adj, v)
        return _vc_branch(adj, allowed_all - forced_out, budget)

    candidates = [v for v in allowed_all if graph.degree(v) > 0]
    return _canonical_minimum(candidates, feasible, k, "vertex cover")


# 3-hitting set

def _hs_branch(sets: List[FrozenSet], budget: int) -> bool:
    if not sets:
        return True
    if budget == 0 or any(not s for s in sets):
        return False
    first = min(sets, key=lambda s: (len(s), sorted(s)))
    for element in sorted(first):
        if _hs_branch([s for s in sets if element not in s], budget - 1):
            return True
    return False


def is_hitting_set(sets: Iterable[AbstractSet], hitting: AbstractSet) -> bool:
    return all(set(s) & set(hitting) for s in sets)


def min_hitting_set_3(sets: Iterable[AbstractSet], k: Optional[int] = None) -> Optional[FrozenSet]:
    """Exact minimum hitting set by branching on a smallest unhit set."""
    family = sorted({frozenset(s) for s in sets}, key=lambda s: (len(s), sorted(s)))
    if any(not s for s in family):
        return None
    universe = sorted({e for s in family for e in s})

    def feasible(forced_in: FrozenSet, forced_out: FrozenSet, size: int) -> bool:
        budget = size - len(forced_in)
        if budget < 0:
            return False
        rest = [s - forced_out for s in family if not s & forced_in]
        return _hs_branch(rest, budget)

    return _canonical_minimum(universe, feasible, k, "hitting set")


# Feedback vertex set

def _shortest_cycle(graph: nx.MultiGraph) -> Optional[List[Vertex]]:
    """Vertices of a shortest cycle, parallel edges counting as 2-cycles."""
    best: Optional[List[Vertex]] = None
    for u, v in sorted({tuple(sorted((a, b))) for a, b in graph.edges()}):
        if u == v:
            return [u]
        if graph.number_of_edges(u, v) > 1:
            return [u, v]
    simple = nx.Graph(graph)
    for u, v in sorted(tuple(sorted(e)) for e in simple.edges()):
        simple.remove_edge(u, v)
        try:
            path = nx.shortest_path(simple, u, v)
            if best is None or len(path) < len(best):
                best = path
        except nx.NetworkXNoPath:
            pass
        simple.add_edge(u, v)
    return best


def _fvs_reduce(graph: nx.MultiGraph, allowed: AbstractSet) -> None:
    """Prune degree ≤ 1 vertices and bypass undeletable degree-2 vertices."""
    changed = True
    while changed:
        changed = False
        for node in sorted(graph.nodes):
            degree = graph.degree(node)
            if degree <= 1:
                graph.remove_node(node)
                changed = True
            elif degree == 2 and node not in allowed and graph.number_of_edges(node, node) == 0:
                a, b = [n for _, n in graph.edges(node)]
                graph.remove_node(node)
                graph.add_edge(a, b)
                changed = True


def _fvs_branch(graph: nx.MultiGraph, allowed: AbstractSet, budget: int) -> bool:
    graph = graph.copy()
    _fvs_reduce(graph, allowed)
    if graph.number_of_nodes() == 0:
        return True
    multi = any(graph.number_of_edges(u, v) > 1 for u, v in graph.edges())
    if not multi and is_forest(nx.Graph(graph)):
        return True
    if budget == 0:
        return False
    cycle = _shortest_cycle(graph)
    for vertex in sorted(v for v in cycle if v in allowed):
        rest = graph.copy()
        rest.remove_node(vertex)
        if _fvs_branch(rest, allowed, budget - 1):
            return True
    return False


def is_feedback_vertex_set(graph: nx.Graph, removed: AbstractSet) -> bool:
    return is_forest(graph.subgraph(set(graph.nodes) - set(removed)))


def min_fvs_constrained(graph: nx.Graph, deletable: Callable[[Vertex], bool],
                        k: Optional[int] = None) -> Optional[FrozenSet[Vertex]]:
    """
    Exact minimum S of deletable vertices with G - S acyclic.

    Raises:
        Infeasible: If some cycle consists of undeletable vertices only
    """
    allowed_all = frozenset(v for v in graph.nodes if deletable(v))
    if not is_forest(graph.subgraph(set(graph.nodes) - allowed_all)):
        raise Infeasible("a cycle contains no deletable vertex")
    base = nx.MultiGraph(graph)

    def feasible(forced_in: FrozenSet, forced_out: FrozenSet, size: int) -> bool:
        budget = size - len(forced_in)
        if budget < 0:
            return False
        work = base.copy()
        work.remove_nodes_from(forced_in)
        return _fvs_branch(work, allowed_all - forced_out, budget)

    candidates = [v for v in allowed_all if v in graph and graph.degree(v) >= 2]
    return _canonical_minimum(candidates, feasible, k, "feedback vertex set")


# 2SAT

def implication_graph(formula: CnfFormula) -> nx.DiGraph:
    graph = nx.DiGraph()
    for var in formula.variables:
        graph.add_nodes_from((var, -var))
    for clause in formula.clauses:
        lits = sorted(clause, key=literal_key)
        if len(lits) == 1:
            graph.add_edge(-lits[0], lits[0])
        elif len(lits) == 2:
            a, b = lits
            graph.add_edge(-a, b)
            graph.add_edge(-b, a)
    return graph


def two_sat(formula: CnfFormula) -> SatResult:
    """
    Decide a 2CNF formula through the strongly connected components of its
    implication graph. The model prefers 0, variable by variable in id order.

    Raises:
        WidthExceeded: On a clause with more than two literals
    """
    if formula.width > 2:
        raise WidthExceeded(f"clause of width {formula.width} passed to 2SAT")
    if formula.has_empty_clause:
        return SatResult.unsat()

    graph = implication_graph(formula)
    for component in nx.strongly_connected_components(graph):
        if any(-lit in component for lit in component):
            return SatResult.unsat()

    model: Dict[int, int] = {}
    for var in sorted(formula.variables):
        if var in model:
            continue
        closure = {-var} | nx.descendants(graph, -var)
        if any(-lit in closure for lit in closure):
            closure = {var} | nx.descendants(graph, var)
        for lit in closure:
            model.setdefault(abs(lit), int(lit > 0))
    return SatResult.sat(model)
