"""
Backdoor Evaluation
===================

Put a known backdoor to work: decide satisfiability through a strong or weak
backdoor set, count weighted models through a strong Clu/Forest backdoor,
and build, validate, serialize and minimize backdoor trees.

A backdoor tree is a binary decision tree over variables whose every leaf
reduct lies in the base class. Its text form is ``(x 0:<sub> 1:<sub>)`` with
leaves written ``[in-class]``.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from tqdm import tqdm

from backdoorkit.detect import BackdoorKind, parallel_map, verify_backdoor
from backdoorkit.errors import (
    BudgetExceeded, InvalidBackdoor, InvalidTree, UnsupportedClass,
)
from backdoorkit.formula import (
    CnfFormula, SatResult, Weighting, complete_model, iter_assignments, reduce,
)
from backdoorkit.islands import BaseClass, count, is_member, solve

logger = logging.getLogger(__name__)

TREE_SEARCH_MAX_VARS = 16

LEAF_TEXT = "[in-class]"


# Strong and weak backdoor sets

def _require_strong(formula: CnfFormula, variables: FrozenSet[int], base: BaseClass,
                    jobs: int) -> None:
    verdict = verify_backdoor(formula, variables, BackdoorKind.STRONG, base, jobs=jobs)
    if not verdict:
        raise InvalidBackdoor(
            f"{sorted(variables)} is not a strong {base.token} backdoor: "
            f"reduct under {verdict.counterexample} leaves the class")


def _solve_reduct(args: Tuple[CnfFormula, BaseClass, Dict[int, int]]) -> SatResult:
    formula, base, tau = args
    return solve(base, reduce(formula, tau))


def _try_reduct(args: Tuple[CnfFormula, BaseClass, Dict[int, int]]) -> Optional[SatResult]:
    formula, base, tau = args
    reduct = reduce(formula, tau)
    return solve(base, reduct) if is_member(base, reduct) else None


def _count_reduct(args: Tuple[CnfFormula, BaseClass, Dict[int, int], Weighting]) -> Fraction:
    formula, base, tau, weighting = args
    return weighting.of_assignment(tau) * count(base, reduce(formula, tau), weighting)


def _join(formula: CnfFormula, tau: Dict[int, int], result: SatResult) -> SatResult:
    model = dict(tau)
    model.update(result.model)
    return SatResult.sat(complete_model(formula, model))


def sat_via_strong(formula: CnfFormula, variables: Iterable[int], base: BaseClass,
                   jobs: int = 1) -> SatResult:
    """
    Decide F by solving the 2^|B| in-class reducts.

    Raises:
        InvalidBackdoor: If B is not a strong backdoor set of F
    """
    backdoor = frozenset(variables)
    _require_strong(formula, backdoor, base, jobs)
    taus = list(iter_assignments(backdoor))
    tasks = [(formula, base, tau) for tau in taus]
    for tau, result in zip(taus, parallel_map(_solve_reduct, tasks, jobs)):
        if result.satisfiable:
            return _join(formula, tau, result)
    return SatResult.unsat()


def sat_via_weak(formula: CnfFormula, variables: Iterable[int], base: BaseClass,
                 jobs: int = 1) -> Optional[SatResult]:
    """Sat with a model if some τ ∈ 2^B gives a satisfiable in-class reduct, else None."""
    taus = list(iter_assignments(frozenset(variables)))
    tasks = [(formula, base, tau) for tau in taus]
    for tau, result in zip(taus, parallel_map(_try_reduct, tasks, jobs)):
        if result is not None and result.satisfiable:
            return _join(formula, tau, result)
    return None


def count_via_strong(formula: CnfFormula, variables: Iterable[int], base: BaseClass,
                     weighting: Weighting, jobs: int = 1) -> Fraction:
    """#_w(F) = Σ_{τ ∈ 2^B} w(τ) · #_w(F[τ])."""
    if not base.countable:
        raise UnsupportedClass(f"weighted counting is not available for {base.token}")
    backdoor = frozenset(variables)
    _require_strong(formula, backdoor, base, jobs)
    tasks = [(formula, base, tau, weighting) for tau in iter_assignments(backdoor)]
    return sum(parallel_map(_count_reduct, tasks, jobs), Fraction(0))


# Backdoor trees

@dataclass(frozen=True)
class TreeLeaf:
    pass


@dataclass(frozen=True)
class TreeNode:
    var: int
    low: "BackdoorTree"
    high: "BackdoorTree"


BackdoorTree = Union[TreeLeaf, TreeNode]


@dataclass(frozen=True)
class TreeVerdict:
    accepted: bool
    leaf: Optional[Dict[int, int]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def leaf_count(tree: BackdoorTree) -> int:
    if isinstance(tree, TreeLeaf):
        return 1
    return leaf_count(tree.low) + leaf_count(tree.high)


def tree_vars(tree: BackdoorTree) -> FrozenSet[int]:
    if isinstance(tree, TreeLeaf):
        return frozenset()
    return frozenset({tree.var}) | tree_vars(tree.low) | tree_vars(tree.high)


def iter_leaves(tree: BackdoorTree,
                path: Optional[Dict[int, int]] = None) -> Iterator[Dict[int, int]]:
    """Root-to-leaf assignments, 0-branch first."""
    path = {} if path is None else path
    if isinstance(tree, TreeLeaf):
        yield dict(path)
        return
    for value, child in ((0, tree.low), (1, tree.high)):
        yield from iter_leaves(child, {**path, tree.var: value})


def format_tree(tree: BackdoorTree) -> str:
    if isinstance(tree, TreeLeaf):
        return LEAF_TEXT
    return f"({tree.var} 0:{format_tree(tree.low)} 1:{format_tree(tree.high)})"


_TOKEN = re.compile(r"\s*(\[in-class\]|\(|\)|[01]:|\d+)")


def parse_tree(text: str) -> BackdoorTree:
    """
    Read the ``(x 0:<sub> 1:<sub>)`` form back into a tree.

    Raises:
        InvalidTree: On any syntax error
    """
    tokens: List[str] = []
    pos = 0
    stripped = text.strip()
    while pos < len(stripped):
        match = _TOKEN.match(stripped, pos)
        if not match:
            raise InvalidTree(f"unexpected input at offset {pos}: {stripped[pos:pos + 10]!r}")
        tokens.append(match.group(1))
        pos = match.end()

    def expect(index: int, token: str) -> int:
        if index >= len(tokens) or tokens[index] != token:
            found = tokens[index] if index < len(tokens) else "end of input"
            raise InvalidTree(f"expected {token!r}, found {found!r}")
        return index + 1

    def node(index: int) -> Tuple[BackdoorTree, int]:
        if index >= len(tokens):
            raise InvalidTree("tree ends early")
        if tokens[index] == LEAF_TEXT:
            return TreeLeaf(), index + 1
        index = expect(index, "(")
        if index >= len(tokens) or not tokens[index].isdigit():
            raise InvalidTree("branching variable expected after '('")
        var = int(tokens[index])
        if var < 1:
            raise InvalidTree(f"invalid branching variable {var}")
        low, index = node(expect(index + 1, "0:"))
        high, index = node(expect(index, "1:"))
        return TreeNode(var, low, high), expect(index, ")")

    tree, end = node(0)
    if end != len(tokens):
        raise InvalidTree(f"trailing input after the tree: {tokens[end]!r}")
    return tree


def _structure_error(formula: CnfFormula, tree: BackdoorTree,
                     path: FrozenSet[int]) -> Optional[str]:
    if isinstance(tree, TreeLeaf):
        return None
    if tree.var in path:
        return f"variable {tree.var} repeats on a path"
    if tree.var not in formula.variables:
        return f"variable {tree.var} does not occur in the formula"
    inner = path | {tree.var}
    return _structure_error(formula, tree.low, inner) or _structure_error(formula, tree.high, inner)


def validate_tree(formula: CnfFormula, tree: BackdoorTree, base: BaseClass) -> TreeVerdict:
    """Accept iff the tree is well formed and F[τ] is in the class for every leaf τ."""
    problem = _structure_error(formula, tree, frozenset())
    if problem:
        return TreeVerdict(False, reason=problem)
    for tau in iter_leaves(tree):
        if not is_member(base, reduce(formula, tau)):
            return TreeVerdict(False, leaf=tau, reason=f"leaf reduct leaves {base.token}")
    return TreeVerdict(True)


def sat_via_tree(formula: CnfFormula, tree: BackdoorTree, base: BaseClass) -> SatResult:
    """
    Decide F by solving every leaf reduct of a valid tree.

    Raises:
        InvalidTree: If validate_tree rejects the tree
    """
    verdict = validate_tree(formula, tree, base)
    if not verdict:
        raise InvalidTree(verdict.reason)
    for tau in iter_leaves(tree):
        result = solve(base, reduce(formula, tau))
        if result.satisfiable:
            return _join(formula, tau, result)
    return SatResult.unsat()


def tree_from_backdoor(variables: Iterable[int]) -> BackdoorTree:
    """The complete tree over B in id order, 2^|B| leaves."""
    ordered = sorted(set(variables))

    def build(depth: int) -> BackdoorTree:
        if depth == len(ordered):
            return TreeLeaf()
        child = build(depth + 1)
        return TreeNode(ordered[depth], child, child)

    return build(0)


def min_leaf_tree(formula: CnfFormula, base: BaseClass, max_leaves: Optional[int] = None,
                  candidates: Optional[Iterable[int]] = None, progress: bool = False,
                  max_vars: int = TREE_SEARCH_MAX_VARS) -> Optional[BackdoorTree]:
    """
    A backdoor tree with the fewest leaves.

    Leaves(R) = 1 if R is in the class, otherwise the minimum over branching
    variables x of Leaves(R[x=0]) + Leaves(R[x=1]); memoized on reducts.

    Args:
        formula: The formula
        base: The base class
        max_leaves: Leaf budget L; None means unbounded
        candidates: Branching variables to use (default var(F))
        progress: Show a progress bar over the root's branching choices
        max_vars: Refuse to search over more candidate variables than this

    Returns:
        The tree (first minimizing variable in id order at each node), or
        None if no valid tree exists or the minimum exceeds max_leaves

    Raises:
        BudgetExceeded: If there are more than max_vars candidate variables
    """
    pool = formula.variables if candidates is None else frozenset(candidates) & formula.variables
    if len(pool) > max_vars:
        raise BudgetExceeded("backdoor tree search", 2 ** len(pool), 2 ** max_vars)

    memo: Dict[CnfFormula, Optional[Tuple[int, BackdoorTree]]] = {}

    def best(reduct: CnfFormula, show: bool = False) -> Optional[Tuple[int, BackdoorTree]]:
        if reduct in memo:
            return memo[reduct]
        if is_member(base, reduct):
            memo[reduct] = (1, TreeLeaf())
            return memo[reduct]
        answer: Optional[Tuple[int, BackdoorTree]] = None
        choices = sorted(reduct.variables & pool)
        for var in tqdm(choices, desc="Branching variables", disable=not show, leave=False):
            low = best(reduce(reduct, {var: 0}))
            if low is None:
                continue
            high = best(reduce(reduct, {var: 1}))
            if high is None:
                continue
            leaves = low[0] + high[0]
            if answer is None or leaves < answer[0]:
                answer = (leaves, TreeNode(var, low[1], high[1]))
        memo[reduct] = answer
        return answer

    found = best(formula, progress)
    logger.debug(f"Tree search: {len(memo)} reducts, minimum {found[0] if found else None} leaves")
    if found is None or (max_leaves is not None and found[0] > max_leaves):
        return None
    return found[1]
