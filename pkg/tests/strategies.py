"""Formula builders and hypothesis strategies shared by the test modules."""

from functools import lru_cache
from itertools import combinations, permutations, product
from typing import List

from hypothesis import strategies as st

from backdoorkit.formula import CnfFormula, clause_key, make_clause
from backdoorkit.genbench import random_cnf

UNIVERSE_VARS = 3
UNIVERSE_CLAUSES = 4


def _all_clauses(n: int, width: int) -> List[frozenset]:
    clauses = []
    for size in range(width + 1):
        for chosen in combinations(range(1, n + 1), size):
            for signs in product((1, -1), repeat=size):
                clauses.append(make_clause(s * v for s, v in zip(signs, chosen)))
    return clauses


def _canonical(clauses, perms) -> tuple:
    best = None
    for perm in perms:
        image = sorted(clause_key(frozenset((perm[abs(l)] if l > 0 else -perm[abs(l)]) for l in c))
                       for c in clauses)
        if best is None or image < best:
            best = image
    return tuple(best)


@lru_cache(maxsize=None)
def tiny_universe() -> List[CnfFormula]:
    clauses = _all_clauses(UNIVERSE_VARS, UNIVERSE_VARS)
    perms = [dict(zip(range(1, UNIVERSE_VARS + 1), p)) for p in permutations(range(1, UNIVERSE_VARS + 1))]
    seen = set()
    formulas = []
    for m in range(UNIVERSE_CLAUSES + 1):
        for chosen in combinations(clauses, m):
            key = _canonical(chosen, perms)
            if key in seen:
                continue
            seen.add(key)
            formulas.append(CnfFormula(frozenset(chosen)))
    return formulas


def random_formulas(count: int) -> List[CnfFormula]:
    return [random_cnf(3 + seed % 6, seed % 11, 3, seed) for seed in range(count)]


@st.composite
def cnf_formulas(draw, max_vars: int = 5, max_clauses: int = 6, max_width: int = 3,
                 allow_empty_clause: bool = True) -> CnfFormula:
    n = draw(st.integers(min_value=1, max_value=max_vars))
    min_width = 0 if allow_empty_clause else 1
    clause = st.lists(st.integers(min_value=1, max_value=n), min_size=min_width,
                      max_size=max_width, unique=True).flatmap(
        lambda vs: st.tuples(*[st.sampled_from((v, -v)) for v in vs]))
    return CnfFormula.from_clauses(draw(st.lists(clause, max_size=max_clauses)))


@st.composite
def assignments(draw, variables) -> dict:
    chosen = draw(st.lists(st.sampled_from(sorted(variables)), unique=True)) if variables else []
    return {v: draw(st.integers(min_value=0, max_value=1)) for v in chosen}
