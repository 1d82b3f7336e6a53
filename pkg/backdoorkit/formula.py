"""
CNF Formulas
============

Data model for CNF formulas over integer variables, partial truth
assignments and rational weightings, together with the reduction, deletion
and renaming operators, DIMACS input/output and the brute-force oracles that
every faster procedure in the package is checked against.

Literals use the DIMACS convention: ``x`` is the positive literal of
variable ``x`` and ``-x`` the negative one. A clause is a ``frozenset`` of
literals, a formula a set of clauses.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import (
    AbstractSet, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional,
    Tuple, Union,
)

from backdoorkit.errors import BudgetExceeded, DimacsError

logger = logging.getLogger(__name__)

Literal = int
Clause = FrozenSet[int]
Assignment = Mapping[int, int]

DEFAULT_WEIGHT = Fraction(1, 2)
MAX_ENUMERATION_VARS = 22

EMPTY_CLAUSE: Clause = frozenset()


def make_literal(var: int, polarity: int) -> Literal:
    """Return x^polarity, i.e. ``var`` for polarity 1 and ``-var`` for 0."""
    if var < 1:
        raise ValueError(f"variable ids start at 1, got {var}")
    return var if polarity else -var


def literal_var(lit: Literal) -> int:
    return abs(lit)


def literal_polarity(lit: Literal) -> int:
    return 1 if lit > 0 else 0


def literal_key(lit: Literal) -> Tuple[int, int]:
    """Sort key: by variable, negative literal first."""
    return (abs(lit), literal_polarity(lit))


def make_clause(literals: Iterable[int]) -> Clause:
    """Build a clause, rejecting zero literals and complementary pairs."""
    clause = frozenset(literals)
    if 0 in clause:
        raise ValueError("0 is not a literal")
    if any(-lit in clause for lit in clause):
        raise ValueError(f"clause {format_clause(clause)} contains a complementary pair")
    return clause


def clause_vars(clause: Clause) -> FrozenSet[int]:
    return frozenset(abs(lit) for lit in clause)


def clause_key(clause: Clause) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    """Canonical clause order: shorter clauses first, then by literals."""
    return (len(clause), tuple(sorted(literal_key(lit) for lit in clause)))


def is_positive_clause(clause: Clause) -> bool:
    return all(lit > 0 for lit in clause)


def is_negative_clause(clause: Clause) -> bool:
    return all(lit < 0 for lit in clause)


def format_clause(clause: Clause) -> str:
    body = ", ".join(
        (f"x{lit}" if lit > 0 else f"¬x{-lit}")
        for lit in sorted(clause, key=literal_key)
    )
    return "{" + body + "}"


def clashes(c1: Clause, c2: Clause) -> bool:
    """True if the clauses contain a complementary pair of literals."""
    return any(-lit in c2 for lit in c1)


@dataclass(frozen=True)
class CnfFormula:
    """
    A set of clauses.

    Equality and hashing look at the clause set only; the DIMACS comments
    and the declared variable count ride along for I/O.
    """

    clauses: FrozenSet[Clause] = frozenset()
    comments: Tuple[str, ...] = field(default=(), compare=False)
    declared_vars: int = field(default=0, compare=False)

    @classmethod
    def of(cls, *clauses: Iterable[int]) -> "CnfFormula":
        """Shorthand: ``CnfFormula.of([1, 2], [-1])``."""
        return cls(frozenset(make_clause(c) for c in clauses))

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]]) -> "CnfFormula":
        return cls(frozenset(make_clause(c) for c in clauses))

    @cached_property
    def variables(self) -> FrozenSet[int]:
        """var(F), strictly by occurrence."""
        return frozenset(abs(lit) for clause in self.clauses for lit in clause)

    @cached_property
    def ordered(self) -> Tuple[Clause, ...]:
        """Clauses in canonical scan order."""
        return tuple(sorted(self.clauses, key=clause_key))

    @property
    def has_empty_clause(self) -> bool:
        return EMPTY_CLAUSE in self.clauses

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.ordered)

    def __contains__(self, clause: object) -> bool:
        return clause in self.clauses

    def union(self, other: "CnfFormula") -> "CnfFormula":
        return CnfFormula(self.clauses | other.clauses)

    def subset(self, clauses: Iterable[Clause]) -> "CnfFormula":
        return CnfFormula(frozenset(clauses))

    def __str__(self) -> str:
        return "{" + ", ".join(format_clause(c) for c in self.ordered) + "}"


@dataclass(frozen=True)
class SatResult:
    """Outcome of a decision procedure: Sat(model) or Unsat."""

    satisfiable: bool
    model: Optional[Dict[int, int]] = None

    @classmethod
    def sat(cls, model: Mapping[int, int]) -> "SatResult":
        return cls(True, dict(model))

    @classmethod
    def unsat(cls) -> "SatResult":
        return cls(False, None)


@dataclass(frozen=True)
class Weighting:
    """
    Per-variable rational weights w(x) = w(x^1); w(x^0) = 1 - w(x).

    Variables without an explicit weight get ``default``.
    """

    weights: Mapping[int, Fraction] = field(default_factory=dict)
    default: Fraction = DEFAULT_WEIGHT

    def __post_init__(self) -> None:
        for var, value in list(self.weights.items()) + [(1, self.default)]:
            if var < 1:
                raise ValueError(f"weight given for invalid variable {var}")
            if not 0 <= value <= 1:
                raise ValueError(f"weight {value} of variable {var} outside [0, 1]")

    @classmethod
    def uniform(cls, value: Fraction = DEFAULT_WEIGHT) -> "Weighting":
        return cls({}, Fraction(value))

    def of_variable(self, var: int) -> Fraction:
        return Fraction(self.weights.get(var, self.default))

    def of_literal(self, lit: Literal) -> Fraction:
        w = self.of_variable(abs(lit))
        return w if lit > 0 else 1 - w

    def of_assignment(self, tau: Assignment) -> Fraction:
        total = Fraction(1)
        for var, value in tau.items():
            total *= self.of_literal(make_literal(var, value))
        return total


def true_literals(tau: Assignment) -> FrozenSet[Literal]:
    """true(τ) = { x^τ(x) }."""
    return frozenset(make_literal(var, value) for var, value in tau.items())


def false_literals(tau: Assignment) -> FrozenSet[Literal]:
    """false(τ) = { x^(1-τ(x)) }."""
    return frozenset(make_literal(var, 1 - value) for var, value in tau.items())


def reduce(formula: CnfFormula, tau: Assignment) -> CnfFormula:
    """F[τ] = { C \\ false(τ) : C ∈ F, C ∩ true(τ) = ∅ }."""
    if not tau:
        return formula
    reduced = set()
    for clause in formula.clauses:
        kept: List[int] = []
        satisfied = False
        for lit in clause:
            value = tau.get(abs(lit))
            if value is None:
                kept.append(lit)
            elif (lit > 0) == bool(value):
                satisfied = True
                break
        if not satisfied:
            reduced.add(frozenset(kept))
    return CnfFormula(frozenset(reduced))


def delete_vars(formula: CnfFormula, variables: AbstractSet[int]) -> CnfFormula:
    """F - B: strip every literal over B; duplicates merge."""
    if not variables:
        return formula
    return CnfFormula(frozenset(
        frozenset(lit for lit in clause if abs(lit) not in variables)
        for clause in formula.clauses
    ))


def rename(formula: CnfFormula, variables: AbstractSet[int]) -> CnfFormula:
    """r_X(F): flip the polarity of every literal over X."""
    if not variables:
        return formula
    return CnfFormula(frozenset(
        frozenset(-lit if abs(lit) in variables else lit for lit in clause)
        for clause in formula.clauses
    ))


def iter_assignments(variables: Iterable[int]) -> Iterator[Dict[int, int]]:
    """All τ ∈ 2^X in lexicographic order over sorted X, 0 before 1."""
    ordered = sorted(variables)
    for bits in product((0, 1), repeat=len(ordered)):
        yield dict(zip(ordered, bits))


def satisfies(formula: CnfFormula, tau: Assignment) -> bool:
    """True if τ satisfies every clause of F (τ must cover var(F))."""
    return all(
        any(tau.get(abs(lit)) == literal_polarity(lit) for lit in clause)
        for clause in formula.clauses
    )


def complete_model(formula: CnfFormula, partial: Assignment) -> Dict[int, int]:
    """Extend a model to every variable of F, unbound ones set to 0."""
    model = {var: 0 for var in formula.variables}
    model.update(partial)
    return model


def _check_enumeration(formula: CnfFormula, what: str, max_vars: int) -> None:
    n = len(formula.variables)
    if n > max_vars:
        raise BudgetExceeded(what, 2 ** n, 2 ** max_vars)


def brute_force_sat(formula: CnfFormula, max_vars: int = MAX_ENUMERATION_VARS) -> SatResult:
    """Decide satisfiability by enumerating all total assignments."""
    _check_enumeration(formula, "brute-force SAT", max_vars)
    if formula.has_empty_clause:
        return SatResult.unsat()
    for tau in iter_assignments(formula.variables):
        if satisfies(formula, tau):
            return SatResult.sat(tau)
    return SatResult.unsat()


def brute_force_count(formula: CnfFormula, weighting: Weighting,
                      max_vars: int = MAX_ENUMERATION_VARS) -> Fraction:
    """Σ w(τ) over the satisfying τ ∈ 2^var(F)."""
    _check_enumeration(formula, "brute-force count", max_vars)
    total = Fraction(0)
    if formula.has_empty_clause:
        return total
    for tau in iter_assignments(formula.variables):
        if satisfies(formula, tau):
            total += weighting.of_assignment(tau)
    return total


def brute_force_model_count(formula: CnfFormula, max_vars: int = MAX_ENUMERATION_VARS) -> int:
    """Number of satisfying total assignments over var(F)."""
    _check_enumeration(formula, "brute-force model count", max_vars)
    return sum(1 for tau in iter_assignments(formula.variables) if satisfies(formula, tau))


def _decode(text: Union[bytes, str]) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DimacsError(f"input is not UTF-8 text: {e}") from e
    return text


def parse_dimacs(text: Union[bytes, str], strip_tautologies: bool = False) -> CnfFormula:
    """
    Parse DIMACS CNF.

    Args:
        text: The file contents
        strip_tautologies: Drop clauses with a complementary pair instead of
            rejecting the input

    Returns:
        The deduplicated formula, comments preserved

    Raises:
        DimacsError: On a malformed header, an out-of-range literal, an
            unterminated clause or (by default) a tautological clause
    """
    comments: List[str] = []
    declared: Optional[Tuple[int, int]] = None
    clauses = set()
    current: List[int] = []
    read = 0

    for lineno, raw in enumerate(_decode(text).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if declared is not None:
                raise DimacsError(f"line {lineno}: second problem line")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                declared = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if declared[0] < 0 or declared[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if declared is None:
            raise DimacsError(f"line {lineno}: clause before the problem line")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {token!r}") from None
            if lit != 0:
                if abs(lit) > declared[0]:
                    raise DimacsError(f"line {lineno}: literal {lit} exceeds the "
                                      f"declared {declared[0]} variables")
                current.append(lit)
                continue
            read += 1
            clause = frozenset(current)
            current = []
            if any(-l in clause for l in clause):
                if not strip_tautologies:
                    raise DimacsError(f"line {lineno}: tautological clause {format_clause(clause)}")
                logger.debug(f"Dropping tautological clause {format_clause(clause)}")
                continue
            clauses.add(clause)

    if declared is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("last clause is not terminated by 0")
    if read != declared[1]:
        logger.warning(f"Header declares {declared[1]} clauses, found {read}")
    return CnfFormula(frozenset(clauses), tuple(comments), declared[0])


def write_dimacs(formula: CnfFormula, comments: Iterable[str] = ()) -> str:
    """Serialize F; clauses in canonical order, literals by variable."""
    n = max(max(formula.variables, default=0), formula.declared_vars)
    lines = [f"c {c}" if c else "c" for c in comments]
    lines.append(f"p cnf {n} {len(formula)}")
    for clause in formula.ordered:
        lits = sorted(clause, key=literal_key)
        lines.append(" ".join([str(lit) for lit in lits] + ["0"]))
    return "\n".join(lines) + "\n"


def parse_weights(text: Union[bytes, str], default: Fraction = DEFAULT_WEIGHT) -> Weighting:
    """
    Parse a weighting file: ``w <var> <num>/<den>`` per line, ``c`` comments.

    Unlisted variables keep the default weight.
    """
    weights: Dict[int, Fraction] = {}
    for lineno, raw in enumerate(_decode(text).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "w":
            raise DimacsError(f"line {lineno}: expected 'w <var> <num>/<den>', got {line!r}")
        try:
            var = int(parts[1])
            value = Fraction(parts[2])
        except (ValueError, ZeroDivisionError):
            raise DimacsError(f"line {lineno}: bad weight entry {line!r}") from None
        if var < 1 or not 0 <= value <= 1:
            raise DimacsError(f"line {lineno}: weight out of range {line!r}")
        weights[var] = value
    return Weighting(weights, Fraction(default))


def write_weights(weighting: Weighting, variables: Iterable[int]) -> str:
    return "".join(
        f"w {var} {weighting.of_variable(var).numerator}/{weighting.of_variable(var).denominator}\n"
        for var in sorted(variables)
    )
