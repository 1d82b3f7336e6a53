"""
Errors
======

Exception hierarchy shared by every backdoorkit module. "No backdoor within
the budget" is a normal outcome and is returned as ``None``; the classes
below are reserved for inputs that cannot be processed.
"""


class BackdoorKitError(Exception):
    """Base class for all library errors."""


class DimacsError(BackdoorKitError):
    """Malformed DIMACS CNF or weighting input."""


class BudgetExceeded(BackdoorKitError):
    """An exhaustive search would exceed its enumeration budget."""

    def __init__(self, what: str, estimate: int, budget: int) -> None:
        super().__init__(f"{what}: {estimate} candidates exceed the budget of {budget}")
        self.estimate = estimate
        self.budget = budget


class NotInClass(BackdoorKitError):
    """A base-class procedure was called on a formula outside the class."""


class UnsupportedClass(BackdoorKitError):
    """The operation is not defined for the requested base class."""


class UnsupportedQuery(BackdoorKitError):
    """The (kind, class) combination has no meaning, e.g. deletion for subsolvers."""


class WidthExceeded(BackdoorKitError):
    """A 2CNF procedure received a clause with more than two literals."""


class Infeasible(BackdoorKitError):
    """A cycle contains no deletable vertex, so no feedback vertex set exists."""


class InvalidBackdoor(BackdoorKitError):
    """A claimed backdoor set failed verification."""


class InvalidTree(BackdoorKitError):
    """A backdoor tree failed validation."""
