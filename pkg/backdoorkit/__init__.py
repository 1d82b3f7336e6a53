"""
backdoorkit
===========

Backdoor sets for propositional satisfiability: base-class recognition and
solving, weak / strong / deletion backdoor detection, backdoor evaluation
and trees, and benchmark formula generators.
"""

__version__ = "1.0.0"

from backdoorkit.errors import (  # noqa: E402
    BackdoorKitError, BudgetExceeded, DimacsError, Infeasible, InvalidBackdoor,
    InvalidTree, NotInClass, UnsupportedClass, UnsupportedQuery, WidthExceeded,
)
from backdoorkit.formula import (  # noqa: E402
    CnfFormula, SatResult, Weighting, parse_dimacs, reduce, write_dimacs,
)
from backdoorkit.islands import (  # noqa: E402
    ALL_CLASSES, BaseClass, Island, count, is_member, solve,
)
from backdoorkit.detect import (  # noqa: E402
    BackdoorKind, BackdoorQuery, BackdoorResult, backdoor_size, detect, verify_backdoor,
)
from backdoorkit.evaluate import (  # noqa: E402
    count_via_strong, min_leaf_tree, sat_via_strong, sat_via_tree, sat_via_weak,
    validate_tree,
)

__all__ = [
    "__version__",
    "BackdoorKitError", "BudgetExceeded", "DimacsError", "Infeasible", "InvalidBackdoor",
    "InvalidTree", "NotInClass", "UnsupportedClass", "UnsupportedQuery", "WidthExceeded",
    "CnfFormula", "SatResult", "Weighting", "parse_dimacs", "reduce", "write_dimacs",
    "ALL_CLASSES", "BaseClass", "Island", "count", "is_member", "solve",
    "BackdoorKind", "BackdoorQuery", "BackdoorResult", "backdoor_size", "detect", "verify_backdoor",
    "count_via_strong", "min_leaf_tree", "sat_via_strong", "sat_via_tree", "sat_via_weak",
    "validate_tree",
]
