import os

import hypothesis
import pytest

from strategies import random_formulas, tiny_universe

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def universe():
    """Every formula with ≤3 variables, ≤4 clauses, width ≤3, up to variable permutation."""
    return tiny_universe()


@pytest.fixture(scope="session")
def universe_sample(universe):
    """Every 13th formula of the tiny universe, for the quick loop."""
    return universe[::13]


@pytest.fixture(scope="session")
def seeded_formulas():
    """The 200 seeded random formulas (3..8 variables, ≤10 clauses)."""
    return random_formulas(200)
