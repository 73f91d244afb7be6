import os
import random
import sys

import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from oracles import random_ast  # noqa: E402

from regexfoundry.automaton import REDUCED_ALPHABET  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SIGMA = REDUCED_ALPHABET.symbols


@st.composite
def small_asts(draw, depth=3):
    """DSL trees over the reduced alphabet, built from a drawn seed."""
    seed = draw(st.integers(0, 2**32 - 1))
    return random_ast(random.Random(seed), SIGMA, depth)


@pytest.fixture
def sigma():
    return SIGMA
