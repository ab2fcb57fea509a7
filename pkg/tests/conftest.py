import pytest

from ltlcheck.automaton import from_edges
from ltlcheck.dataset import generate_corpus


@pytest.fixture
def fig1a():
    """Two-state automaton for ``a U b`` with an accepting sink."""
    return from_edges(2, 0, {1}, [(0, "a", 0), (0, "b", 1), (1, "1", 1)])


@pytest.fixture
def fig3a():
    """Two-state system whose transitions mention a and b, a and b, nothing."""
    return from_edges(2, 0, {1}, [(0, "a & b", 0), (1, "1", 1), (0, "!b", 1)])


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus("short_like", 40, 11)
