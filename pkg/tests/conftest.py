import pytest

from trine.graph import MixedGraph


@pytest.fixture
def ring3() -> MixedGraph:
    """Undirected triangle: the smallest mask (1,1) circle."""
    return MixedGraph(3, undirected=[(0, 1), (1, 2), (0, 2)])
