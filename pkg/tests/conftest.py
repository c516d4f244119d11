import numpy as np
import pytest

from cinobf.network import EDGE, NODE, CinDescription
from cinobf.problems import DispatchInstance


class StubRng:
    """Deterministic stand-in for numpy's Generator.

    ``laplace`` returns zeros and ``choice`` picks the most likely outcome
    (or the first ``size`` items when unweighted).
    """

    def laplace(self, loc, scale, size):
        return np.zeros(size)

    def choice(self, a, size=None, replace=True, p=None):
        n = a if isinstance(a, int) else len(a)
        if p is not None:
            return int(np.argmax(p))
        if size is None:
            return 0
        return np.arange(n)[:size]


@pytest.fixture
def stub_rng():
    return StubRng()


def path_graph(n, values=None, kind=NODE):
    edges = [(i, i + 1) for i in range(n - 1)]
    n_sites = n if kind == NODE else n - 1
    values = np.arange(1.0, n_sites + 1) if values is None else values
    return CinDescription(n_nodes=n, edges=edges, locations=range(n_sites), values=values, kind=kind)


def three_generators():
    """Capacities [5, 3, 2], costs [1, 2, 5], demand 8, on a path of 3 buses."""
    G = CinDescription(n_nodes=3, edges=[(0, 1), (1, 2)], locations=[0, 1, 2],
                       values=[5.0, 3.0, 2.0], costs=[1.0, 2.0, 5.0])
    return G, DispatchInstance.from_network(G, 8.0)


@pytest.fixture
def gens3():
    return three_generators()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
