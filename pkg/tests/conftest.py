from pathlib import Path

import numpy as np
import pytest

from fracheat.graph import build_graph, is_connected

DATA = Path(__file__).resolve().parent / "data"
CORA_DIR = DATA / "cora"


def random_connected_graph(n, p=0.1, seed=0, wlo=0.5, whi=1.5):
    """Erdos-Renyi edges plus a path backbone, so the graph is always connected."""
    rng = np.random.default_rng(seed)
    edges = {(i, i + 1) for i in range(n - 1)}
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges |= set(zip(iu[keep].tolist(), ju[keep].tolist()))
    edges = sorted(edges)
    w = rng.uniform(wlo, whi, len(edges))
    g = build_graph([(i, j, float(x)) for (i, j), x in zip(edges, w)], n)
    assert is_connected(g)
    return g


def path_graph(n, w=1.0):
    return build_graph([(i, i + 1, w) for i in range(n - 1)], n)


def complete_graph(n):
    return build_graph([(i, j, 1.0) for i in range(n) for j in range(i + 1, n)], n)


def random_regular_graph(n, d, seed=0):
    import networkx as nx
    G = nx.random_regular_graph(d, n, seed=seed)
    return build_graph([(i, j, 1.0) for i, j in G.edges()], n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
