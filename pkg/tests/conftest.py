import pytest

from relaylab import fileio
from relaylab.graphcore import DirectedGraph, NodeAttributes, MINER, FULL


@pytest.fixture(scope="session")
def btc_graph():
    return fileio.parse_matrix(fileio.BTC_SNAPSHOT)


@pytest.fixture(scope="session")
def bsv_graph():
    return fileio.parse_matrix(fileio.BSV_SNAPSHOT)


@pytest.fixture(scope="session")
def weighted_relay():
    return fileio.parse_edges(fileio.WEIGHTED_RELAY_EDGES, fileio.WEIGHTED_RELAY_NODES)


@pytest.fixture(scope="session")
def core_decomposition():
    return fileio.parse_edges(fileio.CORE_DECOMP_EDGES, fileio.CORE_DECOMP_NODES)


@pytest.fixture(scope="session")
def clique_periphery():
    return fileio.parse_edges(
        fileio.CLIQUE_PERIPHERY_EDGES, fileio.CLIQUE_PERIPHERY_NODES
    )


def miner_attrs(n):
    return [NodeAttributes(node_class=MINER) for _ in range(n)]


def full_attrs(n):
    return [NodeAttributes(node_class=FULL) for _ in range(n)]


def undirected(attrs, pairs, latency=1.0):
    """Convenience: build a graph with both orientations per pair."""
    edges = []
    for item in pairs:
        if len(item) == 3:
            a, b, lat = item
        else:
            a, b = item
            lat = latency
        edges.append((a, b, lat))
        edges.append((b, a, lat))
    return DirectedGraph(attrs, edges)


@pytest.fixture(scope="session")
def path3():
    """a - b - c symmetrized path."""
    return undirected(full_attrs(3), [(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def star4():
    """hub 0 with leaves 1..3, symmetrized."""
    return undirected(full_attrs(4), [(0, 1), (0, 2), (0, 3)])


def complete_graph(n, latency=1.0, cls=FULL):
    attrs = [NodeAttributes(node_class=cls) for _ in range(n)]
    edges = []
    for i in range(n):
        for j in range(n):
            if i != j:
                edges.append((i, j, latency))
    return DirectedGraph(attrs, edges)
