import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaylab.errors import ParameterError, UndefinedMetricError
from relaylab.graphcore import (
    BINARY,
    FULL,
    INVERSE_LATENCY,
    AdjacencyMatrix,
    DirectedGraph,
    NodeAttributes,
    degree_sequences,
    edge_density,
    from_matrix,
    induced_subgraph,
    is_acyclic,
    remove_nodes,
    to_matrix,
)

from conftest import complete_graph, full_attrs, miner_attrs, undirected


class TestConstruction:
    def test_rejects_self_loop(self):
        with pytest.raises(ParameterError, match="self-loop"):
            DirectedGraph(full_attrs(2), [(0, 0, 1.0)])

    def test_rejects_duplicate_edge(self):
        with pytest.raises(ParameterError, match="duplicate"):
            DirectedGraph(full_attrs(2), [(0, 1, 1.0), (0, 1, 2.0)])

    def test_rejects_nonpositive_latency(self):
        with pytest.raises(ParameterError, match="latency"):
            DirectedGraph(full_attrs(2), [(0, 1, 0.0)])

    def test_rejects_dangling_endpoint(self):
        with pytest.raises(ParameterError, match="not a node id"):
            DirectedGraph(full_attrs(2), [(0, 5, 1.0)])

    def test_attribute_validation(self):
        with pytest.raises(ParameterError):
            NodeAttributes(fitness=-1.0)
        with pytest.raises(ParameterError):
            NodeAttributes(uptime=1.5)
        with pytest.raises(ParameterError):
            NodeAttributes(bandwidth=0.0)


class TestInducedSubgraph:
    def test_keep_all_is_identity(self, bsv_graph):
        g = bsv_graph.graph
        sub, index_map = induced_subgraph(g, g.nodes())
        assert sub == g
        assert index_map == {v: v for v in g.nodes()}

    def test_bsv_core_triple(self, bsv_graph):
        # first three rows/cols of the cyclic snapshot: mutual pairs
        # (0,1), (0,2), (1,2) -> six directed edges
        sub, index_map = induced_subgraph(bsv_graph.graph, {0, 1, 2})
        assert sub.node_count == 3
        assert sub.edge_count == 6
        pairs = {(s, d) for s, d, _ in sub.edges()}
        assert pairs == {(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)}

    def test_keep_empty(self, bsv_graph):
        sub, index_map = induced_subgraph(bsv_graph.graph, set())
        assert sub.node_count == 0
        assert sub.edge_count == 0
        assert index_map == {}

    def test_unknown_id_identified(self, bsv_graph):
        with pytest.raises(ParameterError, match="99"):
            induced_subgraph(bsv_graph.graph, {0, 99})

    def test_composition_equals_intersection(self, bsv_graph):
        g = bsv_graph.graph
        first, map1 = induced_subgraph(g, {0, 1, 2, 3, 4})
        second, _ = induced_subgraph(first, {map1[0], map1[2], map1[4]})
        direct, _ = induced_subgraph(g, {0, 2, 4})
        assert second == direct


class TestRemoveNodes:
    def test_remove_nothing(self, core_decomposition):
        g = core_decomposition.graph
        out, _ = remove_nodes(g, set())
        assert out == g

    def test_remove_fulls_keeps_miner_chain(self, core_decomposition):
        # dropping the three pendant full nodes leaves the five-miner
        # chain-with-chord, still one component
        g = core_decomposition.graph
        fulls = g.full_nodes()
        out, index_map = remove_nodes(g, fulls)
        assert out.node_count == 5
        pairs = {(s, d) for s, d, _ in out.edges()}
        expected = set()
        for a, b in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]:
            expected.add((a, b))
            expected.add((b, a))
        assert pairs == expected
        from relaylab.graphcore import connected_components

        assert len(connected_components(out)) == 1

    def test_star_hub_removal_isolates_leaves(self, star4):
        out, _ = remove_nodes(star4, {0})
        assert out.node_count == 3
        assert out.edge_count == 0

    def test_node_count_and_no_incident_edges(self, bsv_graph):
        g = bsv_graph.graph
        out, index_map = remove_nodes(g, {1, 4})
        assert out.node_count == g.node_count - 2
        assert 1 not in index_map and 4 not in index_map


class TestMatrix:
    def test_btc_matrix_roundtrip(self, btc_graph):
        mat = to_matrix(btc_graph.graph, BINARY)
        expected = np.array(
            [
                [0, 1, 1, 0, 0, 0],
                [0, 0, 1, 1, 0, 0],
                [0, 0, 0, 1, 0, 0],
                [0, 0, 0, 0, 1, 1],
                [0, 0, 0, 0, 0, 1],
                [0, 0, 0, 0, 0, 0],
            ],
            dtype=float,
        )
        assert np.array_equal(mat.entries, expected)
        assert int(mat.entries.sum()) == 8

    def test_zero_matrix(self):
        g = DirectedGraph(full_attrs(3), [])
        assert np.array_equal(to_matrix(g).entries, np.zeros((3, 3)))

    def test_inverse_latency_entry(self):
        g = DirectedGraph(full_attrs(2), [(0, 1, 4.0)])
        mat = to_matrix(g, INVERSE_LATENCY)
        assert mat.entries[0, 1] == 0.25
        assert mat.entries[1, 0] == 0.0

    def test_matrix_invariants_enforced(self):
        with pytest.raises(ParameterError, match="diagonal"):
            AdjacencyMatrix(n=2, entries=np.array([[1.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(ParameterError, match="binary"):
            AdjacencyMatrix(n=2, entries=np.array([[0.0, 0.5], [0.0, 0.0]]))

    def test_binary_roundtrip_identity(self, bsv_graph):
        mat = to_matrix(bsv_graph.graph, BINARY)
        again = to_matrix(from_matrix(mat), BINARY)
        assert np.array_equal(mat.entries, again.entries)


class TestDegrees:
    def test_btc_degree_sequences(self, btc_graph):
        seq = degree_sequences(btc_graph.graph)
        assert seq.out_degrees == [2, 2, 1, 2, 1, 0]
        assert seq.in_degrees == [0, 1, 2, 2, 1, 2]

    def test_bsv_out_degrees(self, bsv_graph):
        assert degree_sequences(bsv_graph.graph).out_degrees == [3, 3, 2, 3, 2, 1]

    def test_isolated_node(self):
        g = DirectedGraph(full_attrs(1), [])
        seq = degree_sequences(g)
        assert (seq.in_degrees[0], seq.out_degrees[0]) == (0, 0)

    def test_degree_sums_equal_edge_count(self, bsv_graph, weighted_relay):
        for g in (bsv_graph.graph, weighted_relay.graph):
            seq = degree_sequences(g)
            assert sum(seq.in_degrees) == g.edge_count
            assert sum(seq.out_degrees) == g.edge_count


class TestDensityAcyclicity:
    def test_bsv_density(self, bsv_graph):
        assert edge_density(bsv_graph.graph) == pytest.approx(14 / 30)

    def test_complete_density(self):
        assert edge_density(complete_graph(4)) == 1.0

    def test_edgeless_density(self):
        assert edge_density(DirectedGraph(full_attrs(5), [])) == 0.0

    def test_density_undefined_below_two_nodes(self):
        with pytest.raises(UndefinedMetricError):
            edge_density(DirectedGraph(full_attrs(1), []))

    def test_btc_is_acyclic(self, btc_graph):
        assert is_acyclic(btc_graph.graph)

    def test_bsv_is_cyclic(self, bsv_graph):
        assert not is_acyclic(bsv_graph.graph)

    def test_single_node_acyclic(self):
        assert is_acyclic(DirectedGraph(full_attrs(1), []))


class TestSymmetrized:
    def test_min_latency_wins(self):
        g = DirectedGraph(full_attrs(2), [(0, 1, 5.0), (1, 0, 3.0)])
        sym = g.symmetrized()
        assert sym.latency(0, 1) == 3.0
        assert sym.latency(1, 0) == 3.0

    def test_one_way_becomes_mutual(self):
        g = DirectedGraph(full_attrs(2), [(0, 1, 5.0)])
        sym = g.symmetrized()
        assert sym.has_edge(1, 0) and sym.latency(1, 0) == 5.0


@st.composite
def graph_strategy(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    possible = [(i, j) for i in range(n) for j in range(n) if i != j]
    if possible:
        chosen = draw(
            st.lists(st.sampled_from(possible), unique=True, max_size=len(possible))
        )
    else:
        chosen = []
    edges = [(a, b, 1.0) for a, b in chosen]
    return DirectedGraph(full_attrs(n), edges)


class TestProperties:
    @given(graph_strategy())
    @settings(max_examples=60, deadline=None)
    def test_matrix_roundtrip(self, g):
        mat = to_matrix(g, BINARY)
        assert np.array_equal(to_matrix(from_matrix(mat), BINARY).entries, mat.entries)

    @given(graph_strategy(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_removal_never_keeps_incident_edges(self, g, data):
        f = data.draw(
            st.sets(st.integers(min_value=0, max_value=g.node_count - 1))
        )
        out, index_map = remove_nodes(g, f)
        assert out.node_count == g.node_count - len(f)
        assert set(index_map) == set(g.nodes()) - f

    @given(graph_strategy())
    @settings(max_examples=60, deadline=None)
    def test_degree_sum_invariant(self, g):
        seq = degree_sequences(g)
        assert sum(seq.in_degrees) == sum(seq.out_degrees) == g.edge_count
