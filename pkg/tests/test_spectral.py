import math

import numpy as np
import pytest

from relaylab.errors import DegenerateSpectrumError, ParameterError, UndefinedMetricError
from relaylab.graphcore import BINARY, INVERSE_LATENCY, DirectedGraph, to_matrix
from relaylab.spectral import (
    adjacency_operator,
    eigenvector_centrality,
    laplacian_connectivity,
    pagerank,
    perron_mass,
    principal_eigenpair,
)

from conftest import complete_graph, full_attrs, undirected
from oracles import dense_eigen_oracle, random_graph


class TestPrincipalEigenpair:
    def test_complete_k4(self):
        result = principal_eigenpair(to_matrix(complete_graph(4), BINARY))
        assert result.value == pytest.approx(3.0, abs=1e-8)
        assert result.vector == pytest.approx(np.full(4, 0.25), abs=1e-8)

    def test_star_bipartite_oscillation_damped(self, star4):
        result = principal_eigenpair(to_matrix(star4, BINARY))
        assert result.value == pytest.approx(math.sqrt(3), abs=1e-8)
        hub, leaf = result.vector[0], result.vector[1]
        assert hub / leaf == pytest.approx(math.sqrt(3), abs=1e-6)

    def test_bsv_matrix_matches_dense_oracle(self, bsv_graph):
        mat = to_matrix(bsv_graph.graph.symmetrized(), BINARY)
        mine = principal_eigenpair(mat)
        lam, vec = dense_eigen_oracle(mat.entries)
        assert mine.value == pytest.approx(lam, abs=1e-8)
        assert mine.vector == pytest.approx(vec, abs=1e-8)

    def test_all_zero_matrix_degenerate(self):
        with pytest.raises(DegenerateSpectrumError):
            principal_eigenpair(np.zeros((3, 3)))

    def test_dag_adjacency_gives_kernel_pair(self, btc_graph):
        # nilpotent directed adjacency: exact eigenpair with value 0
        result = principal_eigenpair(to_matrix(btc_graph.graph, BINARY))
        assert result.value == 0.0
        assert result.residual == 0.0

    def test_residual_invariant(self):
        rng = np.random.default_rng(3)
        tol = 1e-10
        for _ in range(20):
            g = random_graph(rng, int(rng.integers(2, 20)), 0.4, weighted=True)
            mat = to_matrix(g.symmetrized(), BINARY)
            if mat.entries.sum() == 0:
                continue
            result = principal_eigenpair(mat, tolerance=tol)
            assert result.residual <= 10 * tol

    def test_oracle_suite_small_graphs(self):
        # 100 random instances up to 50 nodes against the dense solver
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(2, 51))
            g = random_graph(rng, n, float(rng.uniform(0.1, 0.5)))
            mat = to_matrix(g.symmetrized(), BINARY)
            if mat.entries.sum() == 0:
                continue
            mine = principal_eigenpair(mat)
            lam, vec = dense_eigen_oracle(mat.entries)
            assert mine.value == pytest.approx(lam, abs=1e-8)
            # eigenvector comparison is meaningful when the gap is real
            gap_ok = True
            eigs = np.sort(np.abs(np.linalg.eigvalsh(mat.entries)))[::-1]
            gap_ok = eigs[0] - eigs[1] > 1e-6
            if gap_ok:
                assert mine.vector == pytest.approx(vec, abs=1e-7)

    def test_scaling_leaves_vector_unchanged(self, clique_periphery):
        mat = to_matrix(clique_periphery.graph.symmetrized(), BINARY)
        base = principal_eigenpair(mat)
        scaled = principal_eigenpair(mat.entries * 7.5)
        assert scaled.value == pytest.approx(7.5 * base.value, rel=1e-9)
        assert scaled.vector == pytest.approx(base.vector, abs=1e-9)
        assert np.argmax(scaled.vector) == np.argmax(base.vector)


class TestEigenvectorCentrality:
    def test_cycle_uniform(self):
        cycle = undirected(full_attrs(6), [(i, (i + 1) % 6) for i in range(6)])
        values = eigenvector_centrality(cycle)
        assert values == pytest.approx([1 / 6] * 6, abs=1e-8)

    def test_clique_periphery_miners_dominate(self, clique_periphery):
        g = clique_periphery.graph
        values = eigenvector_centrality(g)
        lam, vec = dense_eigen_oracle(to_matrix(g.symmetrized(), BINARY).entries)
        assert values == pytest.approx(vec, abs=1e-7)
        worst_miner = min(values[v] for v in g.miners())
        best_full = max(values[v] for v in g.full_nodes())
        assert worst_miner > best_full

    def test_disconnected_mass_on_dominant_component(self):
        # K5 with K3: the K5 block carries the whole Perron vector
        pairs = [(i, j) for i in range(5) for j in range(i + 1, 5)]
        pairs += [(a, b) for a, b in [(5, 6), (5, 7), (6, 7)]]
        g = undirected(full_attrs(8), pairs)
        values = eigenvector_centrality(g)
        assert sum(values[v] for v in range(5)) == pytest.approx(1.0, abs=1e-6)
        assert max(values[5:]) < 1e-6


class TestPerronMass:
    def test_full_set_is_one(self, clique_periphery):
        g = clique_periphery.graph
        assert perron_mass(g, list(g.nodes())) == pytest.approx(1.0, abs=1e-9)

    def test_empty_set_zero(self, clique_periphery):
        assert perron_mass(clique_periphery.graph, []) == 0.0

    def test_core_periphery_mass_concentration(self):
        from relaylab.generators import CorePeripheryConfig, core_periphery

        g = core_periphery(
            CorePeripheryConfig(
                miner_count=25,
                full_count=475,
                core_density=0.9,
                periphery_links=1,
                core_latency=10.0,
                periphery_latency=400.0,
            ),
            seed=7,
        )
        assert perron_mass(g, g.miners()) >= 0.97


class TestPageRank:
    def test_directed_cycle_uniform(self):
        g = DirectedGraph(full_attrs(3), [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        for d in (0.5, 0.85):
            assert pagerank(g, damping=d) == pytest.approx([1 / 3] * 3, abs=1e-9)

    def test_two_node_chain_against_linear_solve(self):
        # a -> b with b dangling; oracle solves the 2x2 fixed point
        g = DirectedGraph(full_attrs(2), [(0, 1, 1.0)])
        d = 0.85
        mine = pagerank(g, damping=d)
        # v = (1-d)/2 + d*(P v + dangling_mass/2) with P = [[0,0],[1,0]]
        a = np.array([[1.0, -d / 2], [-d, 1.0 - d / 2]])
        b = np.full(2, (1 - d) / 2)
        oracle = np.linalg.solve(a, b)
        oracle = oracle / oracle.sum()
        assert mine == pytest.approx(oracle.tolist(), abs=1e-9)

    def test_sums_to_one_and_uniform_at_low_damping(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            g = random_graph(rng, int(rng.integers(3, 30)), 0.2)
            values = pagerank(g, damping=0.85)
            assert sum(values) == pytest.approx(1.0, abs=1e-9)
            low = pagerank(g, damping=0.01)
            assert max(abs(v - 1 / g.node_count) for v in low) < 0.01

    def test_clique_periphery_miners_outrank(self, clique_periphery):
        g = clique_periphery.graph
        for d in (0.80, 0.85, 0.90, 0.95):
            values = pagerank(g, damping=d)
            assert min(values[v] for v in g.miners()) > max(
                values[v] for v in g.full_nodes()
            )

    def test_damping_validated(self, clique_periphery):
        with pytest.raises(ParameterError):
            pagerank(clique_periphery.graph, damping=1.0)


class TestLaplacianConnectivity:
    def test_complete_k6(self):
        summary = laplacian_connectivity(complete_graph(6))
        assert summary.algebraic_connectivity == pytest.approx(6.0, abs=1e-8)

    def test_path3_spectrum(self, path3):
        summary = laplacian_connectivity(path3)
        assert summary.algebraic_connectivity == pytest.approx(1.0, abs=1e-8)

    def test_disconnected_zero(self):
        g = undirected(full_attrs(4), [(0, 1), (2, 3)])
        summary = laplacian_connectivity(g)
        assert summary.algebraic_connectivity == pytest.approx(0.0, abs=1e-9)

    def test_zero_iff_disconnected_random(self):
        from relaylab.graphcore import connected_components

        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(2, 25))
            g = random_graph(rng, n, float(rng.uniform(0.05, 0.4)))
            summary = laplacian_connectivity(g)
            connected = len(connected_components(g)) == 1
            if connected:
                assert summary.algebraic_connectivity > 1e-9
            else:
                assert summary.algebraic_connectivity == pytest.approx(0.0, abs=1e-9)

    def test_needs_two_nodes(self):
        with pytest.raises(UndefinedMetricError):
            laplacian_connectivity(DirectedGraph(full_attrs(1), []))


class TestAdjacencyOperator:
    def test_matches_dense(self, weighted_relay):
        g = weighted_relay.graph
        sparse = adjacency_operator(g, INVERSE_LATENCY).toarray()
        dense = to_matrix(g, INVERSE_LATENCY).entries
        assert np.allclose(sparse, dense)
