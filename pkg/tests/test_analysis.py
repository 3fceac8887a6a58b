import itertools
import math

import numpy as np
import pytest

from relaylab.analysis import (
    ExclusionResult,
    kcore_class_audit,
    path_exclusion,
    permutation_significance,
    removal_invariance,
    robustness_curve,
)
from relaylab.errors import ParameterError
from relaylab.generators import CorePeripheryConfig, core_periphery, erdos_renyi
from relaylab.graphcore import FULL, MINER, DirectedGraph, NodeAttributes
from relaylab.metrics import LATENCY
from relaylab.propagation import SimConfig, backbone_check, flood_static
from relaylab.structure import k_core

from conftest import complete_graph, full_attrs, miner_attrs, undirected
from oracles import enumerate_shortest_paths, random_graph


def classed_random_graph(rng, n, p, miner_frac=0.4):
    base = random_graph(rng, n, p, weighted=True)
    attrs = [
        NodeAttributes(node_class=MINER if rng.random() < miner_frac else FULL)
        for _ in range(n)
    ]
    return DirectedGraph(attrs, base.edges())


def brute_force_exclusion(g, sources, targets):
    """Contaminated-pair count by enumerating every tied geodesic."""
    fulls = set(g.full_nodes())
    total = contaminated = 0
    for s in sources:
        for t in targets:
            if s == t:
                continue
            paths = enumerate_shortest_paths(g, s, t, weight="latency")
            if not paths:
                continue
            total += 1
            if any(any(v in fulls for v in p[1:-1]) for p in paths):
                contaminated += 1
    return total, contaminated


class TestPathExclusion:
    def test_clique_periphery_pendants_never_interior(self, clique_periphery):
        g = clique_periphery.graph
        result = path_exclusion(g, g.full_nodes(), g.miners())
        assert result.exclusion_fraction == 1.0
        assert result.paths_with_fullnode_interior == 0

    def test_forced_interior_chain(self):
        attrs = [
            NodeAttributes(node_class=MINER),
            NodeAttributes(node_class=FULL),
            NodeAttributes(node_class=MINER),
        ]
        g = undirected(attrs, [(0, 1, 5.0), (1, 2, 5.0)])
        result = path_exclusion(g, [0], [2])
        assert result.exclusion_fraction == 0.0
        assert result.interior_hits[1] == 1

    def test_acceptance_scale_core_periphery(self):
        g = core_periphery(
            CorePeripheryConfig(
                miner_count=50, full_count=450, core_density=0.8, periphery_links=2,
                core_latency=10.0, periphery_latency=200.0,
            ),
            seed=2026,
        )
        result = path_exclusion(g, "all", "miners")
        assert result.exclusion_fraction >= 0.98

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(101)
        done = 0
        while done < 20:
            n = int(rng.integers(3, 10))
            g = classed_random_graph(rng, n, float(rng.uniform(0.2, 0.6)))
            sources = list(g.nodes())
            targets = g.miners()
            if not targets:
                continue
            oracle_total, oracle_contaminated = brute_force_exclusion(
                g, sources, targets
            )
            if oracle_total == 0:
                continue
            result = path_exclusion(g, sources, targets)
            assert result.total_paths == oracle_total
            assert result.paths_with_fullnode_interior == oracle_contaminated
            done += 1

    def test_unreachable_pairs_tallied(self):
        attrs = miner_attrs(2) + [NodeAttributes(node_class=FULL)]
        g = DirectedGraph(attrs, [(0, 1, 1.0)])
        result = path_exclusion(g, [0, 2], [1])
        assert result.total_paths == 1
        assert result.unreachable_pairs == 1

    def test_empty_sets_rejected(self, clique_periphery):
        with pytest.raises(ParameterError):
            path_exclusion(clique_periphery.graph, [], "miners")


class TestPermutation:
    def test_constant_statistic_z_undefined(self):
        # triangle count is invariant under swaps that find no legal
        # move: a directed 3-cycle has none
        g = DirectedGraph(full_attrs(3), [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        result = permutation_significance(g, "triangle_count", samples=20, seed=1)
        assert not result.z_defined
        assert result.p_upper_bound == 1.0

    def test_observed_at_null_mean_gives_zero_z(self):
        # an ER graph is its own null: z should hover near zero
        g = erdos_renyi(40, 0.2, seed=5)
        attrs = [NodeAttributes(node_class=MINER) for _ in range(40)]
        g = DirectedGraph(attrs, g.edges())
        result = permutation_significance(g, "triangle_count", samples=40, seed=2)
        assert result.z_defined
        assert abs(result.z) < 3.0

    def test_pendant_geometry_survives_rewiring_exactly(self, clique_periphery):
        # a complete core is swap-frozen and pendant fulls keep their
        # leaf position in every legal swap, so the interior-pair null
        # has zero variance: undefined z, p at its upper bound
        result = permutation_significance(
            clique_periphery.graph, "fullnode_interior_pairs", samples=30, seed=3
        )
        assert result.observed == 0.0
        assert not result.z_defined
        assert result.p_upper_bound == 1.0

    def test_interior_pairs_low_contrast_under_degree_null(self):
        # degree-preserving rewiring keeps full nodes low-degree, which
        # already keeps them off geodesics: the exclusion contrast under
        # this null is structural but weak (|z| far below 5)
        g = core_periphery(
            CorePeripheryConfig(miner_count=12, full_count=48, core_density=0.9,
                                periphery_links=2), seed=8,
        )
        result = permutation_significance(
            g, "fullnode_interior_pairs", samples=60, seed=3
        )
        assert result.z_defined
        assert result.z <= 0.0  # observed no worse than the null
        assert abs(result.z) < 5.0
        assert result.tail == "left"

    def test_perron_mass_strongly_significant(self):
        # the smooth spectral statistic separates the engineered core
        # from its degree-preserving nulls by many standard deviations
        g = core_periphery(
            CorePeripheryConfig(miner_count=12, full_count=48, core_density=0.9,
                                periphery_links=2), seed=8,
        )
        result = permutation_significance(g, "miner_perron_mass", samples=60, seed=3)
        assert result.z_defined
        assert result.z > 5.0
        assert result.p_upper_bound <= 1 / 61 + 1e-12
        assert result.tail == "right"

    def test_p_floor_respected(self, clique_periphery):
        result = permutation_significance(
            clique_periphery.graph, "triangle_count", samples=30, seed=4
        )
        assert result.p_upper_bound >= 1 / 31

    def test_deterministic(self, clique_periphery):
        a = permutation_significance(clique_periphery.graph, "triangle_count", 25, 9)
        b = permutation_significance(clique_periphery.graph, "triangle_count", 25, 9)
        assert a == b

    def test_sample_floor(self, clique_periphery):
        with pytest.raises(ParameterError):
            permutation_significance(clique_periphery.graph, "triangle_count", 5, 0)

    def test_unknown_statistic(self, clique_periphery):
        with pytest.raises(ParameterError, match="unknown statistic"):
            permutation_significance(clique_periphery.graph, "nope", 20, 0)


class TestRobustness:
    def test_star_hub_shatters(self):
        g = undirected(full_attrs(6), [(0, i) for i in range(1, 6)])
        curve = robustness_curve(g, "degree", steps=1)
        assert curve.points[0].largest_component == 6
        assert curve.points[1].largest_component == 1

    def test_complete_graph_peels_one_at_a_time(self):
        curve = robustness_curve(complete_graph(6), "degree", steps=1)
        assert [p.largest_component for p in curve.points] == [6, 5]

    def test_monotone_nonincreasing(self):
        rng = np.random.default_rng(6)
        for ranking in ("degree", "eigenvector", "betweenness"):
            g = classed_random_graph(rng, 25, 0.15)
            curve = robustness_curve(g, ranking, steps=10)
            sizes = [p.largest_component for p in curve.points]
            assert all(a >= b for a, b in zip(sizes, sizes[1:]))

    def test_core_periphery_eigenvector_attack_collapses(self):
        cfg = CorePeripheryConfig(
            miner_count=20, full_count=180, core_density=0.9, periphery_links=1,
            core_latency=10.0, periphery_latency=200.0,
        )
        for seed in range(20):
            g = core_periphery(cfg, seed=seed)
            curve = robustness_curve(g, "eigenvector", steps=20)
            # the adaptive eigenvector attack takes out the miner core:
            # a >5x collapse of the largest component
            assert curve.points[-1].largest_component <= 200 / 5
            assert set(curve.removed_nodes) <= set(g.miners())
            # random full-node removal leaves the core intact
            rng = np.random.default_rng(seed)
            fulls = rng.choice(g.full_nodes(), size=20, replace=False)
            from relaylab.graphcore import connected_components, remove_nodes

            rest, _ = remove_nodes(g, [int(v) for v in fulls])
            assert max(len(c) for c in connected_components(rest)) >= 20

    def test_truncation_flag(self, star4):
        curve = robustness_curve(star4, "degree", steps=10)
        assert curve.truncated
        assert len(curve.points) == star4.node_count + 1

    def test_static_mode_ranks_once(self, clique_periphery):
        g = clique_periphery.graph
        adaptive = robustness_curve(g, "degree", steps=3, adaptive=True)
        static = robustness_curve(g, "degree", steps=3, adaptive=False)
        assert len(static.points) == len(adaptive.points) == 4


class TestRemovalInvariance:
    def test_clique_periphery_exact_invariance(self, clique_periphery):
        g = clique_periphery.graph
        report = backbone_check(g)
        assert report.dominating and report.fullnode_interior_paths == 0
        schedule = [(0.0, m) for m in g.miners()]
        cfg = SimConfig(miner_count=6, full_count=6, total_steps=10,
                        step_length=100000.0, rng=0)
        traces = flood_static(g, schedule, horizon=cfg.horizon_ms)
        result = removal_invariance(g, traces, cfg)
        assert result.miner_connected_before and result.miner_connected_after
        assert result.max_distance_delta == 0.0
        assert result.max_reception_delta == 0.0
        assert result.newly_unreached_miners == 0
        assert result.spectral_radius_delta == 0.0
        assert result.diameter_after == result.diameter_before

    def test_broken_connectivity_reported(self):
        attrs = [
            NodeAttributes(node_class=MINER),
            NodeAttributes(node_class=MINER),
            NodeAttributes(node_class=FULL),
        ]
        g = undirected(attrs, [(0, 2, 5.0), (1, 2, 5.0)])
        cfg = SimConfig(miner_count=2, full_count=1, seed_miner_bias=0.5,
                        total_steps=5, rng=0)
        traces = flood_static(g, [(0.0, 0)], horizon=cfg.horizon_ms)
        result = removal_invariance(g, traces, cfg)
        assert not result.miner_connected_after
        assert result.max_distance_delta == math.inf

    def test_full_origin_reoriginates_at_nearest_miner(self, clique_periphery):
        g = clique_periphery.graph
        f = g.full_nodes()[0]
        cfg = SimConfig(miner_count=6, full_count=6, total_steps=10,
                        step_length=100000.0, rng=0)
        traces = flood_static(g, [(0.0, f)], horizon=cfg.horizon_ms)
        result = removal_invariance(g, traces, cfg)
        assert result.reoriginated_tx == [0]

    def test_needs_two_miners(self, star4):
        with pytest.raises(ParameterError):
            removal_invariance(star4, [], SimConfig(miner_count=1, full_count=3))


class TestKCoreAudit:
    def test_clique_periphery_composition(self, clique_periphery):
        g = clique_periphery.graph
        coreness = k_core(g)
        audit = kcore_class_audit(coreness, [g.node_class(v) for v in g.nodes()])
        assert audit.violations == []
        assert audit.shell_composition[5] == {"miner": 6}
        assert audit.shell_composition[1] == {"full": 6}

    def test_all_miner_clique_vacuous(self):
        g = complete_graph(5, cls=MINER)
        audit = kcore_class_audit(k_core(g), [MINER] * 5)
        assert audit.violations == []

    def test_adversarial_full_clique_flagged(self):
        g = complete_graph(4, cls=FULL)
        audit = kcore_class_audit(k_core(g), [FULL] * 4)
        assert audit.violations == [0, 1, 2, 3]
