"""Experiment harness: exclusion statistics, permutation tests,
targeted-removal robustness, and full-node removal invariance.

Exclusion counts a source-target pair as contaminated when *any* tied
latency-shortest path carries a full-node interior vertex (the
conservative reading under geodesic ties). Null models for the
permutation tests are degree-preserving double-edge-swap rewires with
per-sample derived seeds, so every experiment replays exactly from its
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UndefinedMetricError
from .generators import degree_preserving_rewire
from .graphcore import (
    BINARY,
    FULL,
    DirectedGraph,
    NodeClass,
    connected_components,
    induced_subgraph,
    remove_nodes,
)
from .metrics import LATENCY
from .pathtools import distance_matrix, interior_hit_counts, interior_pair_count
from .propagation import PropagationTrace, SimConfig, backbone_check, flood_static
from .spectral import adjacency_operator, eigenvector_centrality, perron_mass, principal_eigenpair
from .structure import CorenessMap, count_triangles


@dataclass(frozen=True)
class ExclusionResult:
    total_paths: int  # reachable ordered (s, t) pairs
    paths_with_fullnode_interior: int
    exclusion_fraction: float  # 1 - contaminated / total
    unreachable_pairs: int
    interior_hits: list[int]  # per node, over all examined pairs


def _resolve_node_set(g: DirectedGraph, spec) -> list[int]:
    if isinstance(spec, str):
        if spec == "all":
            return list(g.nodes())
        if spec == "miners":
            return g.miners()
        if spec == "full":
            return g.full_nodes()
        raise ParameterError(f"unknown node-set spec {spec!r}")
    ids = sorted(set(int(v) for v in spec))
    for v in ids:
        if not (0 <= v < g.node_count):
            raise ParameterError(f"unknown node id {v} in node set")
    return ids


def path_exclusion(g: DirectedGraph, sources, targets) -> ExclusionResult:
    """Share of shortest source->target relay paths free of full-node
    interiors, over every tied geodesic."""
    src = _resolve_node_set(g, sources)
    tgt = _resolve_node_set(g, targets)
    if not src or not tgt:
        raise ParameterError("sources and targets must be nonempty")
    dist = distance_matrix(g, LATENCY)
    fulls = g.full_nodes()
    reachable, contaminated, unreachable = interior_pair_count(dist, src, tgt, fulls)
    if reachable == 0:
        raise UndefinedMetricError("no reachable source-target pair")
    hits = interior_hit_counts(dist, src, tgt)
    return ExclusionResult(
        total_paths=reachable,
        paths_with_fullnode_interior=contaminated,
        exclusion_fraction=1.0 - contaminated / reachable,
        unreachable_pairs=unreachable,
        interior_hits=hits.tolist(),
    )


@dataclass(frozen=True)
class PermutationTest:
    statistic: str
    observed: float
    null_mean: float
    null_std: float
    z: float  # nan when the null variance vanishes
    p_upper_bound: float
    samples: int
    tail: str  # "right" | "left"

    @property
    def z_defined(self) -> bool:
        return not math.isnan(self.z)


def _stat_fullnode_interior_pairs(g: DirectedGraph) -> float:
    dist = distance_matrix(g, LATENCY)
    miners = g.miners()
    if not miners:
        raise ParameterError("statistic needs at least one miner")
    _, contaminated, _ = interior_pair_count(
        dist, list(g.nodes()), miners, g.full_nodes()
    )
    return float(contaminated)


def _stat_miner_perron_mass(g: DirectedGraph) -> float:
    return perron_mass(g, g.miners())


def _stat_triangle_count(g: DirectedGraph) -> float:
    return float(count_triangles(g))


# closed statistic registry: name -> (fn, tail direction of "interesting")
STATISTICS = {
    "fullnode_interior_pairs": (_stat_fullnode_interior_pairs, "left"),
    "miner_perron_mass": (_stat_miner_perron_mass, "right"),
    "triangle_count": (_stat_triangle_count, "right"),
}

REWIRE_SWAPS_PER_EDGE = 10


def permutation_significance(
    g: DirectedGraph, statistic: str, samples: int, seed: int
) -> PermutationTest:
    """Observed statistic vs degree-preserving rewired null graphs.

    Null sample i uses the child seed derived from (seed, i); each null
    graph gets 10 * |E| swap attempts. The empirical p upper bound is
    (1 + #{null at least as extreme}) / (samples + 1).
    """
    if statistic not in STATISTICS:
        raise ParameterError(
            f"unknown statistic {statistic!r}; choose from {sorted(STATISTICS)}"
        )
    if samples < 20:
        raise ParameterError(f"need >= 20 null samples, got {samples}")
    fn, tail = STATISTICS[statistic]
    observed = fn(g)
    swaps = REWIRE_SWAPS_PER_EDGE * g.edge_count
    null_values = np.empty(samples)
    for i in range(samples):
        child = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,)).generate_state(1)[0]
        )
        null = degree_preserving_rewire(g, swaps, child)
        null_values[i] = fn(null)
    mean = float(null_values.mean())
    std = float(null_values.std(ddof=0))
    z = (observed - mean) / std if std > 0 else math.nan
    if tail == "right":
        extreme = int((null_values >= observed).sum())
    else:
        extreme = int((null_values <= observed).sum())
    p = (1 + extreme) / (samples + 1)
    return PermutationTest(
        statistic=statistic,
        observed=observed,
        null_mean=mean,
        null_std=std,
        z=z,
        p_upper_bound=p,
        samples=samples,
        tail=tail,
    )


@dataclass(frozen=True)
class RobustnessPoint:
    removed: int
    largest_component: int
    reachable_pair_fraction: float


@dataclass(frozen=True)
class RobustnessCurve:
    ranking: str
    adaptive: bool
    points: list[RobustnessPoint]  # first point is the intact graph
    removed_nodes: list[int]
    truncated: bool


DEGREE = "degree"
BETWEENNESS = "betweenness"
EIGENVECTOR = "eigenvector"


def _rank_scores(g: DirectedGraph, ranking: str) -> list[float]:
    if ranking == DEGREE:
        return [g.in_degree(v) + g.out_degree(v) for v in g.nodes()]
    if ranking == BETWEENNESS:
        from .metrics import betweenness

        return betweenness(g.symmetrized(), weight="hop")
    if ranking == EIGENVECTOR:
        if g.edge_count == 0:
            return [0.0] * g.node_count
        return eigenvector_centrality(g)
    raise ParameterError(f"unknown ranking {ranking!r}")


def _component_stats(g: DirectedGraph) -> tuple[int, float]:
    if g.node_count == 0:
        return 0, 0.0
    comps = connected_components(g)
    largest = max(len(c) for c in comps)
    n = g.node_count
    if n < 2:
        return largest, 0.0
    reachable = sum(len(c) * (len(c) - 1) for c in comps)
    return largest, reachable / (n * (n - 1))


def robustness_curve(
    g: DirectedGraph, ranking: str, steps: int, adaptive: bool = True
) -> RobustnessCurve:
    """Largest-component decay under targeted node removal.

    Adaptive mode (default) re-ranks after every removal - the stronger
    attack; static mode ranks once up front. Ties break toward the
    lower node id. Requesting more steps than nodes truncates with a
    flag.
    """
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    truncated = steps > g.node_count
    steps = min(steps, g.node_count)
    current = g
    # original ids of the current graph's positions
    alias = list(g.nodes())
    largest, frac = _component_stats(current)
    points = [RobustnessPoint(0, largest, frac)]
    removed: list[int] = []
    static_order: list[int] | None = None
    if not adaptive:
        scores = _rank_scores(g, ranking)
        static_order = sorted(g.nodes(), key=lambda v: (-scores[v], v))
    for step in range(steps):
        if not adaptive:
            target_orig = static_order[step]
            target = alias.index(target_orig)
        else:
            scores = _rank_scores(current, ranking)
            target = min(
                range(current.node_count), key=lambda v: (-scores[v], alias[v])
            )
            target_orig = alias[target]
        current, index_map = remove_nodes(current, [target])
        alias = [alias[old] for old in sorted(index_map)]
        removed.append(target_orig)
        largest, frac = _component_stats(current)
        points.append(RobustnessPoint(len(removed), largest, frac))
    return RobustnessCurve(
        ranking=ranking,
        adaptive=adaptive,
        points=points,
        removed_nodes=removed,
        truncated=truncated,
    )


@dataclass(frozen=True)
class RemovalInvarianceReport:
    miner_connected_before: bool
    miner_connected_after: bool
    max_distance_delta: float  # over miner ordered pairs, inf if broken
    max_reception_delta: float  # over miners reached in both runs, per tx
    newly_unreached_miners: int
    diameter_before: float
    diameter_after: float
    spectral_radius_delta: float  # of the miner-block adjacency
    reoriginated_tx: list[int]  # schedule indices whose origin was removed


def removal_invariance(
    g: DirectedGraph,
    traces_before: list[PropagationTrace],
    cfg: SimConfig,
) -> RemovalInvarianceReport:
    """Re-run the flood schedule on G minus all full nodes and diff.

    The after-run is forced static (no churn, full uptime) because the
    comparison is about topology, not churn realizations; origins that
    were full nodes re-originate at their latency-nearest miner and get
    flagged. Distances compare the miner block of the all-pairs matrix
    before and after.
    """
    miners = g.miners()
    if len(miners) < 2:
        raise ParameterError("removal invariance needs >= 2 miners")
    fulls = g.full_nodes()
    g_after, index_map = remove_nodes(g, fulls)

    dist_before = distance_matrix(g, LATENCY)
    dist_after = distance_matrix(g_after, LATENCY)
    m_idx = np.asarray(miners)
    before_block = dist_before[np.ix_(m_idx, m_idx)]
    after_ids = np.asarray([index_map[v] for v in miners])
    after_block = dist_after[np.ix_(after_ids, after_ids)]
    both_finite = np.isfinite(before_block) & np.isfinite(after_block)
    broke = bool((np.isfinite(before_block) & ~np.isfinite(after_block)).any())
    if both_finite.any():
        max_dist_delta = float(np.abs(before_block - after_block)[both_finite].max())
    else:
        max_dist_delta = 0.0
    if broke:
        max_dist_delta = math.inf

    def _block_diameter(block: np.ndarray) -> float:
        off = block[~np.eye(block.shape[0], dtype=bool)]
        finite = off[np.isfinite(off)]
        return float(finite.max()) if finite.size else math.nan

    # the miner-block adjacency is untouched by full-node removal, so its
    # spectral radius delta is an exact-zero audit, reported for the record
    miner_sub, _ = induced_subgraph(g, miners)
    if miner_sub.edge_count:
        rho_before = principal_eigenpair(
            adjacency_operator(miner_sub.symmetrized(), BINARY)
        ).value
        after_miner_sub, _ = induced_subgraph(g_after, sorted(index_map[v] for v in miners))
        rho_after = principal_eigenpair(
            adjacency_operator(after_miner_sub.symmetrized(), BINARY)
        ).value
        rho_delta = abs(rho_after - rho_before)
    else:
        rho_delta = 0.0

    # replay the schedule on the pruned graph, statically
    schedule_after: list[tuple[float, int]] = []
    reoriginated: list[int] = []
    for trace in traces_before:
        origin = trace.origin
        if origin in index_map:
            schedule_after.append((trace.origin_time_ms, index_map[origin]))
        else:
            reoriginated.append(trace.tx_id)
            finite = [
                (dist_before[origin, m], m) for m in miners if np.isfinite(dist_before[origin, m])
            ]
            if not finite:
                raise UndefinedMetricError(
                    f"trace {trace.tx_id}: removed origin {origin} reaches no miner"
                )
            _, nearest = min(finite)
            schedule_after.append((trace.origin_time_ms, index_map[nearest]))

    static_traces = flood_static(
        g_after,
        schedule_after,
        processing_delay=cfg.relay_processing_delay,
        horizon=cfg.horizon_ms,
    )

    max_rx_delta = 0.0
    newly_unreached = 0
    for trace, after_trace in zip(traces_before, static_traces):
        for m in miners:
            m_after = index_map[m]
            before_t = trace.first_reception.get(m)
            after_t = after_trace.first_reception.get(m_after)
            if before_t is not None and after_t is None:
                newly_unreached += 1
            elif before_t is not None and after_t is not None:
                max_rx_delta = max(max_rx_delta, abs(after_t - before_t))

    comps_before = backbone_check(g).miner_subgraph_connected
    comps_after = (
        len(connected_components(induced_subgraph(g_after, sorted(index_map[v] for v in miners))[0]))
        == 1
    )
    return RemovalInvarianceReport(
        miner_connected_before=comps_before,
        miner_connected_after=comps_after,
        max_distance_delta=max_dist_delta,
        max_reception_delta=max_rx_delta,
        newly_unreached_miners=newly_unreached,
        diameter_before=_block_diameter(before_block),
        diameter_after=_block_diameter(after_block),
        spectral_radius_delta=rho_delta,
        reoriginated_tx=reoriginated,
    )


@dataclass(frozen=True)
class KCoreAudit:
    shell_composition: dict[int, dict[str, int]]  # k -> class -> count
    violations: list[int]  # full nodes with coreness >= 3


DEEP_CORE_K = 3


def kcore_class_audit(coreness: CorenessMap, classes: list[NodeClass]) -> KCoreAudit:
    """Class composition of every k-shell plus deep-core full nodes."""
    if len(coreness.coreness) != len(classes):
        raise ParameterError("coreness and classes must align")
    shells: dict[int, dict[str, int]] = {}
    violations = []
    for v, (k, cls) in enumerate(zip(coreness.coreness, classes)):
        shells.setdefault(k, {}).setdefault(cls.value, 0)
        shells[k][cls.value] += 1
        if cls is FULL and k >= DEEP_CORE_K:
            violations.append(v)
    return KCoreAudit(shell_composition=shells, violations=violations)
