"""Structural decompositions: k-core, cut vertices, MSTs, communities, motifs.

Every operation here is an undirected notion and therefore works on
the symmetrized view of its input (edge {i,j} present iff either
direction exists, weight = cheaper direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UndefinedMetricError
from .graphcore import MINER, DirectedGraph, connected_components, induced_subgraph


@dataclass(frozen=True)
class CorenessMap:
    coreness: list[int]
    max_k: int

    def shell(self, k: int) -> list[int]:
        return [v for v, c in enumerate(self.coreness) if c == k]

    def core(self, k: int) -> list[int]:
        return [v for v, c in enumerate(self.coreness) if c >= k]


def k_core(g: DirectedGraph) -> CorenessMap:
    """Coreness by iterative shell peeling on symmetrized degrees.

    Stage k removes (cascading) every node whose remaining degree is
    <= k; a node peeled at stage k has coreness k.
    """
    sym = g.symmetrized()
    n = sym.node_count
    degree = [sym.out_degree(v) for v in sym.nodes()]
    coreness = [0] * n
    remaining = set(sym.nodes())
    k = 0
    while remaining:
        queue = [v for v in remaining if degree[v] <= k]
        if not queue:
            k += 1
            continue
        while queue:
            v = queue.pop()
            if v not in remaining:
                continue
            coreness[v] = k
            remaining.discard(v)
            for w in sym.out_neighbors(v):
                if w in remaining:
                    degree[w] -= 1
                    if degree[w] <= k:
                        queue.append(w)
    return CorenessMap(coreness=coreness, max_k=max(coreness) if coreness else 0)


def articulation_points(g: DirectedGraph) -> set[int]:
    """Cut vertices of the symmetrized graph (iterative Hopcroft-Tarjan)."""
    sym = g.symmetrized()
    n = sym.node_count
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    points: set[int] = set()
    timer = 0
    for root in sym.nodes():
        if disc[root] != -1:
            continue
        root_children = 0
        stack: list[tuple[int, iter]] = [(root, iter(sorted(sym.out_neighbors(root))))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = v
                    if v == root:
                        root_children += 1
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(sorted(sym.out_neighbors(w)))))
                    advanced = True
                    break
                elif w != parent[v]:
                    low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if u != root and low[v] >= disc[u]:
                        points.add(u)
        if root_children > 1:
            points.add(root)
    return points


@dataclass(frozen=True)
class MstResult:
    edges: list[tuple[int, int, float]]  # (min_id, max_id, weight)
    total_weight: float
    is_forest: bool  # True when the scope was disconnected


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


WHOLE_GRAPH = "whole"
MINER_SUBGRAPH = "miners"


def minimum_spanning_tree(g: DirectedGraph, over: str = WHOLE_GRAPH) -> MstResult:
    """Kruskal on the symmetrized weighted graph.

    Ties break deterministically by (weight, min id, max id). A
    disconnected scope yields a spanning forest, flagged as such.
    """
    if over == WHOLE_GRAPH:
        scope = g
        back = None
    elif over == MINER_SUBGRAPH:
        scope, index_map = induced_subgraph(g, g.miners())
        back = {new: old for old, new in index_map.items()}
    else:
        raise ParameterError(f"unknown MST scope {over!r}")
    und = sorted(scope.undirected_edges(), key=lambda e: (e[2], e[0], e[1]))
    uf = _UnionFind(scope.node_count)
    chosen = []
    for a, b, w in und:
        if uf.union(a, b):
            chosen.append((a, b, w))
    components = len({uf.find(v) for v in range(scope.node_count)})
    if back is not None:
        chosen = [
            (min(back[a], back[b]), max(back[a], back[b]), w) for a, b, w in chosen
        ]
    chosen.sort(key=lambda e: (e[2], e[0], e[1]))
    return MstResult(
        edges=chosen,
        total_weight=sum(w for _, _, w in chosen),
        is_forest=components > 1,
    )


def mst_fullnode_bridging(g: DirectedGraph) -> float:
    """Fraction of miner-miner paths inside the whole-graph MST that
    cross a full node.

    Two miners' tree path avoids full nodes exactly when they stay
    connected after full nodes are deleted from the MST, so the count
    reduces to component bookkeeping.
    """
    mst = minimum_spanning_tree(g, WHOLE_GRAPH)
    n = g.node_count
    miners = set(g.miners())
    uf_all = _UnionFind(n)
    uf_miner = _UnionFind(n)
    for a, b, _ in mst.edges:
        uf_all.union(a, b)
        if a in miners and b in miners:
            uf_miner.union(a, b)
    total = 0
    clean = 0
    groups_all: dict[int, int] = {}
    groups_miner: dict[int, int] = {}
    for v in miners:
        groups_all[uf_all.find(v)] = groups_all.get(uf_all.find(v), 0) + 1
        groups_miner[uf_miner.find(v)] = groups_miner.get(uf_miner.find(v), 0) + 1
    total = sum(c * (c - 1) // 2 for c in groups_all.values())
    clean = sum(c * (c - 1) // 2 for c in groups_miner.values())
    if total == 0:
        return 0.0
    return 1.0 - clean / total


def _modularity(
    adj: list[dict[int, float]], labels: list[int], total_weight: float
) -> float:
    # Q = sum_c [ in_c/(2m) - (tot_c/(2m))^2 ] with in_c counting both
    # orientations of internal edges
    two_m = 2.0 * total_weight
    internal: dict[int, float] = {}
    strength: dict[int, float] = {}
    for v, nbrs in enumerate(adj):
        cv = labels[v]
        strength[cv] = strength.get(cv, 0.0) + sum(nbrs.values())
        for w, wt in nbrs.items():
            if labels[w] == cv:
                internal[cv] = internal.get(cv, 0.0) + wt
    q = 0.0
    for c, tot in strength.items():
        q += internal.get(c, 0.0) / two_m - (tot / two_m) ** 2
    return q


@dataclass(frozen=True)
class CommunityResult:
    labels: list[int]
    modularity: float


def louvain_communities(
    g: DirectedGraph, seed: int, use_inverse_latency: bool = False
) -> CommunityResult:
    """Greedy modularity ascent (local sweeps + aggregation to a fixed point).

    Sweep order is shuffled by the seed, which makes the partition
    deterministic for a given (graph, seed). Edges weigh 1 by default;
    `use_inverse_latency` switches affinity to 1/latency.
    """
    if g.edge_count == 0:
        raise UndefinedMetricError("modularity undefined on an edgeless graph")
    rng = np.random.default_rng(seed)
    base_n = g.node_count

    # working multigraph: adjacency dicts with weights, plus self-weights
    adj: list[dict[int, float]] = [dict() for _ in range(base_n)]
    for a, b, lat in g.undirected_edges():
        w = 1.0 / lat if use_inverse_latency else 1.0
        adj[a][b] = adj[a].get(b, 0.0) + w
        adj[b][a] = adj[b].get(a, 0.0) + w
    self_w = [0.0] * base_n
    total_weight = sum(sum(n.values()) for n in adj) / 2.0

    membership = list(range(base_n))  # original node -> current community label

    while True:
        n = len(adj)
        labels = list(range(n))
        strength = [sum(adj[v].values()) + 2 * self_w[v] for v in range(n)]
        comm_tot = strength[:]
        two_m = 2.0 * total_weight
        improved_any = False
        moved = True
        while moved:
            moved = False
            for v in rng.permutation(n):
                v = int(v)
                cv = labels[v]
                # weights from v into each adjacent community
                links: dict[int, float] = {}
                for w, wt in adj[v].items():
                    links[labels[w]] = links.get(labels[w], 0.0) + wt
                comm_tot[cv] -= strength[v]
                # gain of community c relative to standing alone; staying
                # put is the baseline a move must strictly beat
                best_c = cv
                best_gain = links.get(cv, 0.0) - strength[v] * comm_tot[cv] / two_m
                for c in sorted(links):
                    if c == cv:
                        continue
                    gain = links[c] - strength[v] * comm_tot[c] / two_m
                    if gain > best_gain + 1e-12:
                        best_gain, best_c = gain, c
                labels[v] = best_c
                comm_tot[best_c] += strength[v]
                if best_c != cv:
                    moved = True
                    improved_any = True
        if not improved_any:
            break
        # aggregate communities into super-nodes
        remap: dict[int, int] = {}
        for v in range(n):
            remap.setdefault(labels[v], len(remap))
        new_n = len(remap)
        new_adj: list[dict[int, float]] = [dict() for _ in range(new_n)]
        new_self = [0.0] * new_n
        for v in range(n):
            cv = remap[labels[v]]
            new_self[cv] += self_w[v]
            for w, wt in adj[v].items():
                cw = remap[labels[w]]
                if cv == cw:
                    if v < w:
                        new_self[cv] += wt
                else:
                    new_adj[cv][cw] = new_adj[cv].get(cw, 0.0) + wt
        membership = [remap[labels[membership[orig]]] for orig in range(base_n)]
        adj, self_w = new_adj, new_self
        if len(adj) == n:
            break

    # final modularity on the original graph
    orig_adj: list[dict[int, float]] = [dict() for _ in range(base_n)]
    for a, b, lat in g.undirected_edges():
        w = 1.0 / lat if use_inverse_latency else 1.0
        orig_adj[a][b] = w
        orig_adj[b][a] = w
    q = _modularity(orig_adj, membership, total_weight)
    # canonical labels: renumber by first appearance
    seen: dict[int, int] = {}
    canon = []
    for lab in membership:
        seen.setdefault(lab, len(seen))
        canon.append(seen[lab])
    return CommunityResult(labels=canon, modularity=q)


@dataclass(frozen=True)
class MotifCensus:
    triangles: int
    four_stars: int  # induced claws K_{1,3}
    z_triangle: float  # nan when the null variance vanishes
    z_four_star: float
    null_samples: int


def count_triangles(g: DirectedGraph) -> int:
    sym = g.symmetrized()
    nbrs = [set(sym.out_neighbors(v)) for v in sym.nodes()]
    count = 0
    for a, b, _ in g.undirected_edges():
        count += len(nbrs[a] & nbrs[b])
    return count // 3


def count_claws(g: DirectedGraph) -> int:
    """Induced K_{1,3}: centre v plus three pairwise non-adjacent neighbors."""
    sym = g.symmetrized()
    nbrs = [set(sym.out_neighbors(v)) for v in sym.nodes()]
    total = 0
    for v in sym.nodes():
        ns = sorted(nbrs[v])
        d = len(ns)
        if d < 3:
            continue
        # independent 3-subsets of the neighborhood, by inclusion-exclusion:
        # C(d,3) - m*(d-2) + P2 + t, with m internal edges, P2 adjacent edge
        # pairs, t triangles, all inside G[N(v)]
        local_deg = {u: len(nbrs[u] & nbrs[v]) for u in ns}
        m = sum(local_deg.values()) // 2
        p2 = sum(dd * (dd - 1) // 2 for dd in local_deg.values())
        t = 0
        for u in ns:
            for w in nbrs[u] & nbrs[v]:
                if w > u:
                    t += len(nbrs[u] & nbrs[w] & nbrs[v])
        t //= 3
        triples_with_edge = m * (d - 2) - p2 + t
        total += math.comb(d, 3) - triples_with_edge
    return total


def _gnm_graph(n: int, m: int, rng: np.random.Generator) -> DirectedGraph:
    """Uniform undirected G(n, M), materialized with both orientations."""
    from .graphcore import NodeAttributes

    total_pairs = n * (n - 1) // 2
    if m > total_pairs:
        raise ParameterError(f"cannot place {m} edges among {total_pairs} pairs")
    if total_pairs <= 5_000_000:
        picks = rng.choice(total_pairs, size=m, replace=False)
    else:
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(int(rng.integers(total_pairs)))
        picks = np.fromiter(chosen, dtype=np.int64)
    def row_start(a: int) -> int:
        return a * (2 * n - a - 1) // 2

    edges = []
    for code in sorted(int(p) for p in picks):
        # decode pair index: row a, column b with a < b
        a = (2 * n - 1 - math.isqrt((2 * n - 1) ** 2 - 8 * code)) // 2
        while a + 1 < n and row_start(a + 1) <= code:
            a += 1
        while row_start(a) > code:
            a -= 1
        b = a + 1 + (code - row_start(a))
        edges.append((a, b, 1.0))
        edges.append((b, a, 1.0))
    return DirectedGraph([NodeAttributes() for _ in range(n)], edges)


def motif_census(g: DirectedGraph, null_samples: int, seed: int) -> MotifCensus:
    """Exact triangle/claw counts with z-scores vs G(n, M) null graphs.

    The null matches the symmetrized node and edge count exactly; each
    sample uses a child seed derived from (seed, index).
    """
    if null_samples < 2:
        raise ParameterError("need >= 2 null samples for a z-score")
    tri = count_triangles(g)
    claw = count_claws(g)
    n = g.node_count
    m = len(g.undirected_edges())
    null_tri = np.empty(null_samples)
    null_claw = np.empty(null_samples)
    for i in range(null_samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        null = _gnm_graph(n, m, rng)
        null_tri[i] = count_triangles(null)
        null_claw[i] = count_claws(null)

    def z_of(observed: float, nulls: np.ndarray) -> float:
        std = float(nulls.std(ddof=0))
        if std == 0.0:
            return math.nan
        return (observed - float(nulls.mean())) / std

    return MotifCensus(
        triangles=tri,
        four_stars=claw,
        z_triangle=z_of(tri, null_tri),
        z_four_star=z_of(claw, null_claw),
        null_samples=null_samples,
    )
