"""Independent oracle implementations used only by the test suite.

Everything here is deliberately naive - dense Floyd-Warshall, full
eigendecompositions, exhaustive path/subset/spanning-tree enumeration -
so the fast implementations in the package are checked against code
that shares none of their machinery.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from relaylab.graphcore import DirectedGraph, NodeAttributes
from relaylab.metrics import HOP

UNREACHED = math.inf


def floyd_warshall(g: DirectedGraph, weight: str = HOP) -> np.ndarray:
    n = g.node_count
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for src, dst, lat in g.edges():
        cost = 1.0 if weight == HOP else lat
        dist[src, dst] = min(dist[src, dst], cost)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def dense_eigen_oracle(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Perron eigenpair via full solve: for a non-negative matrix the
    dominant (spectral-radius) eigenvalue is the largest real one."""
    sym = np.allclose(matrix, matrix.T)
    if sym:
        vals, vecs = np.linalg.eigh(matrix)
    else:
        vals, vecs = np.linalg.eig(matrix)
    idx = int(np.argmax(np.real(vals)))
    vec = np.abs(np.real(vecs[:, idx]))
    total = vec.sum()
    if total > 0:
        vec = vec / total
    return float(np.real(vals[idx])), vec


def enumerate_shortest_paths(
    g: DirectedGraph, s: int, t: int, weight: str = HOP
) -> list[list[int]]:
    """All minimal s->t paths by exhaustive simple-path DFS."""
    best = [math.inf]
    found: list[tuple[float, list[int]]] = []

    def dfs(v: int, cost: float, path: list[int]):
        if cost > best[0] + 1e-12:
            return
        if v == t:
            found.append((cost, list(path)))
            best[0] = min(best[0], cost)
            return
        for w, lat in sorted(g.out_neighbors(v).items()):
            if w in path:
                continue
            step = 1.0 if weight == HOP else lat
            path.append(w)
            dfs(w, cost + step, path)
            path.pop()

    dfs(s, 0.0, [s])
    if not found:
        return []
    minimum = min(c for c, _ in found)
    return [p for c, p in found if abs(c - minimum) <= 1e-9 * max(1.0, minimum)]


def brute_force_betweenness(g: DirectedGraph, weight: str = HOP) -> list[float]:
    n = g.node_count
    score = [0.0] * n
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            paths = enumerate_shortest_paths(g, s, t, weight)
            if not paths:
                continue
            sigma = len(paths)
            for v in range(n):
                if v == s or v == t:
                    continue
                through = sum(1 for p in paths if v in p[1:-1])
                score[v] += through / sigma
    return score


def kcore_definition_check(g: DirectedGraph, coreness: list[int]) -> bool:
    """For every k <= max coreness, {v: coreness >= k} must have min
    symmetrized degree >= k inside itself; and no node may admit a
    deeper core (maximality via greedy peel check)."""
    sym = g.symmetrized()
    max_k = max(coreness, default=0)
    for k in range(max_k + 1):
        members = {v for v, c in enumerate(coreness) if c >= k}
        for v in members:
            inside = sum(1 for w in sym.out_neighbors(v) if w in members)
            if inside < k:
                return False
    # maximality: greedy peel at k = coreness(v) + 1 must remove v
    for v, c in enumerate(coreness):
        k = c + 1
        alive = set(sym.nodes())
        changed = True
        while changed:
            changed = False
            for u in sorted(alive):
                deg = sum(1 for w in sym.out_neighbors(u) if w in alive)
                if deg < k:
                    alive.discard(u)
                    changed = True
        if v in alive:
            return False
    return True


def exhaustive_mst_weight(g: DirectedGraph) -> float | None:
    """Minimum spanning tree weight by trying every edge subset of size
    n-1. None when the graph is disconnected."""
    und = g.undirected_edges()
    n = g.node_count
    if n <= 1:
        return 0.0
    best = None
    for combo in itertools.combinations(und, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for a, b, _ in combo:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok and len({find(v) for v in range(n)}) == 1:
            weight = sum(w for _, _, w in combo)
            if best is None or weight < best:
                best = weight
    return best


def brute_force_motifs(g: DirectedGraph) -> tuple[int, int]:
    """(triangles, induced claws) by subset enumeration."""
    sym = g.symmetrized()
    nbrs = [set(sym.out_neighbors(v)) for v in sym.nodes()]
    nodes = list(sym.nodes())
    triangles = 0
    for a, b, c in itertools.combinations(nodes, 3):
        if b in nbrs[a] and c in nbrs[a] and c in nbrs[b]:
            triangles += 1
    claws = 0
    for quad in itertools.combinations(nodes, 4):
        edges = [
            (x, y) for x, y in itertools.combinations(quad, 2) if y in nbrs[x]
        ]
        if len(edges) != 3:
            continue
        degs = {v: 0 for v in quad}
        for x, y in edges:
            degs[x] += 1
            degs[y] += 1
        if sorted(degs.values()) == [1, 1, 1, 3]:
            claws += 1
    return triangles, claws


def brute_force_assortativity(g: DirectedGraph) -> float:
    sym = g.symmetrized()
    deg = [sym.out_degree(v) for v in sym.nodes()]
    xs, ys = [], []
    for a, b, _ in g.undirected_edges():
        xs += [deg[a] - 1, deg[b] - 1]
        ys += [deg[b] - 1, deg[a] - 1]
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    return float(
        ((x - x.mean()) * (y - y.mean())).sum()
        / math.sqrt(((x - x.mean()) ** 2).sum() * ((y - y.mean()) ** 2).sum())
    )


def brute_force_modularity(g: DirectedGraph, labels: list[int]) -> float:
    und = g.undirected_edges()
    m = len(und)
    sym = g.symmetrized()
    deg = [sym.out_degree(v) for v in sym.nodes()]
    inside = sum(1 for a, b, _ in und if labels[a] == labels[b])
    q = inside / m
    for c in set(labels):
        d_c = sum(deg[v] for v in sym.nodes() if labels[v] == c)
        q -= (d_c / (2 * m)) ** 2
    return q


def random_graph(
    rng: np.random.Generator,
    n: int,
    p: float,
    weighted: bool = False,
    connected_bias: bool = False,
) -> DirectedGraph:
    """Random directed test instance; latencies uniform in (0.5, 10]."""
    edges = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if rng.random() < p:
                lat = float(rng.uniform(0.5, 10.0)) if weighted else 1.0
                edges.append((i, j, lat))
    if connected_bias:
        # staple a random spanning cycle so most instances are connected
        perm = rng.permutation(n)
        for idx in range(n):
            a, b = int(perm[idx]), int(perm[(idx + 1) % n])
            if a != b and all(e[0] != a or e[1] != b for e in edges):
                lat = float(rng.uniform(0.5, 10.0)) if weighted else 1.0
                edges.append((a, b, lat))
    attrs = [NodeAttributes() for _ in range(n)]
    return DirectedGraph(attrs, edges)
