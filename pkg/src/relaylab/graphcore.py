"""Directed weighted relay graphs with miner/full-node classes.

The graph is the universe every other module operates on: nodes are
dense integer ids 0..n-1, each carrying a class (miner or full node),
a fitness score, bandwidth, and an uptime probability. Edges are
directed relay channels weighted by latency in milliseconds. Graphs
are immutable once constructed, so they can be shared freely across
concurrent analyses.

Undirected algorithms elsewhere in the package run on the symmetrized
view: the undirected edge {i, j} exists iff i->j or j->i does, and its
weight is the cheaper of the two directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, UndefinedMetricError

NodeId = int


class NodeClass(Enum):
    MINER = "miner"
    FULL = "full"


@dataclass(frozen=True)
class NodeAttributes:
    """Per-node state driving attachment and simulation behaviour.

    fitness is the dimensionless attractiveness scalar used by the
    growth models; bandwidth is in messages/ms; uptime is the per-step
    availability probability used by the simulator.
    """

    node_class: NodeClass = NodeClass.FULL
    fitness: float = 1.0
    bandwidth: float = 1.0
    uptime: float = 1.0

    def __post_init__(self):
        if self.fitness < 0:
            raise ParameterError(f"fitness must be >= 0, got {self.fitness}")
        if self.bandwidth <= 0:
            raise ParameterError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not 0.0 <= self.uptime <= 1.0:
            raise ParameterError(f"uptime must be in [0, 1], got {self.uptime}")


MINER = NodeClass.MINER
FULL = NodeClass.FULL

BINARY = "binary"
INVERSE_LATENCY = "inverse-latency"


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Dense n x n matrix with either 0/1 or 1/latency entries."""

    n: int
    entries: np.ndarray
    semantics: str = BINARY

    def __post_init__(self):
        if self.semantics not in (BINARY, INVERSE_LATENCY):
            raise ParameterError(f"unknown matrix semantics {self.semantics!r}")
        if self.entries.shape != (self.n, self.n):
            raise ParameterError(
                f"matrix shape {self.entries.shape} does not match n={self.n}"
            )
        if self.n and np.any(np.diagonal(self.entries) != 0):
            raise ParameterError("adjacency matrix must have a zero diagonal")
        if self.n and np.any(self.entries < 0):
            raise ParameterError("adjacency entries must be >= 0")
        if self.semantics == BINARY and self.n:
            ok = np.isin(self.entries, (0.0, 1.0)).all()
            if not ok:
                raise ParameterError("binary matrix entries must be 0 or 1")


class DegreeSequences(NamedTuple):
    in_degrees: list[int]
    out_degrees: list[int]


class DirectedGraph:
    """Immutable directed graph with latency-weighted edges.

    Construction validates every invariant (existing endpoints, no
    self-loops, positive latency, at most one edge per ordered pair);
    afterwards the instance only exposes read access.
    """

    __slots__ = ("_attrs", "_adj", "_radj", "_edge_count", "_edge_cache", "_sym_cache")

    def __init__(
        self,
        attrs: Sequence[NodeAttributes],
        edges: Iterable[tuple[int, int, float]] = (),
    ):
        self._attrs: tuple[NodeAttributes, ...] = tuple(attrs)
        n = len(self._attrs)
        adj: list[dict[int, float]] = [dict() for _ in range(n)]
        radj: list[dict[int, float]] = [dict() for _ in range(n)]
        count = 0
        for src, dst, latency in edges:
            if not (0 <= src < n):
                raise ParameterError(f"edge source {src} is not a node id in [0, {n})")
            if not (0 <= dst < n):
                raise ParameterError(f"edge target {dst} is not a node id in [0, {n})")
            if src == dst:
                raise ParameterError(f"self-loop rejected at node {src}")
            if latency <= 0:
                raise ParameterError(f"edge {src}->{dst} has non-positive latency {latency}")
            if dst in adj[src]:
                raise ParameterError(f"duplicate edge {src}->{dst} rejected")
            adj[src][dst] = float(latency)
            radj[dst][src] = float(latency)
            count += 1
        self._adj = tuple(adj)
        self._radj = tuple(radj)
        self._edge_count = count
        self._edge_cache: tuple[tuple[int, int, float], ...] | None = None
        self._sym_cache: DirectedGraph | None = None

    # ---- basic accessors ---------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._attrs)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def nodes(self) -> range:
        return range(len(self._attrs))

    def attributes(self, v: int) -> NodeAttributes:
        return self._attrs[v]

    @property
    def attrs(self) -> tuple[NodeAttributes, ...]:
        return self._attrs

    def node_class(self, v: int) -> NodeClass:
        return self._attrs[v].node_class

    def miners(self) -> list[int]:
        return [v for v in self.nodes() if self._attrs[v].node_class is MINER]

    def full_nodes(self) -> list[int]:
        return [v for v in self.nodes() if self._attrs[v].node_class is FULL]

    def has_edge(self, src: int, dst: int) -> bool:
        return 0 <= src < self.node_count and dst in self._adj[src]

    def latency(self, src: int, dst: int) -> float:
        try:
            return self._adj[src][dst]
        except (KeyError, IndexError):
            raise ParameterError(f"no edge {src}->{dst}") from None

    def out_neighbors(self, v: int) -> Mapping[int, float]:
        return self._adj[v]

    def in_neighbors(self, v: int) -> Mapping[int, float]:
        return self._radj[v]

    def out_degree(self, v: int) -> int:
        return len(self._adj[v])

    def in_degree(self, v: int) -> int:
        return len(self._radj[v])

    def edges(self) -> tuple[tuple[int, int, float], ...]:
        """All edges as (src, dst, latency), sorted by (src, dst)."""
        if self._edge_cache is None:
            out = []
            for src in self.nodes():
                for dst in sorted(self._adj[src]):
                    out.append((src, dst, self._adj[src][dst]))
            self._edge_cache = tuple(out)
        return self._edge_cache

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._attrs == other._attrs and self.edges() == other.edges()

    def __hash__(self):
        return hash((self._attrs, self.edges()))

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.node_count}, m={self.edge_count})"

    # ---- symmetrized view ----------------------------------------------------

    def symmetrized(self) -> "DirectedGraph":
        """Undirected view as a directed graph with both orientations.

        {i, j} is present iff i->j or j->i is; both directions carry the
        minimum latency of the existing ones. Cached (graphs are immutable).
        """
        if self._sym_cache is None:
            best: dict[tuple[int, int], float] = {}
            for src, dst, lat in self.edges():
                key = (src, dst) if src < dst else (dst, src)
                prev = best.get(key)
                if prev is None or lat < prev:
                    best[key] = lat
            sym_edges = []
            for (a, b), lat in best.items():
                sym_edges.append((a, b, lat))
                sym_edges.append((b, a, lat))
            g = DirectedGraph(self._attrs, sym_edges)
            g._sym_cache = g
            self._sym_cache = g
        return self._sym_cache

    def undirected_edges(self) -> list[tuple[int, int, float]]:
        """Each symmetrized edge once, as (min_id, max_id, weight), sorted."""
        sym = self.symmetrized()
        return [(a, b, w) for a, b, w in sym.edges() if a < b]


# ---- module operations -----------------------------------------------------


def induced_subgraph(
    g: DirectedGraph, keep: Iterable[int]
) -> tuple[DirectedGraph, dict[int, int]]:
    """Subgraph on `keep`, densely re-indexed.

    Returns the new graph and the old-id -> new-id map. Attributes are
    preserved; every edge with both endpoints kept survives.
    """
    keep_set = set(keep)
    for v in sorted(keep_set):
        if not (0 <= v < g.node_count):
            raise ParameterError(f"unknown node id {v} in keep set")
    order = sorted(keep_set)
    index_map = {old: new for new, old in enumerate(order)}
    attrs = [g.attributes(old) for old in order]
    edges = [
        (index_map[src], index_map[dst], lat)
        for src, dst, lat in g.edges()
        if src in keep_set and dst in keep_set
    ]
    return DirectedGraph(attrs, edges), index_map


def remove_nodes(
    g: DirectedGraph, f: Iterable[int]
) -> tuple[DirectedGraph, dict[int, int]]:
    """Delete the nodes in `f`; equivalent to inducing on the complement."""
    f_set = set(f)
    for v in sorted(f_set):
        if not (0 <= v < g.node_count):
            raise ParameterError(f"unknown node id {v} in removal set")
    return induced_subgraph(g, (v for v in g.nodes() if v not in f_set))


def to_matrix(g: DirectedGraph, semantics: str = BINARY) -> AdjacencyMatrix:
    """Dense adjacency; entries are 1 or 1/latency depending on semantics."""
    n = g.node_count
    entries = np.zeros((n, n), dtype=float)
    for src, dst, lat in g.edges():
        entries[src, dst] = 1.0 if semantics == BINARY else 1.0 / lat
    return AdjacencyMatrix(n=n, entries=entries, semantics=semantics)


def from_matrix(
    matrix: AdjacencyMatrix, attrs: Sequence[NodeAttributes] | None = None
) -> DirectedGraph:
    """Rebuild a graph from a matrix; binary entries get latency 1 ms."""
    n = matrix.n
    if attrs is None:
        attrs = [NodeAttributes() for _ in range(n)]
    if len(attrs) != n:
        raise ParameterError(f"{len(attrs)} attribute rows for an n={n} matrix")
    edges = []
    rows, cols = np.nonzero(matrix.entries)
    for i, j in zip(rows.tolist(), cols.tolist()):
        val = matrix.entries[i, j]
        latency = 1.0 if matrix.semantics == BINARY else 1.0 / val
        edges.append((i, j, latency))
    return DirectedGraph(attrs, edges)


def degree_sequences(g: DirectedGraph) -> DegreeSequences:
    """Per-node (in-degree, out-degree); both columns sum to |E|."""
    return DegreeSequences(
        in_degrees=[g.in_degree(v) for v in g.nodes()],
        out_degrees=[g.out_degree(v) for v in g.nodes()],
    )


def edge_density(g: DirectedGraph) -> float:
    """|E| / (n * (n - 1)) over ordered pairs."""
    n = g.node_count
    if n < 2:
        raise UndefinedMetricError(f"edge density undefined for n={n} (need n >= 2)")
    return g.edge_count / (n * (n - 1))


def is_acyclic(g: DirectedGraph) -> bool:
    """True iff no directed cycle exists (Kahn peeling)."""
    indeg = [g.in_degree(v) for v in g.nodes()]
    stack = [v for v in g.nodes() if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in g.out_neighbors(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == g.node_count


def symmetrized_degrees(g: DirectedGraph) -> list[int]:
    sym = g.symmetrized()
    return [sym.out_degree(v) for v in sym.nodes()]


def connected_components(g: DirectedGraph) -> list[list[int]]:
    """Components of the symmetrized graph, each sorted, ordered by min id."""
    sym = g.symmetrized()
    seen = [False] * sym.node_count
    comps = []
    for start in sym.nodes():
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for w in sym.out_neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    frontier.append(w)
        comps.append(sorted(comp))
    return comps
