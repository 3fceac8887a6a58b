"""Synthetic relay-topology families.

Five generators cover the laboratory's needs: fitness-driven
preferential attachment (condensation-capable), a fitness-aware
rewired ring lattice, Erdos-Renyi nulls, explicit miner-core /
full-node-periphery constructions, and degree-preserving edge swaps
for permutation null models.

All generators are pure functions of (parameters, seed): the same
inputs reproduce the same edge set bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graphcore import FULL, MINER, DirectedGraph, NodeAttributes

# multiplicative latency jitter band; tight enough to preserve any
# class-pair latency ordering while breaking exact ties
JITTER_LO = 0.8
JITTER_HI = 1.2

DEFAULT_LATENCY = 1.0


@dataclass(frozen=True)
class FitnessDistribution:
    """Node attractiveness sampler: constant, uniform(lo, hi), or pareto."""

    kind: str
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "uniform", "pareto"):
            raise ParameterError(f"unknown fitness distribution {self.kind!r}")
        if self.kind == "constant" and self.a < 0:
            raise ParameterError("constant fitness must be >= 0")
        if self.kind == "uniform" and not (0 <= self.a <= self.b):
            raise ParameterError("uniform fitness needs 0 <= lo <= hi")
        if self.kind == "pareto" and (self.a <= 0 or self.b <= 0):
            raise ParameterError("pareto fitness needs shape > 0 and scale > 0")

    @staticmethod
    def constant(value: float = 1.0) -> "FitnessDistribution":
        return FitnessDistribution(kind="constant", a=value)

    @staticmethod
    def uniform(lo: float, hi: float) -> "FitnessDistribution":
        return FitnessDistribution(kind="uniform", a=lo, b=hi)

    @staticmethod
    def pareto(shape: float, scale: float = 1.0) -> "FitnessDistribution":
        return FitnessDistribution(kind="pareto", a=shape, b=scale)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.a)
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size)
        # classical Pareto with minimum `scale` and tail index `shape`
        return (rng.pareto(self.a, size) + 1.0) * self.b


def _jitter(rng: np.random.Generator, base: float) -> float:
    return base * rng.uniform(JITTER_LO, JITTER_HI)


def bianconi_barabasi(
    n: int, m: int, fitness: FitnessDistribution, seed: int
) -> DirectedGraph:
    """Fitness-weighted preferential attachment, edges directed new->old.

    Growth starts from a complete clique on m+1 nodes (each unordered
    pair linked once, higher index -> lower). Every arrival attaches m
    distinct edges; target probability is proportional to
    fitness * total degree, with duplicate draws rejected. A
    heavy-tailed fitness distribution produces condensation onto the
    fittest node.
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if n <= m:
        raise ParameterError(f"need n > m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    eta = fitness.sample(rng, n)
    degree = np.zeros(n)
    edges: list[tuple[int, int, float]] = []

    seed_size = m + 1
    for j in range(seed_size):
        for i in range(j):
            edges.append((j, i, DEFAULT_LATENCY))
            degree[i] += 1
            degree[j] += 1

    weight = eta * degree  # only the first seed_size entries are nonzero
    for new in range(seed_size, n):
        # m distinct targets drawn without replacement, each draw
        # proportional to the remaining eta*degree mass (zeroing a huge
        # condensate instead of rejection-resampling keeps this O(m*n)
        # even when one node holds nearly all the mass)
        mass = weight[:new].copy()
        targets: list[int] = []
        for _ in range(m):
            total = mass.sum()
            if total <= 0.0:
                raise ParameterError(
                    "attachment mass vanished: fitness values must not all be zero"
                )
            cum = np.cumsum(mass)
            draw = rng.uniform(0.0, total)
            target = int(np.searchsorted(cum, draw, side="right"))
            if target >= new or mass[target] <= 0.0:  # float edge cases
                target = int(np.nonzero(mass > 0.0)[0][-1])
            targets.append(target)
            mass[target] = 0.0
        for target in sorted(targets):
            edges.append((new, target, DEFAULT_LATENCY))
            degree[target] += 1
            weight[target] = eta[target] * degree[target]
        degree[new] = m
        weight[new] = eta[new] * m

    attrs = [NodeAttributes(node_class=FULL, fitness=float(eta[v])) for v in range(n)]
    return DirectedGraph(attrs, edges)


def small_world_fitness(
    n: int, k: int, p: float, fitness: FitnessDistribution, seed: int
) -> DirectedGraph:
    """Ring lattice with fitness-biased rewiring.

    Each node starts linked to its k/2 clockwise neighbors (stored once
    per pair, direction i -> neighbor). Every lattice edge is rewired
    with probability p; the replacement endpoint is drawn with
    probability proportional to fitness, re-drawing on self-loops and
    duplicates. p=0 reproduces the exact lattice independent of seed.
    """
    if k % 2 != 0 or k < 2:
        raise ParameterError(f"k must be a positive even integer, got {k}")
    if k >= n:
        raise ParameterError(f"need k < n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"rewiring probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    eta = fitness.sample(rng, n)
    half = k // 2

    present: set[tuple[int, int]] = set()

    def key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    for i in range(n):
        for j in range(1, half + 1):
            present.add(key(i, (i + j) % n))

    if p > 0.0:
        cum = np.cumsum(eta)
        total = cum[-1]
        if total <= 0:
            raise ParameterError("rewiring needs strictly positive total fitness")
        for i in range(n):
            for j in range(1, half + 1):
                old = (i + j) % n
                if rng.random() >= p:
                    continue
                if key(i, old) not in present:
                    continue  # already rewired away by the other endpoint
                for _ in range(100 * n):
                    draw = rng.uniform(0.0, total)
                    cand = int(np.searchsorted(cum, draw, side="right"))
                    cand = min(cand, n - 1)
                    if cand != i and key(i, cand) not in present:
                        present.discard(key(i, old))
                        present.add(key(i, cand))
                        break
                # saturated neighborhoods keep their lattice edge

    edges = [(a, b, DEFAULT_LATENCY) for a, b in sorted(present)]
    attrs = [NodeAttributes(node_class=FULL, fitness=float(eta[v])) for v in range(n)]
    return DirectedGraph(attrs, edges)


def erdos_renyi(n: int, p: float, seed: int) -> DirectedGraph:
    """Directed G(n, p): every ordered pair holds an edge independently."""
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int, float]] = []
    if p > 0.0:
        for i in range(n):
            hits = np.nonzero(rng.random(n) < p)[0]
            for j in hits.tolist():
                if j != i:
                    edges.append((i, j, DEFAULT_LATENCY))
    attrs = [NodeAttributes(node_class=FULL) for _ in range(n)]
    return DirectedGraph(attrs, edges)


@dataclass(frozen=True)
class CorePeripheryConfig:
    """Explicit miner-clique / full-node-periphery construction.

    Periphery latency must not undercut the core: the construction is
    meant to encode a low-latency backbone with slow leaf links.
    """

    miner_count: int
    full_count: int
    core_density: float = 1.0
    periphery_links: int = 1
    core_latency: float = 10.0
    periphery_latency: float = 200.0

    def __post_init__(self):
        if self.miner_count < 1:
            raise ParameterError("need at least one miner")
        if self.full_count < 0:
            raise ParameterError("full_count must be >= 0")
        if not 0.0 < self.core_density <= 1.0:
            raise ParameterError(f"core_density must be in (0, 1], got {self.core_density}")
        if self.periphery_links < 1:
            raise ParameterError("periphery_links must be >= 1")
        if self.periphery_links > self.miner_count:
            raise ParameterError(
                f"periphery_links={self.periphery_links} exceeds miner_count={self.miner_count}"
            )
        if self.core_latency <= 0 or self.periphery_latency <= 0:
            raise ParameterError("latencies must be > 0")
        if self.periphery_latency < self.core_latency:
            raise ParameterError("periphery_latency must be >= core_latency")


# fitness bands expressing the miner/full hierarchy with a clear margin
MINER_FITNESS = FitnessDistribution.uniform(0.8, 1.0)
FULL_FITNESS = FitnessDistribution.uniform(0.0, 0.2)

MINER_BANDWIDTH = 100.0
FULL_BANDWIDTH = 10.0
MINER_UPTIME = 0.99
FULL_UPTIME = 0.8


def core_periphery(cfg: CorePeripheryConfig, seed: int) -> DirectedGraph:
    """Near-complete miner core plus full-node leaves anchored to miners.

    Each unordered miner pair is linked (both directions) with
    probability core_density at jittered core latency; each full node
    gets `periphery_links` bidirectional edges to distinct uniformly
    drawn miners at jittered periphery latency. Full nodes never link
    to each other.
    """
    rng = np.random.default_rng(seed)
    nm, nf = cfg.miner_count, cfg.full_count
    n = nm + nf
    miner_fit = MINER_FITNESS.sample(rng, nm)
    full_fit = FULL_FITNESS.sample(rng, nf)
    attrs = [
        NodeAttributes(
            node_class=MINER,
            fitness=float(miner_fit[v]),
            bandwidth=MINER_BANDWIDTH,
            uptime=MINER_UPTIME,
        )
        for v in range(nm)
    ] + [
        NodeAttributes(
            node_class=FULL,
            fitness=float(full_fit[v]),
            bandwidth=FULL_BANDWIDTH,
            uptime=FULL_UPTIME,
        )
        for v in range(nf)
    ]
    edges: list[tuple[int, int, float]] = []
    for i in range(nm):
        for j in range(i + 1, nm):
            if cfg.core_density >= 1.0 or rng.random() < cfg.core_density:
                edges.append((i, j, _jitter(rng, cfg.core_latency)))
                edges.append((j, i, _jitter(rng, cfg.core_latency)))
    for f in range(nm, n):
        anchors = rng.choice(nm, size=cfg.periphery_links, replace=False)
        for anchor in sorted(int(a) for a in anchors):
            edges.append((f, anchor, _jitter(rng, cfg.periphery_latency)))
            edges.append((anchor, f, _jitter(rng, cfg.periphery_latency)))
    return DirectedGraph(attrs, edges)


def degree_preserving_rewire(g: DirectedGraph, swaps: int, seed: int) -> DirectedGraph:
    """Double-edge swaps (a->b, c->d) => (a->d, c->b).

    `swaps` counts attempts; attempts that would create a self-loop or
    a duplicate edge are skipped, so both degree sequences are
    preserved exactly. Latencies travel with the source endpoint.
    """
    graph, _attempted, _applied = rewire_with_stats(g, swaps, seed)
    return graph


def rewire_with_stats(
    g: DirectedGraph, swaps: int, seed: int
) -> tuple[DirectedGraph, int, int]:
    """degree_preserving_rewire plus (attempted, applied) counters."""
    if swaps < 0:
        raise ParameterError(f"swaps must be >= 0, got {swaps}")
    if g.edge_count < 2:
        raise ParameterError("rewiring needs at least 2 edges")
    rng = np.random.default_rng(seed)
    edge_list = [(src, dst) for src, dst, _ in g.edges()]
    latency = {(src, dst): lat for src, dst, lat in g.edges()}
    edge_set = set(edge_list)
    m = len(edge_list)
    applied = 0
    for _ in range(swaps):
        i = int(rng.integers(m))
        j = int(rng.integers(m))
        if i == j:
            continue
        a, b = edge_list[i]
        c, d = edge_list[j]
        if a == d or c == b:
            continue
        if (a, d) in edge_set or (c, b) in edge_set:
            continue
        edge_set.discard((a, b))
        edge_set.discard((c, d))
        edge_set.add((a, d))
        edge_set.add((c, b))
        lat_ab = latency.pop((a, b))
        lat_cd = latency.pop((c, d))
        latency[(a, d)] = lat_ab
        latency[(c, b)] = lat_cd
        edge_list[i] = (a, d)
        edge_list[j] = (c, b)
        applied += 1
    edges = [(src, dst, latency[(src, dst)]) for src, dst in edge_list]
    return DirectedGraph(g.attrs, edges), swaps, applied
