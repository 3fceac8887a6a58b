"""Discrete-event relay simulator: bootstrap, churn, flooding, persistence.

Time is continuous milliseconds; steps of `step_length` ms only gate
the stochastic re-draws (per-step node availability and edge churn).
Transactions flood: the first reception at a node forwards to all its
current out-neighbors at `now + edge latency + processing delay`, and
duplicate deliveries are ignored, so with a static topology first
arrivals trace latency-shortest paths exactly.

Event ordering is deterministic: ties at equal timestamps resolve by
kind (receive < originate < snapshot < step-redraw) and then by the
lowest involved ids. One RNG seeded from the config drives every draw
in a fixed order, making whole runs reproducible byte for byte.

Churn drops only unpinned full-node-incident connections; pinned
miner-miner links model manually configured peering and survive
everything. A node offline for a step neither relays nor receives;
deliveries to it are lost, not delayed. Messages already in flight
survive the drop of the edge that carried them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError, ParameterError
from .generators import (
    FULL_BANDWIDTH,
    FULL_FITNESS,
    FULL_UPTIME,
    JITTER_HI,
    JITTER_LO,
    MINER_BANDWIDTH,
    MINER_FITNESS,
    MINER_UPTIME,
    FitnessDistribution,
)
from .graphcore import FULL, MINER, DirectedGraph, NodeAttributes, NodeClass
from .pathtools import distance_matrix, interior_pair_count


@dataclass(frozen=True)
class SimConfig:
    miner_count: int
    full_count: int
    seed_miner_bias: float = 0.9
    outbound_cap: int = 8
    churn_rate: float = 0.3
    miner_pin_probability: float = 0.95
    relay_processing_delay: float = 0.0
    step_length: float = 1000.0
    total_steps: int = 50
    snapshot_interval: int = 1
    rng: int = 0
    miner_fitness: FitnessDistribution = MINER_FITNESS
    full_fitness: FitnessDistribution = FULL_FITNESS
    miner_uptime: float = 1.0
    full_uptime: float = 0.9
    miner_miner_latency: float = 10.0
    miner_full_latency: float = 200.0
    full_full_latency: float = 300.0
    miner_relay_refusal: float = 0.0
    full_relay_refusal: float = 0.0

    def validate(self) -> None:
        if self.miner_count < 0 or self.full_count < 0:
            raise ConfigError("node counts must be >= 0")
        if self.miner_count + self.full_count < 1:
            raise ConfigError("need at least one node")
        for name in (
            "seed_miner_bias",
            "churn_rate",
            "miner_pin_probability",
            "miner_uptime",
            "full_uptime",
            "miner_relay_refusal",
            "full_relay_refusal",
        ):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {val}")
        if self.outbound_cap < 1:
            raise ConfigError("outbound_cap must be >= 1")
        if self.relay_processing_delay < 0:
            raise ConfigError("relay_processing_delay must be >= 0")
        if self.step_length <= 0:
            raise ConfigError("step_length must be > 0")
        if self.total_steps < 1:
            raise ConfigError("total_steps must be >= 1")
        if self.snapshot_interval < 1:
            raise ConfigError("snapshot_interval must be >= 1")
        for name in ("miner_miner_latency", "miner_full_latency", "full_full_latency"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.seed_miner_bias > 0.0 and self.miner_count == 0:
            raise ConfigError("seed_miner_bias > 0 requires at least one miner")
        if self.seed_miner_bias < 1.0 and self.full_count == 0:
            raise ConfigError("seed_miner_bias < 1 requires at least one full node")

    @property
    def node_count(self) -> int:
        return self.miner_count + self.full_count

    @property
    def horizon_ms(self) -> float:
        return self.total_steps * self.step_length


@dataclass
class PropagationTrace:
    """Per-transaction flood record; unreached nodes are absent from
    the dicts. The origin carries its origination time, parent -1."""

    tx_id: int
    origin: int
    origin_time_ms: float
    first_reception: dict[int, float] = field(default_factory=dict)
    relay_parent: dict[int, int] = field(default_factory=dict)
    hop_count: dict[int, int] = field(default_factory=dict)
    lost_deliveries: int = 0


@dataclass(frozen=True)
class SnapshotSeries:
    times: list[float]
    graphs: list[DirectedGraph]

    def __len__(self) -> int:
        return len(self.graphs)


MINER_MINER = "miner-miner"
MINER_FULL = "miner-full"
FULL_FULL = "full-full"


@dataclass(frozen=True)
class PersistenceStats:
    snapshot_count: int
    edge_lifetime: dict[tuple[int, int], float]  # undirected pair -> fraction
    aggregate_persistence: dict[str, float]  # class pair -> mean fraction
    mean_degree: dict[str, float]  # node class -> mean symmetrized degree


def _class_pair(ca: NodeClass, cb: NodeClass) -> str:
    miner_ends = (ca is MINER) + (cb is MINER)
    return (FULL_FULL, MINER_FULL, MINER_MINER)[miner_ends]


# event priorities at equal timestamps
_PRIO_RECEIVE = 0
_PRIO_ORIGINATE = 1
_PRIO_SNAPSHOT = 2
_PRIO_STEP = 3


class _SimState:
    """Mutable topology: connections keyed by (min_id, max_id)."""

    def __init__(self, n: int):
        self.nbr: list[dict[int, float]] = [dict() for _ in range(n)]
        self.pinned: set[tuple[int, int]] = set()
        self.owner: dict[tuple[int, int], int] = {}

    def key(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def connected(self, a: int, b: int) -> bool:
        return b in self.nbr[a]

    def add(self, a: int, b: int, lat_ab: float, lat_ba: float, owner: int, pinned: bool):
        self.nbr[a][b] = lat_ab
        self.nbr[b][a] = lat_ba
        k = self.key(a, b)
        self.owner[k] = owner
        if pinned:
            self.pinned.add(k)

    def drop(self, a: int, b: int) -> int:
        k = self.key(a, b)
        owner = self.owner.pop(k)
        self.pinned.discard(k)
        del self.nbr[a][b]
        del self.nbr[b][a]
        return owner

    def peer_count(self, v: int) -> int:
        return len(self.nbr[v])

    def sorted_connections(self) -> list[tuple[int, int]]:
        return sorted(self.owner)


def _sample_attrs(cfg: SimConfig, rng: np.random.Generator) -> list[NodeAttributes]:
    miner_fit = cfg.miner_fitness.sample(rng, cfg.miner_count)
    full_fit = cfg.full_fitness.sample(rng, cfg.full_count)
    attrs = [
        NodeAttributes(
            node_class=MINER,
            fitness=float(miner_fit[i]),
            bandwidth=MINER_BANDWIDTH,
            uptime=cfg.miner_uptime,
        )
        for i in range(cfg.miner_count)
    ]
    attrs += [
        NodeAttributes(
            node_class=FULL,
            fitness=float(full_fit[i]),
            bandwidth=FULL_BANDWIDTH,
            uptime=cfg.full_uptime,
        )
        for i in range(cfg.full_count)
    ]
    return attrs


def _pair_latency(cfg: SimConfig, rng: np.random.Generator, ca: NodeClass, cb: NodeClass) -> float:
    pair = _class_pair(ca, cb)
    base = {
        MINER_MINER: cfg.miner_miner_latency,
        MINER_FULL: cfg.miner_full_latency,
        FULL_FULL: cfg.full_full_latency,
    }[pair]
    return base * rng.uniform(JITTER_LO, JITTER_HI)


def _bootstrap_state(
    cfg: SimConfig, rng: np.random.Generator
) -> tuple[list[NodeAttributes], _SimState]:
    attrs = _sample_attrs(cfg, rng)
    n = cfg.node_count
    nm = cfg.miner_count
    state = _SimState(n)
    classes = [a.node_class for a in attrs]
    for u in range(n):
        accepted = 0
        attempts = 0
        budget = 50 * cfg.outbound_cap
        while accepted < cfg.outbound_cap and attempts < budget:
            attempts += 1
            if rng.random() < cfg.seed_miner_bias:
                v = int(rng.integers(nm))
            else:
                v = nm + int(rng.integers(n - nm))
            if v == u or state.connected(u, v):
                continue
            lat_uv = _pair_latency(cfg, rng, classes[u], classes[v])
            lat_vu = _pair_latency(cfg, rng, classes[u], classes[v])
            state.add(u, v, lat_uv, lat_vu, owner=u, pinned=False)
            accepted += 1
    # manual miner peering: pinned, churn-exempt links
    for i in range(nm):
        for j in range(i + 1, nm):
            if rng.random() < cfg.miner_pin_probability:
                if state.connected(i, j):
                    state.pinned.add(state.key(i, j))
                else:
                    lat_ij = _pair_latency(cfg, rng, MINER, MINER)
                    lat_ji = _pair_latency(cfg, rng, MINER, MINER)
                    state.add(i, j, lat_ij, lat_ji, owner=i, pinned=True)
    return attrs, state


def _state_graph(attrs: list[NodeAttributes], state: _SimState) -> DirectedGraph:
    edges = []
    for v, nbrs in enumerate(state.nbr):
        for w, lat in nbrs.items():
            edges.append((v, w, lat))
    return DirectedGraph(attrs, edges)


def bootstrap(cfg: SimConfig) -> DirectedGraph:
    """Initial topology from biased seed-pool draws plus pinned miner links."""
    cfg.validate()
    rng = np.random.default_rng(cfg.rng)
    attrs, state = _bootstrap_state(cfg, rng)
    return _state_graph(attrs, state)


def run(
    cfg: SimConfig, tx_schedule: list[tuple[float, int]]
) -> tuple[SnapshotSeries, list[PropagationTrace], PersistenceStats | None]:
    """Full simulation: bootstrap, per-step churn/uptime, flooded transactions.

    Returns the snapshot series, one trace per scheduled transaction
    (in schedule order), and persistence statistics (None when fewer
    than two snapshots fit the horizon).
    """
    cfg.validate()
    n = cfg.node_count
    horizon = cfg.horizon_ms
    for time_ms, origin in tx_schedule:
        if not (0 <= origin < n):
            raise ParameterError(f"unknown transaction origin {origin}")
        if not 0.0 <= time_ms <= horizon:
            raise ParameterError(
                f"transaction time {time_ms} outside horizon [0, {horizon}]"
            )

    rng = np.random.default_rng(cfg.rng)
    attrs, state = _bootstrap_state(cfg, rng)
    classes = [a.node_class for a in attrs]
    uptimes = np.array([a.uptime for a in attrs])
    fitness = np.array([a.fitness for a in attrs])
    refusal = {
        MINER: cfg.miner_relay_refusal,
        FULL: cfg.full_relay_refusal,
    }

    online = [True] * n
    traces = [
        PropagationTrace(tx_id=i, origin=origin, origin_time_ms=t)
        for i, (t, origin) in enumerate(tx_schedule)
    ]
    snapshots: list[DirectedGraph] = []
    snapshot_times: list[float] = []

    heap: list[tuple] = []
    for s in range(cfg.total_steps):
        heapq.heappush(heap, (s * cfg.step_length, _PRIO_STEP, (s,)))
    for i in range(1, cfg.total_steps // cfg.snapshot_interval + 1):
        heapq.heappush(
            heap, (i * cfg.snapshot_interval * cfg.step_length, _PRIO_SNAPSHOT, (i,))
        )
    for i, (t, origin) in enumerate(tx_schedule):
        heapq.heappush(heap, (t, _PRIO_ORIGINATE, (i, origin)))

    def relay_from(v: int, tx: int, now: float, hops: int) -> None:
        for w in sorted(state.nbr[v]):
            arrival = now + state.nbr[v][w] + cfg.relay_processing_delay
            if arrival <= horizon:
                heapq.heappush(heap, (arrival, _PRIO_RECEIVE, (tx, w, v, hops + 1)))

    def handle_reception(tx: int, v: int, parent: int, hops: int, now: float) -> None:
        trace = traces[tx]
        if v in trace.first_reception:
            return
        if not online[v]:
            trace.lost_deliveries += 1
            return
        trace.first_reception[v] = now
        trace.relay_parent[v] = parent
        trace.hop_count[v] = hops
        rate = refusal[classes[v]]
        if rate > 0.0 and rng.random() < rate:
            return
        relay_from(v, tx, now, hops)

    def run_step(s: int) -> None:
        for v in range(n):
            online[v] = bool(rng.random() < uptimes[v])
        if s == 0 or cfg.churn_rate == 0.0:
            return
        dropped: list[tuple[int, int]] = []
        for a, b in state.sorted_connections():
            key = (a, b)
            if key in state.pinned:
                continue
            if classes[a] is not FULL and classes[b] is not FULL:
                continue
            if rng.random() < cfg.churn_rate:
                dropped.append(key)
        for a, b in dropped:
            owner = state.drop(a, b)
            # refill: fitness-proportional draw over non-peers
            weights = fitness.copy()
            weights[owner] = 0.0
            for peer in state.nbr[owner]:
                weights[peer] = 0.0
            total = weights.sum()
            if total <= 0.0:
                continue
            cum = np.cumsum(weights)
            draw = rng.uniform(0.0, total)
            cand = int(np.searchsorted(cum, draw, side="right"))
            cand = min(cand, n - 1)
            lat_uv = _pair_latency(cfg, rng, classes[owner], classes[cand])
            lat_vu = _pair_latency(cfg, rng, classes[owner], classes[cand])
            state.add(owner, cand, lat_uv, lat_vu, owner=owner, pinned=False)

    while heap:
        now, prio, payload = heapq.heappop(heap)
        if prio == _PRIO_RECEIVE:
            tx, v, parent, hops = payload
            handle_reception(tx, v, parent, hops, now)
        elif prio == _PRIO_ORIGINATE:
            tx, origin = payload
            trace = traces[tx]
            trace.first_reception[origin] = now
            trace.relay_parent[origin] = -1
            trace.hop_count[origin] = 0
            if online[origin]:
                relay_from(origin, tx, now, 0)
        elif prio == _PRIO_SNAPSHOT:
            snapshots.append(_state_graph(attrs, state))
            snapshot_times.append(now)
        else:
            run_step(payload[0])

    series = SnapshotSeries(times=snapshot_times, graphs=snapshots)
    stats = persistence(series) if len(snapshots) >= 2 else None
    return series, traces, stats


def flood_static(
    g: DirectedGraph,
    schedule: list[tuple[float, int]],
    processing_delay: float = 0.0,
    horizon: float = math.inf,
) -> list[PropagationTrace]:
    """Flood transactions over a frozen topology (no churn, no downtime).

    First arrivals trace latency-shortest paths with per-hop cost
    latency + processing_delay; deliveries past the horizon are cut.
    """
    if processing_delay < 0:
        raise ParameterError("processing_delay must be >= 0")
    n = g.node_count
    for time_ms, origin in schedule:
        if not (0 <= origin < n):
            raise ParameterError(f"unknown transaction origin {origin}")
    traces = [
        PropagationTrace(tx_id=i, origin=origin, origin_time_ms=t)
        for i, (t, origin) in enumerate(schedule)
    ]
    heap: list[tuple] = []
    for i, (t, origin) in enumerate(schedule):
        heapq.heappush(heap, (t, _PRIO_ORIGINATE, (i, origin, -1, 0)))
    while heap:
        now, _prio, (tx, v, parent, hops) = heapq.heappop(heap)
        trace = traces[tx]
        if v in trace.first_reception:
            continue
        trace.first_reception[v] = now
        trace.relay_parent[v] = parent
        trace.hop_count[v] = hops
        for w in sorted(g.out_neighbors(v)):
            arrival = now + g.out_neighbors(v)[w] + processing_delay
            if arrival <= horizon:
                heapq.heappush(heap, (arrival, _PRIO_RECEIVE, (tx, w, v, hops + 1)))
    return traces


def persistence(series: SnapshotSeries) -> PersistenceStats:
    """Edge lifetime fractions over the snapshot window, by class pair."""
    count = len(series)
    if count < 2:
        raise InsufficientDataError(f"persistence needs >= 2 snapshots, got {count}")
    appearances: dict[tuple[int, int], int] = {}
    for g in series.graphs:
        for a, b, _ in g.undirected_edges():
            appearances[(a, b)] = appearances.get((a, b), 0) + 1
    lifetime = {pair: c / count for pair, c in appearances.items()}

    attrs = series.graphs[0].attrs
    by_pair: dict[str, list[float]] = {MINER_MINER: [], MINER_FULL: [], FULL_FULL: []}
    for (a, b), frac in lifetime.items():
        by_pair[_class_pair(attrs[a].node_class, attrs[b].node_class)].append(frac)
    aggregate = {
        pair: (sum(vals) / len(vals) if vals else math.nan)
        for pair, vals in by_pair.items()
    }

    deg_sum = {MINER: 0.0, FULL: 0.0}
    cls_counts = {
        MINER: sum(1 for a in attrs if a.node_class is MINER),
        FULL: sum(1 for a in attrs if a.node_class is FULL),
    }
    for g in series.graphs:
        sym = g.symmetrized()
        for v in sym.nodes():
            deg_sum[attrs[v].node_class] += sym.out_degree(v)
    mean_degree = {
        cls.value: (deg_sum[cls] / (cls_counts[cls] * count) if cls_counts[cls] else math.nan)
        for cls in (MINER, FULL)
    }
    return PersistenceStats(
        snapshot_count=count,
        edge_lifetime=lifetime,
        aggregate_persistence=aggregate,
        mean_degree=mean_degree,
    )


@dataclass(frozen=True)
class LagGroupStats:
    count: int
    unreached: int
    median_ms: float  # nan when the group saw no receptions
    mean_ms: float
    p90_ms: float


@dataclass(frozen=True)
class LagSummary:
    by_class: dict[str, LagGroupStats]
    by_tier: dict[str, LagGroupStats]  # "isolated" (< 4 peers) vs "connected"


ISOLATED_DEGREE_THRESHOLD = 4


def _group_stats(lags: list[float], unreached: int) -> LagGroupStats:
    if not lags:
        return LagGroupStats(0, unreached, math.nan, math.nan, math.nan)
    arr = np.asarray(lags)
    return LagGroupStats(
        count=len(lags),
        unreached=unreached,
        median_ms=float(np.median(arr)),
        mean_ms=float(arr.mean()),
        p90_ms=float(np.percentile(arr, 90)),
    )


def reception_lag_stats(traces: list[PropagationTrace], g: DirectedGraph) -> LagSummary:
    """First-reception lags split by node class and connectivity tier.

    Origins are excluded from their own trace (their lag is zero by
    construction); nodes never reached are tallied per group.
    """
    if not traces:
        raise ParameterError("need at least one trace")
    sym = g.symmetrized()
    deg = [sym.out_degree(v) for v in sym.nodes()]
    class_lags: dict[str, list[float]] = {MINER.value: [], FULL.value: []}
    class_unreached = {MINER.value: 0, FULL.value: 0}
    tier_lags: dict[str, list[float]] = {"isolated": [], "connected": []}
    tier_unreached = {"isolated": 0, "connected": 0}
    for trace in traces:
        for v in g.nodes():
            if v == trace.origin:
                continue
            cls = g.node_class(v).value
            tier = "isolated" if deg[v] < ISOLATED_DEGREE_THRESHOLD else "connected"
            if v in trace.first_reception:
                lag = trace.first_reception[v] - trace.origin_time_ms
                class_lags[cls].append(lag)
                tier_lags[tier].append(lag)
            else:
                class_unreached[cls] += 1
                tier_unreached[tier] += 1
    return LagSummary(
        by_class={
            cls: _group_stats(class_lags[cls], class_unreached[cls])
            for cls in class_lags
        },
        by_tier={
            tier: _group_stats(tier_lags[tier], tier_unreached[tier])
            for tier in tier_lags
        },
    )


@dataclass(frozen=True)
class BackboneReport:
    miner_subgraph_connected: bool
    dominating: bool
    fullnode_interior_paths: int
    vacuous: bool = False  # True when the graph has no miners


def backbone_check(g: DirectedGraph) -> BackboneReport:
    """Miner-backbone audit: core connectivity, domination, interior paths.

    fullnode_interior_paths counts ordered miner pairs whose
    latency-shortest path set contains a full-node interior vertex.
    """
    miners = g.miners()
    if not miners:
        return BackboneReport(False, False, 0, vacuous=True)
    from .graphcore import connected_components, induced_subgraph

    miner_sub, _ = induced_subgraph(g, miners)
    connected = len(connected_components(miner_sub)) == 1
    sym = g.symmetrized()
    miner_set = set(miners)
    dominating = all(
        any(w in miner_set for w in sym.out_neighbors(v)) for v in g.nodes()
    )
    dist = distance_matrix(g)
    _, contaminated, _ = interior_pair_count(dist, miners, miners, g.full_nodes())
    return BackboneReport(
        miner_subgraph_connected=connected,
        dominating=dominating,
        fullnode_interior_paths=contaminated,
        vacuous=False,
    )
