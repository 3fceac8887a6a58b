"""Classical graph metrics: degrees, paths, centralities, power-law fits.

Path-based metrics run on the graph exactly as passed; callers that
want the undirected convention pass ``g.symmetrized()``. Clustering and
assortativity are undirected notions and symmetrize internally.

Disconnected inputs use reachable-only conventions: means are taken
over reachable ordered pairs and the reachable fraction is reported
alongside, and closeness applies the Wasserman-Faust correction.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InsufficientDataError, ParameterError, UndefinedMetricError
from .graphcore import DirectedGraph

HOP = "hop"
LATENCY = "latency"

UNREACHED = math.inf


def _check_weight(weight: str) -> None:
    if weight not in (HOP, LATENCY):
        raise ParameterError(f"unknown weight kind {weight!r} (expected hop or latency)")


@dataclass(frozen=True)
class ShortestPaths:
    """Single-source result: distances, all minimal predecessors, path counts.

    `preds[v]` holds every u on some shortest source->v path with
    (u, v) as the last edge; `sigma[v]` counts the shortest paths.
    Unreachable nodes carry distance inf, empty preds, sigma 0.
    """

    source: int
    weight: str
    dist: list[float]
    preds: list[list[int]]
    sigma: list[float]
    order: list[int]  # nodes in nondecreasing settle order, source first

    def reachable(self) -> list[int]:
        return [v for v, d in enumerate(self.dist) if d < UNREACHED]


def _sssp(g: DirectedGraph, source: int, weight: str) -> ShortestPaths:
    """Dijkstra with all-minimal-predecessor tracking.

    Ties in the priority queue break toward the smaller node id so the
    settle order (and thus predecessor enumeration order) is
    deterministic; path counts are order-independent anyway.
    """
    n = g.node_count
    dist = [UNREACHED] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma = [0.0] * n
    order: list[int] = []
    done = [False] * n

    dist[source] = 0.0
    sigma[source] = 1.0
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        order.append(v)
        for w, lat in g.out_neighbors(v).items():
            cost = 1.0 if weight == HOP else lat
            nd = d + cost
            if nd < dist[w]:
                dist[w] = nd
                preds[w] = [v]
                sigma[w] = sigma[v]
                heapq.heappush(heap, (nd, w))
            elif nd == dist[w]:
                preds[w].append(v)
                sigma[w] += sigma[v]
    for p in preds:
        p.sort()
    return ShortestPaths(source=source, weight=weight, dist=dist, preds=preds, sigma=sigma, order=order)


def shortest_paths(g: DirectedGraph, source: int, weight: str = LATENCY) -> ShortestPaths:
    """Exact single-source shortest distances plus the full geodesic DAG."""
    _check_weight(weight)
    if not (0 <= source < g.node_count):
        raise ParameterError(f"unknown source node {source}")
    return _sssp(g, source, weight)


@dataclass(frozen=True)
class PathLengthSummary:
    mean: float
    reachable_pairs: int
    total_pairs: int

    @property
    def reachable_fraction(self) -> float:
        return self.reachable_pairs / self.total_pairs if self.total_pairs else 0.0


def average_path_length(g: DirectedGraph, weight: str = HOP) -> PathLengthSummary:
    """Mean shortest distance over ordered reachable pairs.

    Unreachable pairs are excluded from the mean and show up in the
    reachable fraction instead.
    """
    _check_weight(weight)
    n = g.node_count
    if n < 2:
        raise UndefinedMetricError("average path length needs n >= 2")
    total = 0.0
    reachable = 0
    for s in g.nodes():
        sp = _sssp(g, s, weight)
        for v, d in enumerate(sp.dist):
            if v != s and d < UNREACHED:
                total += d
                reachable += 1
    if reachable == 0:
        raise UndefinedMetricError("no reachable ordered pair; mean undefined")
    return PathLengthSummary(mean=total / reachable, reachable_pairs=reachable, total_pairs=n * (n - 1))


@dataclass(frozen=True)
class DiameterResult:
    diameter: float
    eccentricity: list[float]  # nan where the node reaches nobody


def diameter_and_eccentricity(g: DirectedGraph, weight: str = HOP) -> DiameterResult:
    """Reachable-only eccentricities and their maximum."""
    _check_weight(weight)
    if g.node_count < 2:
        raise UndefinedMetricError("diameter needs n >= 2")
    ecc = []
    for s in g.nodes():
        sp = _sssp(g, s, weight)
        dists = [d for v, d in enumerate(sp.dist) if v != s and d < UNREACHED]
        ecc.append(max(dists) if dists else math.nan)
    finite = [e for e in ecc if not math.isnan(e)]
    if not finite:
        raise UndefinedMetricError("no reachable pair; diameter undefined")
    return DiameterResult(diameter=max(finite), eccentricity=ecc)


def betweenness(g: DirectedGraph, weight: str = HOP) -> list[float]:
    """Exact non-normalized betweenness, endpoints excluded.

    Brandes accumulation over the shortest-path DAG of every source;
    all tied geodesics contribute via the sigma ratios.
    """
    _check_weight(weight)
    n = g.node_count
    score = [0.0] * n
    for s in g.nodes():
        sp = _sssp(g, s, weight)
        delta = [0.0] * n
        for w in reversed(sp.order):
            for v in sp.preds[w]:
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return score


def closeness(g: DirectedGraph, weight: str = HOP) -> list[float]:
    """Wasserman-Faust closeness: (r/sum_d) * (r/(n-1)); 0 for sinks."""
    _check_weight(weight)
    n = g.node_count
    if n < 2:
        return [0.0] * n
    out = []
    for s in g.nodes():
        sp = _sssp(g, s, weight)
        dists = [d for v, d in enumerate(sp.dist) if v != s and d < UNREACHED]
        r = len(dists)
        if r == 0:
            out.append(0.0)
            continue
        out.append((r / sum(dists)) * (r / (n - 1)))
    return out


@dataclass(frozen=True)
class ClusteringResult:
    global_coefficient: float
    local: list[float]


def clustering(g: DirectedGraph) -> ClusteringResult:
    """Triangle clustering on the symmetrized graph.

    local(v) = closed neighbor pairs / (deg choose 2); the global
    coefficient is 3*triangles over all connected triplets.
    """
    sym = g.symmetrized()
    nbrs = [set(sym.out_neighbors(v)) for v in sym.nodes()]
    local = []
    closed_pairs_total = 0
    triplets_total = 0
    for v in sym.nodes():
        d = len(nbrs[v])
        if d < 2:
            local.append(0.0)
            continue
        closed = 0
        ns = sorted(nbrs[v])
        for i, a in enumerate(ns):
            closed += len(nbrs[a].intersection(ns[i + 1:]))
        pairs = d * (d - 1) // 2
        local.append(closed / pairs)
        closed_pairs_total += closed
        triplets_total += pairs
    global_coeff = closed_pairs_total / triplets_total if triplets_total else 0.0
    return ClusteringResult(global_coefficient=global_coeff, local=local)


def assortativity(g: DirectedGraph) -> float:
    """Pearson correlation of remaining degrees across symmetrized edges."""
    und = g.undirected_edges()
    if len(und) < 2:
        raise ParameterError("assortativity needs >= 2 symmetrized edges")
    sym = g.symmetrized()
    deg = [sym.out_degree(v) for v in sym.nodes()]
    xs: list[float] = []
    ys: list[float] = []
    for a, b, _ in und:
        xs.extend((deg[a] - 1, deg[b] - 1))
        ys.extend((deg[b] - 1, deg[a] - 1))
    m = len(xs)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0 or var_y == 0:
        raise UndefinedMetricError(
            "assortativity undefined: endpoint degrees have zero variance"
        )
    return cov / math.sqrt(var_x * var_y)


@dataclass(frozen=True)
class DegreeHistogram:
    direction: str  # in | out | total
    pairs: list[tuple[int, int]]  # (degree, count), degree ascending


def degree_histogram(g: DirectedGraph, direction: str = "out") -> DegreeHistogram:
    if direction == "in":
        degs = [g.in_degree(v) for v in g.nodes()]
    elif direction == "out":
        degs = [g.out_degree(v) for v in g.nodes()]
    elif direction == "total":
        degs = [g.in_degree(v) + g.out_degree(v) for v in g.nodes()]
    else:
        raise ParameterError(f"unknown degree direction {direction!r}")
    counts: dict[int, int] = {}
    for d in degs:
        counts[d] = counts.get(d, 0) + 1
    return DegreeHistogram(direction=direction, pairs=sorted(counts.items()))


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    xmin: int
    ks_statistic: float
    n_tail: int


def _fit_at(xmin: int, tail: Sequence[int]) -> PowerLawFit:
    shift = xmin - 0.5
    log_sum = sum(math.log(x / shift) for x in tail)
    n_tail = len(tail)
    gamma = 1.0 + n_tail / log_sum
    # KS distance between the empirical tail CDF and the fitted
    # continuous law F(x) = 1 - (x/shift)^(1-gamma), evaluated at the
    # sorted sample points (both step edges checked).
    ordered = sorted(tail)
    ks = 0.0
    for i, x in enumerate(ordered):
        fitted = 1.0 - (x / shift) ** (1.0 - gamma)
        ks = max(ks, abs((i + 1) / n_tail - fitted), abs(i / n_tail - fitted))
    return PowerLawFit(gamma=gamma, xmin=xmin, ks_statistic=ks, n_tail=n_tail)


def fit_power_law(samples: Iterable[int], xmin: int | str = "auto") -> PowerLawFit:
    """Continuous-approximation MLE for P(k) ~ k^-gamma on discrete data.

    gamma_hat = 1 + n_tail / sum(ln(x_i / (xmin - 0.5))) over the tail
    x_i >= xmin. xmin="auto" scans candidate cutoffs and keeps the one
    with the smallest KS distance.
    """
    data = sorted(int(x) for x in samples)
    if any(x < 1 for x in data):
        raise ParameterError("power-law samples must be >= 1")
    if xmin == "auto":
        candidates = sorted(set(data))
        best: PowerLawFit | None = None
        for cand in candidates:
            tail = [x for x in data if x >= cand]
            if len(tail) < 2 or tail[0] == tail[-1]:
                continue
            fit = _fit_at(cand, tail)
            if best is None or fit.ks_statistic < best.ks_statistic:
                best = fit
        if best is None:
            if len(data) >= 2 and data[0] == data[-1]:
                raise UndefinedMetricError(
                    "all samples equal: zero log-spread gives an infinite exponent"
                )
            raise InsufficientDataError("need >= 2 tail samples to fit a power law")
        return best
    xmin = int(xmin)
    if xmin < 1:
        raise ParameterError(f"xmin must be >= 1, got {xmin}")
    tail = [x for x in data if x >= xmin]
    if len(tail) < 2:
        raise InsufficientDataError(
            f"need >= 2 samples >= xmin={xmin}, found {len(tail)}"
        )
    if tail[0] == tail[-1]:
        raise UndefinedMetricError(
            "all tail samples equal: zero log-spread gives an infinite exponent"
        )
    return _fit_at(xmin, tail)
