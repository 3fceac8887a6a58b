"""Shared all-pairs shortest-path machinery.

The experiment harness and the backbone checks both need "does any
latency-shortest s->t path have a full-node interior vertex" over many
pairs. A node v lies on some shortest s->t path exactly when
d(s,v) + d(v,t) = d(s,t), so with the full distance matrix the
membership test vectorizes; distances come from scipy's csgraph
Dijkstra, which is cross-checked against the in-package Dijkstra in
the test suite.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .graphcore import DirectedGraph
from .metrics import HOP, LATENCY

# a + b vs c on float sums of the same latencies differs only by
# rounding order; real ties below this band do not occur with jittered
# continuous weights, and hop weights are exact integers
_REL_TOL = 1e-9
_ABS_TOL = 1e-9


def distance_matrix(g: DirectedGraph, weight: str = LATENCY) -> np.ndarray:
    """All-pairs directed shortest distances; inf marks unreachable."""
    n = g.node_count
    rows, cols, vals = [], [], []
    for src, dst, lat in g.edges():
        rows.append(src)
        cols.append(dst)
        vals.append(1.0 if weight == HOP else lat)
    graph = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return _csgraph_dijkstra(graph, directed=True, indices=None)


def _on_path_tolerance(direct: np.ndarray) -> np.ndarray:
    return _ABS_TOL + _REL_TOL * np.where(np.isfinite(direct), direct, 0.0)


def interior_pair_count(
    dist: np.ndarray,
    sources: list[int],
    targets: list[int],
    interior_candidates: list[int],
) -> tuple[int, int, int]:
    """(reachable_pairs, contaminated_pairs, unreachable_pairs).

    A pair (s, t), s != t, is contaminated when some candidate v
    (v != s, t) satisfies d(s,v) + d(v,t) = d(s,t) within tolerance,
    i.e. v is interior on at least one tied shortest path.
    """
    cand = np.asarray(interior_candidates, dtype=int)
    cand_pos = {int(v): i for i, v in enumerate(cand)}
    reachable = 0
    contaminated = 0
    unreachable = 0
    t_arr = np.asarray(targets, dtype=int)
    for s in sources:
        d_st = dist[s, t_arr]
        mask_t = t_arr != s
        finite = np.isfinite(d_st) & mask_t
        unreachable += int((~np.isfinite(d_st) & mask_t).sum())
        reachable += int(finite.sum())
        if cand.size == 0 or not finite.any():
            continue
        through = dist[s, cand][:, None] + dist[cand][:, t_arr]  # |cand| x |T|
        # v == s or v == t can never be *interior*
        if s in cand_pos:
            through[cand_pos[s], :] = np.inf
        for idx, t in enumerate(t_arr.tolist()):
            if t in cand_pos:
                through[cand_pos[t], idx] = np.inf
        best = through.min(axis=0)
        tol = _on_path_tolerance(d_st)
        hit = finite & (best <= d_st + tol)
        contaminated += int(hit.sum())
    return reachable, contaminated, unreachable


def interior_hit_counts(
    dist: np.ndarray,
    sources: list[int],
    targets: list[int],
) -> np.ndarray:
    """Per-node count of (s, t) pairs on whose shortest-path DAG the
    node sits as an interior vertex."""
    n = dist.shape[0]
    hits = np.zeros(n, dtype=np.int64)
    t_arr = np.asarray(targets, dtype=int)
    for s in sources:
        d_st = dist[s, t_arr]
        finite = np.isfinite(d_st) & (t_arr != s)
        if not finite.any():
            continue
        # on_path[v, t] <=> d(s,v) + d(v,t) == d(s,t)
        through = dist[s][:, None] + dist[:, t_arr]
        tol = _on_path_tolerance(d_st)[None, :]
        on_path = np.isfinite(through) & (through <= d_st[None, :] + tol) & finite[None, :]
        on_path[s, :] = False
        for idx, t in enumerate(t_arr.tolist()):
            on_path[t, idx] = False
        hits += on_path.sum(axis=1)
    return hits
