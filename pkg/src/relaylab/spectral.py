"""Spectral machinery: dominant eigenpair, PageRank, Laplacian connectivity.

Eigenvector centrality is reported on the symmetrized *binary*
adjacency: directed relay snapshots are frequently acyclic, which makes
the directed spectrum nilpotent and the Perron vector degenerate. The
directed variant stays reachable through `principal_eigenpair` on any
matrix. Perron-mass concentration checks default to symmetrized
*inverse-latency* weights, the weighting under which steady-state
influence is defined here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg

from .errors import ConvergenceError, DegenerateSpectrumError, ParameterError, UndefinedMetricError
from .graphcore import (
    BINARY,
    INVERSE_LATENCY,
    AdjacencyMatrix,
    DirectedGraph,
    to_matrix,
)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERS = 100_000

# dense solves are cheap and exact enough up to this node count
_DENSE_LIMIT = 2000


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray  # non-negative, L1-normalized
    iterations: int
    residual: float


@dataclass(frozen=True)
class SpectralSummary:
    spectral_radius: float
    spectral_gap: float
    algebraic_connectivity: float


def _as_operator(a):
    if sp.issparse(a):
        if a.shape[0] != a.shape[1]:
            raise ParameterError(f"need a square matrix, got shape {a.shape}")
        if a.nnz and a.min() < 0:
            raise ParameterError("matrix must be non-negative")
        return a.tocsr(), a.shape[0]
    entries = a.entries if isinstance(a, AdjacencyMatrix) else np.asarray(a, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ParameterError(f"need a square matrix, got shape {entries.shape}")
    if np.any(entries < 0):
        raise ParameterError("matrix must be non-negative")
    n = entries.shape[0]
    if n > 200:
        return sp.csr_matrix(entries), n
    return entries, n


def adjacency_operator(g: DirectedGraph, semantics: str = BINARY):
    """Sparse adjacency built straight from the edge list.

    Keeps large graphs out of dense n x n storage; semantics match
    `to_matrix`.
    """
    if semantics not in (BINARY, INVERSE_LATENCY):
        raise ParameterError(f"unknown matrix semantics {semantics!r}")
    n = g.node_count
    rows, cols, vals = [], [], []
    for src, dst, lat in g.edges():
        rows.append(src)
        cols.append(dst)
        vals.append(1.0 if semantics == BINARY else 1.0 / lat)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def principal_eigenpair(
    a: AdjacencyMatrix | np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> EigenResult:
    """Power iteration from the uniform vector, L1 convergence test.

    The eigenvalue estimate is the Rayleigh quotient of the final
    iterate. Bipartite-style period-2 oscillation is detected by
    comparing against the iterate two steps back and broken with a
    half-damping step (iterating (I + A)/2 keeps the same Perron
    vector). A matrix whose powers annihilate the iterate (e.g. a DAG
    adjacency) yields the exact kernel eigenpair with value 0.
    """
    mat, n = _as_operator(a)
    if n == 0:
        raise ParameterError("empty matrix has no spectrum")
    nnz = mat.nnz if sp.issparse(mat) else int(np.count_nonzero(mat))
    if nnz == 0:
        raise DegenerateSpectrumError("all-zero matrix has no dominant eigenpair")

    v = np.full(n, 1.0 / n)
    prev = v
    damped = False
    for it in range(1, max_iters + 1):
        av = mat.dot(v)
        if damped:
            av = 0.5 * v + 0.5 * av
        s = av.sum()
        if s <= 0.0:
            # v fell into the kernel: (v, 0) is an exact eigenpair
            return EigenResult(value=0.0, vector=v, iterations=it, residual=0.0)
        nxt = av / s
        # scale-aware test so the final ||Av - lambda v||_1 stays below
        # tolerance even for large spectral radii
        diff = np.abs(nxt - v).sum() * max(1.0, s)
        if diff < tolerance:
            av_final = mat.dot(nxt)
            lam = float(nxt.dot(av_final) / nxt.dot(nxt))
            residual = float(np.abs(av_final - lam * nxt).sum())
            return EigenResult(value=lam, vector=nxt, iterations=it, residual=residual)
        if not damped and it >= 4 and np.abs(nxt - prev).sum() * max(1.0, s) < tolerance:
            damped = True
        prev = v
        v = nxt
    residual = float(np.abs(mat.dot(v) - v * (v.dot(mat.dot(v)) / v.dot(v))).sum())
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations", residual=residual
    )


def eigenvector_centrality(
    g: DirectedGraph,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> list[float]:
    """Perron vector of the symmetrized binary adjacency, L1-normalized."""
    result = principal_eigenpair(
        adjacency_operator(g.symmetrized(), BINARY), tolerance=tolerance, max_iters=max_iters
    )
    return result.vector.tolist()


def perron_mass(
    g: DirectedGraph,
    s: set[int] | list[int],
    semantics: str = INVERSE_LATENCY,
    tolerance: float = DEFAULT_TOLERANCE,
) -> float:
    """Share of the L1-normalized dominant eigenvector carried by `s`.

    Defaults to inverse-latency weights on the symmetrized graph, so
    low-latency core links dominate the steady state the way they do in
    relay diffusion.
    """
    ids = set(s)
    for v in ids:
        if not (0 <= v < g.node_count):
            raise ParameterError(f"unknown node id {v} in mass set")
    result = principal_eigenpair(
        adjacency_operator(g.symmetrized(), semantics), tolerance=tolerance
    )
    if not ids:
        return 0.0
    return float(result.vector[sorted(ids)].sum())


def pagerank(
    g: DirectedGraph,
    damping: float = 0.85,
    tolerance: float = 1e-12,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> list[float]:
    """Random-surfer fixed point on the out-degree-normalized digraph.

    Dangling mass is redistributed uniformly; the result sums to 1.
    """
    if not 0.0 < damping < 1.0:
        raise ParameterError(f"damping must be in (0, 1), got {damping}")
    n = g.node_count
    if n == 0:
        raise ParameterError("pagerank needs at least one node")
    rows, cols, vals = [], [], []
    dangling = np.zeros(n, dtype=bool)
    for u in g.nodes():
        outs = g.out_neighbors(u)
        if not outs:
            dangling[u] = True
            continue
        w = 1.0 / len(outs)
        for v in outs:
            rows.append(v)
            cols.append(u)
            vals.append(w)
    p = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    v = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iters):
        nxt = damping * (p.dot(v) + v[dangling].sum() / n) + base
        if np.abs(nxt - v).sum() < tolerance:
            return (nxt / nxt.sum()).tolist()
        v = nxt
    raise ConvergenceError(f"pagerank did not converge in {max_iters} iterations")


def _dense_symmetric_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(matrix)


def laplacian_connectivity(g: DirectedGraph, semantics: str = BINARY) -> SpectralSummary:
    """Spectral radius/gap of the symmetrized adjacency plus Laplacian lambda_2.

    lambda_2 (algebraic connectivity) is positive iff the symmetrized
    graph is connected. Dense solves below the desk-scale limit; a
    shift-inverted Lanczos otherwise.
    """
    n = g.node_count
    if n < 2:
        raise UndefinedMetricError("spectral summary needs n >= 2")
    sym = g.symmetrized()
    if n <= _DENSE_LIMIT:
        adj = to_matrix(sym, semantics).entries
        adj_eigs = _dense_symmetric_eigenvalues(adj)
        mags = np.sort(np.abs(adj_eigs))[::-1]
        radius = float(mags[0])
        gap = float(mags[0] - mags[1])
        degree = adj.sum(axis=1)
        lap = np.diag(degree) - adj
        lap_eigs = _dense_symmetric_eigenvalues(lap)
        lam2 = float(max(lap_eigs[1], 0.0))
    else:
        a_sp = adjacency_operator(sym, semantics)
        top = scipy.sparse.linalg.eigsh(a_sp, k=2, which="LM", return_eigenvectors=False)
        mags = np.sort(np.abs(top))[::-1]
        radius = float(mags[0])
        gap = float(mags[0] - mags[1])
        degree = np.asarray(a_sp.sum(axis=1)).ravel()
        lap = sp.diags(degree) - a_sp
        low = scipy.sparse.linalg.eigsh(
            lap.tocsc(), k=2, sigma=-1e-3, which="LM", return_eigenvectors=False
        )
        lam2 = float(max(np.sort(low)[1], 0.0))
    return SpectralSummary(
        spectral_radius=radius, spectral_gap=gap, algebraic_connectivity=lam2
    )
