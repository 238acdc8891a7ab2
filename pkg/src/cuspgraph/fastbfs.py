"""Batch BFS distances, scipy-backed when available.

The graph-core BFS stays pure Python for single queries; measurement sweeps
(delta estimation, all-pairs oracles) go through here so the acceptance
suites stay inside their runtime budgets.
"""

from __future__ import annotations

try:
    import numpy as _np
    from scipy.sparse import csr_matrix as _csr
    from scipy.sparse.csgraph import shortest_path as _shortest_path

    HAVE_SCIPY = True
except ImportError:  # pragma: no cover - scipy is a declared dependency
    HAVE_SCIPY = False

UNREACHABLE = -1


def _adjacency_pairs(graph):
    rows, cols = [], []
    for u, v, _kind, _label in graph.edges:
        rows.append(u)
        cols.append(v)
        rows.append(v)
        cols.append(u)
    return rows, cols


def distances_from(graph, sources) -> list[list[int]]:
    """Rows of BFS distances from each source; -1 marks unreachable."""
    sources = list(sources)
    if not sources:
        return []
    n = len(graph.vertices)
    if HAVE_SCIPY and n > 1:
        key = "csr"
        mat = graph._cache.get(key)
        if mat is None:
            rows, cols = _adjacency_pairs(graph)
            data = _np.ones(len(rows), dtype=_np.int8)
            mat = _csr((data, (rows, cols)), shape=(n, n))
            graph._cache[key] = mat
        dist = _shortest_path(mat, method="D", unweighted=True, indices=sources)
        out = _np.where(_np.isinf(dist), UNREACHABLE, dist).astype(_np.int64)
        return out.tolist()
    result = []
    for s in sources:
        row = [UNREACHABLE] * n
        for v, d in graph.bfs(s).items():
            row[v] = d
        result.append(row)
    return result


def distance_matrix(graph, pool) -> dict[int, list[int]]:
    """Map each pool vertex to its full BFS row."""
    pool = list(pool)
    rows = distances_from(graph, pool)
    return {v: row for v, row in zip(pool, rows)}


def cached_row(graph, v: int):
    """BFS distance row from v, cached on the graph."""
    rows = graph._cache.setdefault("rows", {})
    row = rows.get(v)
    if row is None:
        row = distances_from(graph, [v])[0]
        rows[v] = row
    return row


def warm_rows(graph, sources) -> None:
    """Batch-fill the row cache; one call beats many single-source calls."""
    rows = graph._cache.setdefault("rows", {})
    missing = sorted(set(sources) - set(rows))
    if missing:
        for v, row in zip(missing, distances_from(graph, missing)):
            rows[v] = row
