"""Pure numpy/scipy implementations of the hot kernels.

Same call signatures as the compiled module; `coverplan.kernels` picks
whichever is importable.  Travel times use 8-connected grid moves, edge
cost = mean of the two cells' minutes-per-km, scaled by cell size and by
sqrt(2) on diagonals.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_SOURCE_BLOCK = 64


def _grid_graph(minutes: np.ndarray, passable: np.ndarray, cell_km: float):
    rows, cols = minutes.shape
    n = rows * cols
    mins = minutes.ravel()
    ok = passable.ravel().astype(bool)
    src_list = []
    dst_list = []
    w_list = []
    idx = np.arange(n).reshape(rows, cols)
    for dr, dc in _OFFSETS:
        factor = math.sqrt(2.0) if dr and dc else 1.0
        r0, r1 = max(0, -dr), rows - max(0, dr)
        c0, c1 = max(0, -dc), cols - max(0, dc)
        a = idx[r0:r1, c0:c1].ravel()
        b = idx[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
        keep = ok[a] & ok[b]
        a, b = a[keep], b[keep]
        src_list.append(a)
        dst_list.append(b)
        w_list.append((mins[a] + mins[b]) * 0.5 * cell_km * factor)
    src = np.concatenate(src_list)
    dst = np.concatenate(dst_list)
    w = np.concatenate(w_list)
    return coo_matrix((w, (src, dst)), shape=(n, n)).tocsr()


def covered_sets(minutes: np.ndarray, passable: np.ndarray, sources: np.ndarray,
                 cell_km: float, tau: float) -> list[np.ndarray]:
    """Cells reachable within tau minutes from each source cell.

    Returns one sorted int32 index array per source.  Sources on
    impassable cells cover nothing.
    """
    graph = _grid_graph(minutes, passable, cell_km)
    ok = passable.ravel().astype(bool)
    sources = np.asarray(sources, dtype=np.int64)
    out: list[np.ndarray] = [None] * len(sources)
    live = [i for i, s in enumerate(sources) if ok[s]]
    for i in range(len(sources)):
        if not ok[sources[i]]:
            out[i] = np.empty(0, dtype=np.int32)
    for start in range(0, len(live), _SOURCE_BLOCK):
        block = live[start:start + _SOURCE_BLOCK]
        dist = dijkstra(graph, directed=True, indices=sources[block], limit=tau)
        for row, i in enumerate(block):
            out[i] = np.flatnonzero(dist[row] <= tau).astype(np.int32)
    return out


def coverage_gain(cells: np.ndarray, mask: np.ndarray, weights: np.ndarray,
                  from_year: int) -> float:
    """Weight of not-yet-covered cells from `from_year` on.

    mask is the (years, n) covered indicator, weights the matching demand
    grid; neither is modified.
    """
    if len(cells) == 0:
        return 0.0
    sub = mask[from_year - 1:, cells]
    w = weights[from_year - 1:, cells]
    return float(w[sub == 0].sum())


def coverage_commit(cells: np.ndarray, mask: np.ndarray, weights: np.ndarray,
                    from_year: int) -> float:
    """Like coverage_gain but marks the cells covered."""
    g = coverage_gain(cells, mask, weights, from_year)
    if len(cells):
        mask[from_year - 1:, cells] = 1
    return g
