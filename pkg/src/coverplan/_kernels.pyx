# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: grid Dijkstra with a travel-time cutoff, and the
coverage marginal-gain / commit loops.

Signatures mirror coverplan._fallback exactly; outputs are bit-identical
up to float summation order (gains accumulate in the same cell-major
order as the fallback's numpy reductions on integer-valued weights).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)

cdef int[8] DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] DC = [-1, 0, 1, -1, 1, -1, 0, 1]


cdef inline void _heap_push(double[::1] keys, long[::1] nodes, Py_ssize_t* size,
                            double key, long node) nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    cdef double tk
    cdef long tn
    keys[i] = key
    nodes[i] = node
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] <= keys[i]:
            break
        tk = keys[i]; keys[i] = keys[parent]; keys[parent] = tk
        tn = nodes[i]; nodes[i] = nodes[parent]; nodes[parent] = tn
        i = parent


cdef inline void _heap_pop(double[::1] keys, long[::1] nodes, Py_ssize_t* size,
                           double* out_key, long* out_node) nogil:
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    cdef double tk
    cdef long tn
    out_key[0] = keys[0]
    out_node[0] = nodes[0]
    size[0] -= 1
    keys[0] = keys[size[0]]
    nodes[0] = nodes[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and keys[child + 1] < keys[child]:
            child += 1
        if keys[i] <= keys[child]:
            break
        tk = keys[i]; keys[i] = keys[child]; keys[child] = tk
        tn = nodes[i]; nodes[i] = nodes[child]; nodes[child] = tn
        i = child


def covered_sets(minutes, passable, sources, double cell_km, double tau):
    """Cells reachable within tau minutes from each source cell.

    Returns one sorted int32 index array per source.  Sources on
    impassable cells cover nothing.
    """
    cdef double[:, ::1] mins = np.ascontiguousarray(minutes, dtype=np.float64)
    cdef cnp.uint8_t[:, ::1] ok = np.ascontiguousarray(passable, dtype=np.uint8)
    cdef long[::1] srcs = np.ascontiguousarray(sources, dtype=np.int64)
    cdef Py_ssize_t rows = mins.shape[0]
    cdef Py_ssize_t cols = mins.shape[1]
    cdef Py_ssize_t n = rows * cols

    dist_arr = np.empty(n, dtype=np.float64)
    seen_arr = np.empty(n, dtype=np.uint8)
    # every relaxation can push once; 8 neighbours bounds the live entries
    heap_keys_arr = np.empty(8 * n + 1, dtype=np.float64)
    heap_nodes_arr = np.empty(8 * n + 1, dtype=np.int64)
    hits_arr = np.empty(n, dtype=np.int32)

    cdef double[::1] dist = dist_arr
    cdef cnp.uint8_t[::1] seen = seen_arr
    cdef double[::1] hkeys = heap_keys_arr
    cdef long[::1] hnodes = heap_nodes_arr
    cdef int[::1] hits = hits_arr

    cdef Py_ssize_t si, i, k, heap_size, nhits
    cdef long src, u, v
    cdef Py_ssize_t r, c, nr, nc
    cdef double d, w, nd

    out = []
    for si in range(srcs.shape[0]):
        src = srcs[si]
        if not ok[src // cols, src % cols]:
            out.append(np.empty(0, dtype=np.int32))
            continue
        for i in range(n):
            dist[i] = INFINITY
            seen[i] = 0
        heap_size = 0
        nhits = 0
        dist[src] = 0.0
        _heap_push(hkeys, hnodes, &heap_size, 0.0, src)
        while heap_size > 0:
            _heap_pop(hkeys, hnodes, &heap_size, &d, &u)
            if seen[u]:
                continue
            seen[u] = 1
            hits[nhits] = <int> u
            nhits += 1
            r = u // cols
            c = u % cols
            for k in range(8):
                nr = r + DR[k]
                nc = c + DC[k]
                if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                    continue
                if not ok[nr, nc]:
                    continue
                v = nr * cols + nc
                if seen[v]:
                    continue
                w = (mins[r, c] + mins[nr, nc]) * 0.5 * cell_km
                if DR[k] != 0 and DC[k] != 0:
                    w *= SQRT2
                nd = d + w
                if nd <= tau and nd < dist[v]:
                    dist[v] = nd
                    _heap_push(hkeys, hnodes, &heap_size, nd, v)
        covered = np.array(hits_arr[:nhits], dtype=np.int32)
        covered.sort()
        out.append(covered)
    return out


def coverage_gain(cells, mask, weights, int from_year):
    """Weight of not-yet-covered cells from `from_year` on.

    mask is the (years, n) covered indicator, weights the matching demand
    grid; neither is modified.
    """
    cdef int[::1] cc = np.ascontiguousarray(cells, dtype=np.int32)
    cdef cnp.uint8_t[:, ::1] mm = mask
    cdef double[:, ::1] ww = weights
    cdef double total = 0.0
    cdef Py_ssize_t t, j
    cdef int c
    for t in range(from_year - 1, mm.shape[0]):
        for j in range(cc.shape[0]):
            c = cc[j]
            if mm[t, c] == 0:
                total += ww[t, c]
    return total


def coverage_commit(cells, mask, weights, int from_year):
    """Like coverage_gain but marks the cells covered."""
    cdef int[::1] cc = np.ascontiguousarray(cells, dtype=np.int32)
    cdef cnp.uint8_t[:, ::1] mm = mask
    cdef double[:, ::1] ww = weights
    cdef double total = 0.0
    cdef Py_ssize_t t, j
    cdef int c
    for t in range(from_year - 1, mm.shape[0]):
        for j in range(cc.shape[0]):
            c = cc[j]
            if mm[t, c] == 0:
                total += ww[t, c]
                mm[t, c] = 1
    return total
