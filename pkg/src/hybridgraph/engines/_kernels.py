"""Compiled inner loops. All kernels release the GIL so worker threads overlap."""

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def union_find(n, src, dst):
    """Union by size with path halving. Returns (parent, component_count)."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    count = n
    for e in range(src.shape[0]):
        a = src[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = dst[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            count -= 1
    return parent, count


@njit(nogil=True, cache=True)
def local_incidence(n, src, dst):
    """Undirected incidence of one edge table over its own vertex set.

    Returns ``(local_vertices, indptr, neighbors)`` where neighbors are local
    positions into ``local_vertices`` (sorted global ids).
    """
    m = src.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    for e in range(m):
        seen[src[e]] = True
        seen[dst[e]] = True
    lv = np.flatnonzero(seen)
    local = np.full(n, -1, dtype=np.int64)
    for i in range(lv.shape[0]):
        local[lv[i]] = i
    indptr = np.zeros(lv.shape[0] + 1, dtype=np.int64)
    for e in range(m):
        indptr[local[src[e]] + 1] += 1
        indptr[local[dst[e]] + 1] += 1
    for i in range(lv.shape[0]):
        indptr[i + 1] += indptr[i]
    fill = indptr[:-1].copy()
    nbr = np.empty(2 * m, dtype=np.int64)
    for e in range(m):
        s = local[src[e]]
        d = local[dst[e]]
        nbr[fill[s]] = d
        fill[s] += 1
        nbr[fill[d]] = s
        fill[d] += 1
    return lv, indptr, nbr


@njit(nogil=True, cache=True)
def hashmin_step(labels, active, lv, indptr, nbr):
    """Partition-local min-label messages from vertices active last superstep.

    Returns (global vertex ids, proposed labels, messages sent), holding only
    proposals that beat the vertex's current label.
    """
    out = np.empty(lv.shape[0], dtype=labels.dtype)
    for i in range(lv.shape[0]):
        out[i] = labels[lv[i]]
    hit = np.zeros(lv.shape[0], dtype=np.bool_)
    touched = np.empty(lv.shape[0], dtype=np.int64)
    t = 0
    sent = 0
    for i in range(lv.shape[0]):
        if active[lv[i]]:
            m = labels[lv[i]]
            for q in range(indptr[i], indptr[i + 1]):
                j = nbr[q]
                sent += 1
                if m < out[j]:
                    if not hit[j]:
                        hit[j] = True
                        touched[t] = j
                        t += 1
                    out[j] = m
    ids = np.empty(t, dtype=np.int64)
    vals = np.empty(t, dtype=np.int64)
    for k in range(t):
        ids[k] = lv[touched[k]]
        vals[k] = out[touched[k]]
    return ids, vals, sent


@njit(nogil=True, cache=True)
def merge_min(labels, next_active, ids, vals):
    changed = 0
    for k in range(ids.shape[0]):
        v = ids[k]
        if vals[k] < labels[v]:
            if not next_active[v]:
                changed += 1
            labels[v] = vals[k]
            next_active[v] = True
    return changed


@njit(nogil=True, cache=True)
def group_pairs(via, users):
    """Emit (a, via, b), a < b, for each group of equal ``via``.

    Inputs are sorted by (via, user) with no duplicate rows.
    """
    m = via.shape[0]
    total = 0
    start = 0
    while start < m:
        stop = start
        while stop < m and via[stop] == via[start]:
            stop += 1
        k = stop - start
        total += k * (k - 1) // 2
        start = stop
    a = np.empty(total, dtype=np.int64)
    v = np.empty(total, dtype=np.int64)
    b = np.empty(total, dtype=np.int64)
    pos = 0
    start = 0
    while start < m:
        stop = start
        while stop < m and via[stop] == via[start]:
            stop += 1
        for i in range(start, stop):
            for j in range(i + 1, stop):
                a[pos] = users[i]
                v[pos] = via[start]
                b[pos] = users[j]
                pos += 1
        start = stop
    return a, v, b
