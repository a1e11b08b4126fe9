"""Reference implementations used only by tests; deliberately naive."""

from __future__ import annotations

from collections import defaultdict, deque

import numpy as np

from hybridgraph import Edge, VertexRef, build_graph

TYPES = ("email", "phone", "user")


def bfs_partition(vertices, edges):
    """Undirected flood fill over an explicit edge list."""
    nbrs = defaultdict(set)
    for e in edges:
        nbrs[e.src].add(e.dst)
        nbrs[e.dst].add(e.src)
    seen = set()
    parts = []
    for v in sorted(set(vertices) | set(nbrs)):
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        seen.add(v)
        while queue:
            x = queue.popleft()
            for y in nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    queue.append(y)
        parts.append(frozenset(comp))
    return frozenset(parts)


def nested_loop_motif(edges, endpoint_type, via_types):
    """Double loop over edge pairs; canonical (a, via, b) with a < b."""
    edges = list(set((e.src, e.dst) for e in edges))
    out = set()
    for s1, d1 in edges:
        for s2, d2 in edges:
            if (
                d1 == d2
                and s1 < s2
                and s1.vtype == endpoint_type
                and s2.vtype == endpoint_type
                and d1.vtype in via_types
            ):
                out.add((s1, d1, s2))
    return out


def dense_pagerank(vertices, links, damping, iters):
    """Column-stochastic matrix power iteration; dangling columns uniform."""
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    m = np.zeros((n, n))
    for s, d in set(links):
        m[index[d], index[s]] = 1.0
    colsum = m.sum(axis=0)
    for j in range(n):
        m[:, j] = m[:, j] / colsum[j] if colsum[j] else 1.0 / n
    g = damping * m + (1 - damping) / n
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        r = g @ r
    return {v: r[index[v]] for v in vertices}


def scan_adjacency(edges, v, direction):
    out = []
    for e in edges:
        if direction in ("out", "both") and e.src == v:
            out.append((e, e.dst))
        if direction in ("in", "both") and e.dst == v:
            out.append((e, e.src))
    return out


def reference_degree_cap(edges, cap):
    """Per-vertex keep-lowest, out pass then in pass, with plain dicts."""

    def one_pass(edges, key_of, nbr_of):
        groups = defaultdict(list)
        for e in edges:
            groups[key_of(e)].append(e)
        kept = []
        for es in groups.values():
            kept.extend(sorted(es, key=lambda e: (nbr_of(e), e.elabel, e.props))[:cap])
        return kept

    after_out = one_pass(edges, lambda e: e.src, lambda e: e.dst)
    return set(one_pass(after_out, lambda e: e.dst, lambda e: e.src))


def random_edges(rng, n_vertices, n_edges, types=TYPES, max_vid=None):
    """Random typed vertices and edges among them (self loops allowed)."""
    max_vid = max_vid or max(2 * n_vertices, 4)
    t = rng.integers(0, len(types), size=n_vertices)
    vid = rng.choice(max_vid, size=n_vertices, replace=False) if n_vertices <= max_vid else rng.integers(0, max_vid, n_vertices)
    verts = sorted({VertexRef(types[a], int(b)) for a, b in zip(t.tolist(), vid.tolist())})
    if not verts or n_edges == 0:
        return verts, []
    s = rng.integers(0, len(verts), size=n_edges).tolist()
    d = rng.integers(0, len(verts), size=n_edges).tolist()
    return verts, [Edge(verts[a], verts[b]) for a, b in zip(s, d)]


def random_graph(rng, n_vertices, n_edges, directed=True):
    verts, edges = random_edges(rng, n_vertices, n_edges)
    return build_graph(verts, edges, directed=directed), verts, edges


def random_bipartite(rng, n_users, n_ids, n_edges, id_types=("email", "phone")):
    users = [VertexRef("user", i) for i in range(n_users)]
    ids = [VertexRef(id_types[i % len(id_types)], i) for i in range(n_ids)]
    s = rng.integers(0, n_users, size=n_edges).tolist()
    d = rng.integers(0, n_ids, size=n_edges).tolist()
    return [Edge(users[a], ids[b]) for a, b in zip(s, d)]


def random_snapshots(rng, n_users, n_ids, n_edges, n_snapshots, id_types=("email", "phone", "device")):
    """Snapshots of user -> identifier edges; identifier types cycle across snapshots."""
    from hybridgraph.etl import EdgeSnapshot

    out = []
    for i in range(n_snapshots):
        t = id_types[i % len(id_types)]
        s = rng.integers(0, n_users, size=n_edges).tolist()
        d = rng.integers(0, n_ids, size=n_edges).tolist()
        es = [Edge(VertexRef("user", a), VertexRef(t, b)) for a, b in zip(s, d)]
        out.append(EdgeSnapshot(f"{t}-{i}", t, es))
    return out


def closure_partition(users, pairs):
    """Connected components of the user relation given by pairs (plain BFS)."""
    return bfs_partition(users, [Edge(a, b) for a, b in pairs])
