from __future__ import annotations

import numpy as np
import pytest
from conftest import EMAIL1, PHONE1, SHARED_IDENTIFIER_EDGES, U1, U2, U3
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import random_edges, reference_degree_cap, scan_adjacency

from hybridgraph import (
    Edge,
    NotFoundError,
    ValidationError,
    VertexRef,
    adjacency,
    build_graph,
    degree,
    degree_cap,
)
from hybridgraph.etl import merge_snapshots, read_snapshot, write_edges

vertex = st.builds(VertexRef, st.sampled_from(["user", "email", "phone"]), st.integers(0, 6))
edge = st.builds(Edge, vertex, vertex, st.sampled_from(["links_to", "owns"]), st.just(()))
edge_lists = st.lists(edge, max_size=40)


def test_empty_graph():
    g = build_graph([], [])
    assert (g.vertex_count, g.edge_count) == (0, 0)


def test_shared_identifier_graph_counts(toy_graph):
    assert (toy_graph.vertex_count, toy_graph.edge_count) == (5, 4)


def test_vertices_auto_added_from_edges(toy_graph):
    assert build_graph([], SHARED_IDENTIFIER_EDGES) == toy_graph


def test_duplicates_collapse(toy_graph):
    g = build_graph([U1, U1], list(SHARED_IDENTIFIER_EDGES) * 2)
    assert g == toy_graph


@pytest.mark.parametrize("bad", [("", 1), ("us er", 1), ("a:b", 1), ("user", -1), ("user", 2**64)])
def test_malformed_vertex_rejected(bad):
    with pytest.raises(ValidationError):
        build_graph([VertexRef(*bad)], [])


def test_malformed_record_named_in_error():
    with pytest.raises(ValidationError, match=r"\(('', 5|vtype='', vid=5)\)"):
        build_graph([], [Edge(U2, VertexRef("email", 3)), Edge(U1, VertexRef("", 5))])


def test_empty_edge_label_rejected():
    with pytest.raises(ValidationError):
        build_graph([], [Edge(U1, EMAIL1, "")])


def test_vertex_parse_round_trip():
    assert VertexRef.parse(str(VertexRef("email", 42))) == VertexRef("email", 42)
    with pytest.raises(ValidationError):
        VertexRef.parse("email-42")


def test_adjacency_examples(toy_graph):
    assert [n for _, n in adjacency(toy_graph, U2, "out")] == [EMAIL1, PHONE1]
    assert adjacency(toy_graph, U1, "in") == []
    assert [n for _, n in adjacency(toy_graph, EMAIL1, "in")] == [U1, U2]


def test_adjacency_unknown_vertex(toy_graph):
    with pytest.raises(NotFoundError):
        adjacency(toy_graph, VertexRef("user", 99))
    with pytest.raises(ValidationError):
        adjacency(toy_graph, U1, "sideways")


def test_adjacency_matches_edge_scan():
    rng = np.random.default_rng(11)
    for _ in range(20):
        verts, edges = random_edges(rng, 30, 80)
        g = build_graph(verts, edges)
        for v in verts:
            for direction in ("out", "in", "both"):
                got = adjacency(g, v, direction)
                want = scan_adjacency(g.edges, v, direction)
                assert sorted(got) == sorted(want)
                assert [n for _, n in got] == sorted(n for _, n in got)
            assert len(adjacency(g, v, "both")) == degree(g, v)


def test_cap_not_binding(toy_graph):
    capped, report = degree_cap(toy_graph, 2)
    assert capped == toy_graph
    assert report.lost_percentage == 0 and report.edges_after == report.edges_before == 4


def test_cap_keeps_lowest_neighbors():
    u = VertexRef("user", 1)
    b, c, d = (VertexRef("email", i) for i in (1, 2, 3))
    g = build_graph([], [Edge(u, d), Edge(u, b), Edge(u, c)])
    capped, report = degree_cap(g, 2)
    assert [n for _, n in adjacency(capped, u, "out")] == [b, c]
    assert report.lost_percentage == pytest.approx(1 / 3)
    assert capped.vertex_count == g.vertex_count
    assert report.per_label == {"links_to": (3, 2)}


def test_cap_zero_rejected(toy_graph):
    with pytest.raises(ValidationError):
        degree_cap(toy_graph, 0)


def test_cap_in_degree_pass_runs_after_out_pass():
    # u1 keeps e1 only (out cap 1); then e1 has in-degree 2 from u1,u2 -> keeps u1
    e1, e2 = VertexRef("email", 1), VertexRef("email", 2)
    u1, u2 = VertexRef("user", 1), VertexRef("user", 2)
    g = build_graph([], [Edge(u1, e1), Edge(u1, e2), Edge(u2, e1)])
    capped, _ = degree_cap(g, 1)
    assert {(e.src, e.dst) for e in capped.edges} == {(u1, e1)}


@settings(max_examples=150, deadline=None)
@given(edge_lists, st.integers(1, 5))
def test_cap_matches_reference(edges, cap):
    g = build_graph([], edges)
    capped, report = degree_cap(g, cap)
    assert set(capped.edges) == reference_degree_cap(g.edges, cap)
    assert report.edges_after <= report.edges_before
    if report.edges_before:
        assert report.lost_percentage == pytest.approx(1 - report.edges_after / report.edges_before)


@settings(max_examples=150, deadline=None)
@given(edge_lists, st.integers(1, 5))
def test_cap_bounds_degrees_and_is_idempotent(edges, cap):
    g = build_graph([], edges)
    capped, _ = degree_cap(g, cap)
    for v in capped.vertices:
        assert len(adjacency(capped, v, "out")) <= cap
        assert len(adjacency(capped, v, "in")) <= cap
    again, report = degree_cap(capped, cap)
    assert again == capped and report.lost_percentage == 0


@settings(max_examples=150, deadline=None)
@given(edge_lists, st.integers(1, 5), st.integers(1, 5))
def test_cap_loss_monotone(edges, c1, extra):
    g = build_graph([], edges)
    _, r1 = degree_cap(g, c1)
    _, r2 = degree_cap(g, c1 + extra)
    assert r1.lost_percentage >= r2.lost_percentage


def test_serialize_reingest_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    verts, edges = random_edges(rng, 200, 500, types=("email",))
    users = [VertexRef("user", i) for i in range(50)]
    edges = [Edge(users[i % 50], e.dst, "owns" if i % 3 else "links_to") for i, e in enumerate(edges)]
    g = build_graph([], edges)
    path = tmp_path / "edges.tsv"
    write_edges(g.edges, path)
    again = merge_snapshots([read_snapshot(path, "email")])
    assert again == g
