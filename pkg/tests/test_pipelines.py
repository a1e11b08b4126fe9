from __future__ import annotations

import numpy as np
import pytest
from conftest import U1, U2, U3
from oracles import closure_partition, random_bipartite, random_snapshots

from hybridgraph import Edge, ValidationError, VertexRef
from hybridgraph.etl import EdgeSnapshot, merge_snapshots
from hybridgraph.pipelines import (
    SameUserPairs,
    combined_connected_users,
    combined_connected_users_legacy,
    combined_connected_users_unified,
    count_connected_users,
    multi_account_detection,
)
from hybridgraph.router import RouterConfig

ENGINES = ("local", "parallel")


@pytest.mark.parametrize("engine", ENGINES + ("auto",))
def test_detection_shared_identifier(toy_snapshots, engine):
    res = multi_account_detection(toy_snapshots, engine=engine)
    assert res.payload.pairs == [(U1, U2), (U2, U3)]
    assert res.payload.grouping == {U1: [U2], U2: [U1, U3], U3: [U2]}
    assert res.snapshots == ("email", "phone")


def test_detection_single_user():
    u = VertexRef("user", 1)
    snap = EdgeSnapshot("e", "email", [Edge(u, VertexRef("email", i)) for i in range(6)])
    assert multi_account_detection([snap], engine="local").payload.pairs == []


def test_detection_via_filter(toy_snapshots):
    res = multi_account_detection(toy_snapshots, engine="local", via_types={"email"})
    assert res.payload.pairs == [(U1, U2)]


def test_detection_auto_routes_with_motif_stats(toy_snapshots):
    res = multi_account_detection(toy_snapshots, engine="auto")
    assert res.engine == "local" and res.route_reasons == ("small_output",)
    cfg = RouterConfig(0, 1, 1)
    assert multi_account_detection(toy_snapshots, engine="auto", router_config=cfg).engine == "parallel"


def test_capped_pairs_subset_of_uncapped():
    rng = np.random.default_rng(30)
    es = random_bipartite(rng, 3000, 400, 12000, id_types=("email",))
    snaps = [EdgeSnapshot("s", "email", es)]
    full = set(multi_account_detection(snaps, engine="local").payload.pairs)
    for cap in (1, 2, 5, 20, 100):
        for engine in ENGINES:
            res = multi_account_detection(snaps, cap=cap, engine=engine)
            assert set(res.payload.pairs) <= full
            assert res.cap_report.cap == cap
    assert multi_account_detection(snaps, cap=10**6, engine="local").payload.pairs == sorted(full)


def test_cap_pairs_not_nested_across_caps():
    # x and y reach v only when their out-cap allows a third identifier;
    # at cap 3 they then take v's lowest in-slots and push b out
    x, y, a, b = (VertexRef("user", i) for i in range(4))
    e1, e2, v = (VertexRef("email", i) for i in range(3))
    edges = [Edge(x, e1), Edge(x, e2), Edge(x, v), Edge(y, e1), Edge(y, e2), Edge(y, v), Edge(a, v), Edge(b, v)]
    snaps = [EdgeSnapshot("s", "email", edges)]
    p2 = set(multi_account_detection(snaps, cap=2, engine="local").payload.pairs)
    p3 = set(multi_account_detection(snaps, cap=3, engine="local").payload.pairs)
    assert (a, b) in p2 and (a, b) not in p3
    assert loss(snaps, 2) >= loss(snaps, 3)


def loss(snaps, cap):
    return multi_account_detection(snaps, cap=cap, engine="local").cap_report.lost_percentage


def test_same_user_pairs_grouping_symmetric():
    p = SameUserPairs.from_pairs([(U2, U1), (U1, U2), (U3, U3), (U3, U2)])
    assert p.pairs == [(U1, U2), (U2, U3)]
    for a, bs in p.grouping.items():
        assert all(a in p.grouping[b] for b in bs)


@pytest.mark.parametrize("engine", ENGINES)
@pytest.mark.parametrize("strategy", ["unified", "legacy"])
def test_components_shared_identifier(toy_snapshots, engine, strategy):
    lab = combined_connected_users(toy_snapshots, strategy, engine).payload
    assert dict(lab.assignment) == {U1: U1, U2: U1, U3: U1}
    assert lab.component_count == 1


def test_components_no_shared_identifiers():
    snaps = [EdgeSnapshot("e", "email", [Edge(VertexRef("user", i), VertexRef("email", i)) for i in range(5)])]
    lab = combined_connected_users_unified(snaps, "local").payload
    assert all(lab.assignment[u] == u for u in lab.assignment) and lab.component_count == 5


def test_legacy_single_snapshot_equals_unified():
    rng = np.random.default_rng(3)
    snaps = random_snapshots(rng, 200, 150, 250, 1)
    assert combined_connected_users_legacy(snaps, "local").payload == combined_connected_users_unified(snaps, "local").payload


def test_strategies_agree_random():
    rng = np.random.default_rng(4)
    for trial in range(20):
        snaps = random_snapshots(rng, 300, 200, 150, int(rng.integers(1, 5)))
        engine = ENGINES[trial % 2]
        uni = combined_connected_users_unified(snaps, engine).payload
        leg = combined_connected_users_legacy(snaps, ENGINES[1 - trial % 2]).payload
        assert uni == leg
        assert count_connected_users(snaps, "unified", engine).payload == uni.component_count
        assert count_connected_users(snaps, "legacy", engine).payload == uni.component_count


def test_motif_closure_equals_components():
    rng = np.random.default_rng(5)
    for _ in range(10):
        snaps = random_snapshots(rng, 400, 300, 200, 3)
        users = [v for v in merge_snapshots(snaps).vertices if v.vtype == "user"]
        pairs = multi_account_detection(snaps, engine="parallel").payload.pairs
        labels = combined_connected_users_unified(snaps, "local").payload
        assert closure_partition(users, pairs) == labels.partition()


def test_provenance_lists_every_snapshot_once(toy_snapshots):
    res = multi_account_detection(toy_snapshots, cap=5, engine="local")
    prov = res.provenance()
    assert prov["snapshots"] == "email,phone"
    assert prov["cap"] == 5 and "cap_lost_percentage" in prov and "wall_ms" in prov
    assert "wall_ms" not in res.provenance(include_timing=False)


def test_pipeline_errors(toy_snapshots):
    with pytest.raises(ValidationError):
        multi_account_detection([])
    with pytest.raises(ValidationError):
        combined_connected_users(toy_snapshots, "hybrid")
    with pytest.raises(ValidationError):
        combined_connected_users_unified(toy_snapshots, "gpu")
