from __future__ import annotations

import json

import pytest
from conftest import TOY_DIR

from hybridgraph.cli import main
from hybridgraph.etl import read_key_values


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def manifest():
    return TOY_DIR / "manifest.tsv"


@pytest.mark.parametrize("engine", ["auto", "local", "parallel"])
@pytest.mark.parametrize("strategy", ["unified", "legacy"])
def test_components_csv(tmp_path, manifest, engine, strategy):
    out = tmp_path / "r.csv"
    assert run("components", "--strategy", strategy, "--engine", engine, "--manifest", manifest, "--out", out) == 0
    assert out.read_text() == "user_id,component_id\nuser:1,user:1\nuser:2,user:1\nuser:3,user:1\n"
    prov = read_key_values(str(out) + ".provenance")
    assert prov["snapshots"] == "email,phone" and prov["strategy"] == strategy


def test_components_count_only(tmp_path, manifest):
    out = tmp_path / "n.txt"
    assert run("components", "--count-only", "--manifest", manifest, "--out", out) == 0
    assert out.read_text() == "1\n"


@pytest.mark.parametrize("engine", ["auto", "local", "parallel"])
def test_detect_accounts_csv(tmp_path, manifest, engine):
    out = tmp_path / "p.csv"
    assert run("detect-accounts", "--engine", engine, "--manifest", manifest, "--out", out) == 0
    assert out.read_text() == "user_a,user_b\nuser:1,user:2\nuser:2,user:3\n"


def test_detect_accounts_cap_reported(tmp_path, manifest):
    out = tmp_path / "p.csv"
    assert run("detect-accounts", "--cap", 1, "--manifest", manifest, "--out", out) == 0
    assert out.read_text() == "user_a,user_b\n"
    assert read_key_values(str(out) + ".provenance")["cap_lost_percentage"] == "0.500000"


def test_pagerank_and_ingest(tmp_path, manifest):
    out = tmp_path / "pr.csv"
    assert run("pagerank", "--manifest", manifest, "--out", out, "--iters", 50) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "vertex,score" and len(lines) == 6
    assert abs(sum(float(x.split(",")[1]) for x in lines[1:]) - 1) < 1e-9
    edges = tmp_path / "merged.tsv"
    assert run("ingest", "--manifest", manifest, "--out", edges) == 0
    assert edges.read_text() == "user:1\temail:1\nuser:2\temail:1\nuser:2\tphone:1\nuser:3\tphone:1\n"
    assert read_key_values(str(edges) + ".provenance")["edges"] == "4"


def test_run_sidecar_and_replay(tmp_path, manifest):
    out = tmp_path / "r.csv"
    assert run("components", "--manifest", manifest, "--out", out, "--workers", 2) == 0
    sidecar = read_key_values(str(out) + ".run")
    assert sidecar["subcommand"] == "components" and sidecar["engine"] == "auto"
    assert sidecar["workers"] == "2" and sidecar["strategy"] == "unified" and sidecar["partitions"] == "8"
    assert "--count-only" not in json.loads(sidecar["argv"])
    first = out.read_bytes()
    out.unlink()
    assert run("replay", str(out) + ".run") == 0
    assert out.read_bytes() == first


def test_explain_route(tmp_path):
    out = tmp_path / "why.txt"
    assert run("explain-route", "--vertices", 10_000_000, "--query-kind", "components_count", "--out", out) == 0
    text = out.read_text()
    assert text.startswith("engine: local") and "small output" in text
    assert run("explain-route", "--vertices", 10_000_000, "--out", out) == 0
    assert "large graph" in out.read_text()


def test_router_config_file(tmp_path, manifest):
    cfg = tmp_path / "router.conf"
    cfg.write_text("small_graph_vertex_threshold=1\nlarge_graph_vertex_threshold=2\nsmall_output_row_threshold=1\n")
    out = tmp_path / "r.csv"
    assert run("components", "--manifest", manifest, "--router-config", cfg, "--out", out) == 0
    assert read_key_values(str(out) + ".provenance")["engine"] == "parallel"


def test_bench_commands(tmp_path):
    report = tmp_path / "sweep.csv"
    assert run("bench", "sweep", "--users", "100,200", "--workers", 2, "--out", report, "--long-out", tmp_path / "l.csv") == 0
    assert report.read_text().splitlines()[0] == "query_kind,scale,engine,median_ms,output_rows"
    loss = tmp_path / "loss.csv"
    assert run("bench", "loss-curve", "--users", 2000, "--caps", "1,10,100", "--out", loss) == 0
    assert len(loss.read_text().splitlines()) == 4
    # a report with no flip cannot be calibrated
    report.write_text(
        "query_kind,scale,engine,median_ms,output_rows\n"
        "components_full,10,local,1.0,10\ncomponents_full,10,parallel,2.0,10\n"
    )
    assert run("bench", "calibrate", "--report", report, "--out", tmp_path / "cfg") == 1
    report.write_text(
        "query_kind,scale,engine,median_ms,output_rows\n"
        "components_full,10,local,1.0,10\ncomponents_full,10,parallel,2.0,10\n"
        "components_full,1000,local,9.0,1000\ncomponents_full,1000,parallel,2.0,1000\n"
    )
    assert run("bench", "calibrate", "--report", report, "--out", tmp_path / "cfg") == 0
    assert read_key_values(tmp_path / "cfg")["large_graph_vertex_threshold"] == "1000"


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["components", "--bogus"],
        ["components", "--manifest", "m.tsv"],
        ["detect-accounts", "--cap", "0", "--manifest", "m.tsv", "--out", "x"],
        [],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_io_error_exit_2(tmp_path):
    assert run("components", "--manifest", tmp_path / "none.tsv", "--out", tmp_path / "r.csv") == 2


def test_validation_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("garbage line\nuser:1\temail:1\n")
    m = tmp_path / "m.tsv"
    m.write_text(f"{bad}\temail\n")
    assert run("components", "--manifest", m, "--out", tmp_path / "r.csv") == 1
    cfg = tmp_path / "router.conf"
    cfg.write_text("nonsense=1\n")
    assert run("explain-route", "--vertices", 5, "--router-config", cfg, "--out", tmp_path / "w") == 1


def test_correctness_error_exit_3(tmp_path, monkeypatch):
    from hybridgraph import bench

    real = bench.QUERIES["components_count"]
    monkeypatch.setitem(
        bench.QUERIES,
        "components_count",
        lambda g, e, w, k: (real(g, e, w, k)[0] + (e == "parallel"), 1),
    )
    out = tmp_path / "s.csv"
    assert run("bench", "sweep", "--users", "50", "--queries", "components_count", "--out", out) == 3
