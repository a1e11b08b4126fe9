from __future__ import annotations

from pathlib import Path

import pytest

from hybridgraph import Edge, VertexRef, build_graph
from hybridgraph.etl import EdgeSnapshot

U1, U2, U3 = (VertexRef("user", i) for i in (1, 2, 3))
EMAIL1 = VertexRef("email", 1)
PHONE1 = VertexRef("phone", 1)

SHARED_IDENTIFIER_EDGES = (
    Edge(U1, EMAIL1),
    Edge(U2, EMAIL1),
    Edge(U2, PHONE1),
    Edge(U3, PHONE1),
)

TOY_DIR = Path(__file__).resolve().parents[1] / "data" / "toy"

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE[number] = (title, passed, detail)


@pytest.fixture
def toy_snapshots():
    return [
        EdgeSnapshot("email", "email", SHARED_IDENTIFIER_EDGES[:2]),
        EdgeSnapshot("phone", "phone", SHARED_IDENTIFIER_EDGES[2:]),
    ]


@pytest.fixture
def toy_graph():
    return build_graph([U1, U2, U3, EMAIL1, PHONE1], SHARED_IDENTIFIER_EDGES)


@pytest.fixture
def toy_manifest():
    return TOY_DIR / "manifest.tsv"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number} {status}: {title}{suffix}")
