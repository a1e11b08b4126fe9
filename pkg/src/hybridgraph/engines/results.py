"""Result types shared by both engines."""

from __future__ import annotations

from collections.abc import Mapping
from typing import Iterator, NamedTuple

import numpy as np

from ..graph import VertexRef


class MotifBinding(NamedTuple):
    a: VertexRef
    via: VertexRef
    b: VertexRef


class ColumnarAssignment(Mapping):
    """Read-only vertex -> representative mapping over a label column.

    ``labels[i]`` is the vertex-table index of vertex ``i``'s representative.
    """

    def __init__(self, vertices, index, labels: np.ndarray):
        self._vertices = vertices
        self._index = index
        self.labels = labels

    def __getitem__(self, v):
        return self._vertices[self.labels[self._index[v]]]

    def __iter__(self) -> Iterator[VertexRef]:
        return iter(self._vertices)

    def __len__(self) -> int:
        return len(self._vertices)

    def __repr__(self) -> str:
        return f"ColumnarAssignment(rows={len(self)})"


class ComponentLabeling:
    """Vertex -> component representative, plus the component count."""

    def __init__(self, assignment: Mapping[VertexRef, VertexRef], component_count: int | None = None):
        self.assignment = assignment
        if component_count is None:
            component_count = len(set(assignment.values()))
        self.component_count = component_count

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, v) -> VertexRef:
        return self.assignment[v]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComponentLabeling):
            return NotImplemented
        return self.component_count == other.component_count and dict(self.assignment) == dict(other.assignment)

    __hash__ = None

    def __repr__(self) -> str:
        return f"ComponentLabeling(rows={len(self)}, components={self.component_count})"

    def components(self) -> dict[VertexRef, list[VertexRef]]:
        groups: dict[VertexRef, list[VertexRef]] = {}
        for v, rep in self.assignment.items():
            groups.setdefault(rep, []).append(v)
        return {rep: sorted(members) for rep, members in sorted(groups.items())}

    def partition(self) -> frozenset[frozenset[VertexRef]]:
        return frozenset(frozenset(m) for m in self.components().values())

    def restrict(self, vtype: str) -> "ComponentLabeling":
        """Keep only ``vtype`` vertices; each component is then represented
        by its minimum ``vtype`` member."""
        rep_of: dict[VertexRef, VertexRef] = {}
        out: dict[VertexRef, VertexRef] = {}
        for v in sorted(v for v in self.assignment if v.vtype == vtype):
            out[v] = rep_of.setdefault(self.assignment[v], v)
        return ComponentLabeling(out, len(rep_of))
