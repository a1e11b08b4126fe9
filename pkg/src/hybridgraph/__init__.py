"""Hybrid graph analytics at desk scale: two engines, a router, two pipelines."""

from .errors import CalibrationError, CorrectnessError, IngestError, NotFoundError, ValidationError
from .graph import DegreeCapReport, Edge, PropertyGraph, VertexRef, adjacency, build_graph, degree, degree_cap

__all__ = [
    "CalibrationError",
    "CorrectnessError",
    "DegreeCapReport",
    "Edge",
    "IngestError",
    "NotFoundError",
    "PropertyGraph",
    "ValidationError",
    "VertexRef",
    "adjacency",
    "build_graph",
    "degree",
    "degree_cap",
]
