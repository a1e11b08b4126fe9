"""Engine selection from graph scale and expected output size.

Rules, first match wins:

1. small output            -> local
2. large graph             -> parallel
3. small graph             -> local
4. medium graph, big output -> parallel
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ValidationError

QUERY_KINDS = ("components_full", "components_count", "motif_full", "pagerank")

RULE_SMALL_OUTPUT = "small_output"
RULE_LARGE_GRAPH = "large_graph"
RULE_SMALL_GRAPH = "small_graph"
RULE_MEDIUM_GRAPH = "medium_graph_large_output"

CONFIG_KEYS = ("small_graph_vertex_threshold", "large_graph_vertex_threshold", "small_output_row_threshold")


@dataclass(frozen=True)
class RouterConfig:
    small_graph_vertex_threshold: int = 10**6
    large_graph_vertex_threshold: int = 10**7
    small_output_row_threshold: int = 10**4

    def __post_init__(self):
        for k in CONFIG_KEYS:
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValidationError(f"{k} must be a non-negative integer, got {v!r}")
        # a count query returns one row; it must always fit the small-output rule
        if self.small_output_row_threshold < 1:
            raise ValidationError("small_output_row_threshold must be at least 1")
        if self.small_graph_vertex_threshold >= self.large_graph_vertex_threshold:
            raise ValidationError("small_graph_vertex_threshold must be below large_graph_vertex_threshold")

    def to_text(self) -> str:
        return "".join(f"{k}={getattr(self, k)}\n" for k in CONFIG_KEYS)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "RouterConfig":
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, raw = line.partition("=")
            key = key.strip()
            if not sep or key not in CONFIG_KEYS:
                raise ValidationError(f"unknown router config line {line!r}")
            try:
                values[key] = int(raw.strip())
            except ValueError:
                raise ValidationError(f"{key} must be an integer, got {raw.strip()!r}") from None
        return cls(**values)

    @classmethod
    def load(cls, path) -> "RouterConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GraphStats:
    vertex_count: int
    edge_count: int
    query_kind: str
    estimated_output_rows: int

    def output_bound(self) -> int | None:
        """Largest output a query of this kind can produce, if bounded."""
        if self.query_kind in ("components_full", "pagerank"):
            return self.vertex_count
        if self.query_kind == "components_count":
            return 1
        return None

    def validate(self) -> None:
        for k in ("vertex_count", "edge_count", "estimated_output_rows"):
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValidationError(f"{k} must be a non-negative integer, got {v!r}")
        if self.query_kind not in QUERY_KINDS:
            raise ValidationError(f"query_kind must be one of {QUERY_KINDS}, got {self.query_kind!r}")
        bound = self.output_bound()
        if bound is not None and self.estimated_output_rows > bound:
            raise ValidationError(
                f"estimated_output_rows={self.estimated_output_rows} exceeds the bound {bound} for {self.query_kind}"
            )


@dataclass(frozen=True)
class EngineChoice:
    engine: str
    reasons: tuple[str, ...]
    thresholds_used: RouterConfig
    stats: GraphStats = field(compare=False, default=None)


def choose_engine(stats: GraphStats, config: RouterConfig | None = None) -> EngineChoice:
    config = config or RouterConfig()
    stats.validate()
    if stats.estimated_output_rows <= config.small_output_row_threshold:
        engine, rule = "local", RULE_SMALL_OUTPUT
    elif stats.vertex_count >= config.large_graph_vertex_threshold:
        engine, rule = "parallel", RULE_LARGE_GRAPH
    elif stats.vertex_count <= config.small_graph_vertex_threshold:
        engine, rule = "local", RULE_SMALL_GRAPH
    else:
        engine, rule = "parallel", RULE_MEDIUM_GRAPH
    return EngineChoice(engine, (rule,), config, stats)


_RULE_TEXT = {
    RULE_SMALL_OUTPUT: "small output: at most {small_output_row_threshold} rows expected",
    RULE_LARGE_GRAPH: "large graph: at least {large_graph_vertex_threshold} vertices",
    RULE_SMALL_GRAPH: "small graph: at most {small_graph_vertex_threshold} vertices",
    RULE_MEDIUM_GRAPH: "medium graph with large output: between {small_graph_vertex_threshold} "
    "and {large_graph_vertex_threshold} vertices, more than {small_output_row_threshold} rows",
}


def explain(choice: EngineChoice) -> str:
    cfg = asdict(choice.thresholds_used)
    lines = [f"engine: {choice.engine}"]
    lines += [f"rule: {r} ({_RULE_TEXT[r].format(**cfg)})" for r in choice.reasons]
    if choice.stats is not None:
        s = choice.stats
        lines.append(
            f"stats: vertex_count={s.vertex_count} edge_count={s.edge_count} "
            f"query_kind={s.query_kind} estimated_output_rows={s.estimated_output_rows}"
        )
    lines.append("thresholds: " + " ".join(f"{k}={cfg[k]}" for k in CONFIG_KEYS))
    return "\n".join(lines) + "\n"


def parse_thresholds(text: str) -> RouterConfig:
    """Recover the thresholds line from :func:`explain` output."""
    m = re.search(r"^thresholds: (.*)$", text, re.MULTILINE)
    if not m:
        raise ValidationError("no thresholds line in explanation")
    return RouterConfig.from_text(m.group(1).replace(" ", "\n"))
