"""Registry stats snapshot: document model, serialization, validation.

The snapshot is the external contract between the registry, the analytics
pipeline, and the graph generator. Field names are fixed:

    generated_at, requests_served, requests_per_agent, networks,
    nodes[{address, tags, online, trust_links}], trust_edges[{a, b}],
    summary_trust_links

Addresses appear in canonical text form. summary_trust_links is a counter
maintained independently of the edge list, so externally produced documents
may legitimately disagree with len(trust_edges); the loader accepts that and
the consistency audit reports it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Union

from .errors import DanglingEdgeError, SchemaViolationError
from .overlay import VirtualAddress


@dataclass
class NodeView:
    """Per-node snapshot row."""

    address: str
    tags: tuple[str, ...] = ()
    online: bool = True
    trust_links: int = 0

    def to_dict(self) -> dict:
        return {
            "address": self.address,
            "tags": list(self.tags),
            "online": self.online,
            "trust_links": self.trust_links,
        }


@dataclass
class NetworkView:
    """Per-network snapshot row."""

    id: int
    name: str

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name}


@dataclass
class StatsSnapshot:
    """Complete, consistent view of registry state at one instant."""

    generated_at: float
    requests_served: int
    networks: list[NetworkView]
    nodes: list[NodeView]
    trust_edges: list[tuple[str, str]]
    summary_trust_links: int
    requests_per_agent: float = 0.0

    def to_dict(self) -> dict:
        return {
            "generated_at": self.generated_at,
            "requests_served": self.requests_served,
            "requests_per_agent": self.requests_per_agent,
            "networks": [net.to_dict() for net in self.networks],
            "nodes": [node.to_dict() for node in self.nodes],
            "trust_edges": [{"a": a, "b": b} for a, b in self.trust_edges],
            "summary_trust_links": self.summary_trust_links,
        }

    def to_json(self) -> str:
        """Deterministic serialization: fixed key order, fixed separators."""
        return json.dumps(self.to_dict(), indent=2, separators=(",", ": ")) + "\n"

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: Any) -> "StatsSnapshot":
        """Validate and build a snapshot from a parsed document.

        Raises SchemaViolationError on structural problems,
        MalformedAddressError on unparseable addresses, and
        DanglingEdgeError when edges reference unknown nodes.
        """
        if not isinstance(doc, dict):
            raise SchemaViolationError("snapshot document must be an object")
        for name in (
            "generated_at",
            "requests_served",
            "networks",
            "nodes",
            "trust_edges",
            "summary_trust_links",
        ):
            if name not in doc:
                raise SchemaViolationError(f"missing required field {name!r}")
        generated_at = _number(doc["generated_at"], "generated_at")
        requests_served = _non_negative_int(doc["requests_served"], "requests_served")
        summary = _non_negative_int(doc["summary_trust_links"], "summary_trust_links")
        requests_per_agent = _number(doc.get("requests_per_agent", 0.0), "requests_per_agent")

        networks = []
        for i, raw in enumerate(_list_of(doc["networks"], "networks", dict)):
            if "id" not in raw or "name" not in raw:
                raise SchemaViolationError(f"networks[{i}] needs id and name")
            networks.append(
                NetworkView(
                    _non_negative_int(raw["id"], f"networks[{i}].id"),
                    _string(raw["name"], f"networks[{i}].name"),
                )
            )

        nodes = []
        seen_addresses: set[str] = set()
        for i, raw in enumerate(_list_of(doc["nodes"], "nodes", dict)):
            for name in ("address", "tags", "online", "trust_links"):
                if name not in raw:
                    raise SchemaViolationError(f"nodes[{i}] missing {name!r}")
            address = _string(raw["address"], f"nodes[{i}].address")
            canonical = VirtualAddress.from_text(address).to_text()
            if canonical in seen_addresses:
                raise SchemaViolationError(f"duplicate node address {canonical}")
            seen_addresses.add(canonical)
            tags = tuple(
                _string(tag, f"nodes[{i}].tags[]")
                for tag in _list_of(raw["tags"], f"nodes[{i}].tags", str)
            )
            if not isinstance(raw["online"], bool):
                raise SchemaViolationError(f"nodes[{i}].online must be a boolean")
            nodes.append(
                NodeView(
                    address=canonical,
                    tags=tags,
                    online=raw["online"],
                    trust_links=_non_negative_int(
                        raw["trust_links"], f"nodes[{i}].trust_links"
                    ),
                )
            )

        edges = []
        for i, raw in enumerate(_list_of(doc["trust_edges"], "trust_edges", dict)):
            if "a" not in raw or "b" not in raw:
                raise SchemaViolationError(f"trust_edges[{i}] needs fields a and b")
            a = VirtualAddress.from_text(_string(raw["a"], f"trust_edges[{i}].a")).to_text()
            b = VirtualAddress.from_text(_string(raw["b"], f"trust_edges[{i}].b")).to_text()
            for endpoint in (a, b):
                if endpoint not in seen_addresses:
                    raise DanglingEdgeError(
                        f"trust_edges[{i}] references unknown node {endpoint}"
                    )
            edges.append((a, b))

        return cls(
            generated_at=generated_at,
            requests_served=requests_served,
            networks=networks,
            nodes=nodes,
            trust_edges=edges,
            summary_trust_links=summary,
            requests_per_agent=requests_per_agent,
        )

    @classmethod
    def from_json(cls, text: str) -> "StatsSnapshot":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"snapshot is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def load_snapshot(source: Union[str, Path, dict]) -> StatsSnapshot:
    """Load a snapshot from a dict, a JSON string, or a file path."""
    if isinstance(source, dict):
        return StatsSnapshot.from_dict(source)
    if isinstance(source, Path):
        return StatsSnapshot.from_json(source.read_text(encoding="utf-8"))
    text = str(source)
    if text.lstrip().startswith("{"):
        return StatsSnapshot.from_json(text)
    return StatsSnapshot.from_json(Path(text).read_text(encoding="utf-8"))


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolationError(f"{name} must be a number, got {type(value).__name__}")
    return float(value)


def _non_negative_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolationError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 0:
        raise SchemaViolationError(f"{name} may not be negative")
    return value


def _string(value: Any, name: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolationError(f"{name} must be a string, got {type(value).__name__}")
    return value


def _list_of(value: Any, name: str, kind: type) -> Iterable:
    if not isinstance(value, list):
        raise SchemaViolationError(f"{name} must be a list")
    for item in value:
        if not isinstance(item, kind):
            raise SchemaViolationError(
                f"{name} entries must be {kind.__name__}, got {type(item).__name__}"
            )
    return value
