"""Coordination registry: identity, addressing, trust records, liveness.

A single authoritative state machine. Agents register a public key (plus
optional hostname and capability tags) and receive the next sequential
address on the registry's network. Trust records are unordered pairs stored
idempotently; self-trust is allowed and counts twice toward a node's
trust_links, so the sum of trust_links over all nodes is always
2 * non_self_edges + 2 * self_loops.

Liveness: a node is online while the last heartbeat is at most
MISSED_HEARTBEATS * HEARTBEAT_INTERVAL seconds old.

Handshake frames addressed to port 444 are relayed between agents without
reading anything beyond the overlay header and the leading frame type byte;
when the relay forwards the first CONFIRM of a handshake that it saw pass
through REQUEST and ACCEPT, it records the trust pair. The registry also
keeps an optional append-only JSON-lines event log from which state can be
restored after a restart.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

from .channel import (
    FRAME_ACCEPT,
    FRAME_CONFIRM,
    FRAME_DECLINE,
    FRAME_ERROR,
    FRAME_REQUEST,
    ERROR_UNKNOWN_DESTINATION,
)
from .errors import (
    ConfigInvalidError,
    DuplicateKeyError,
    HostnameNotFoundError,
    InvariantViolationError,
    UnknownNodeError,
)
from .overlay import (
    PORT_TRUST_HANDSHAKE,
    PacketHeader,
    VirtualAddress,
    decode_packet,
    encode_packet,
)
from .snapshot import NetworkView, NodeView, StatsSnapshot

HEARTBEAT_INTERVAL = 30.0
MISSED_HEARTBEATS = 3
OFFLINE_AFTER = HEARTBEAT_INTERVAL * MISSED_HEARTBEATS

REGISTRY_ADDRESS = VirtualAddress(0, 1)

# relay-observed handshake phases
_SAW_REQUEST = 1
_SAW_ACCEPT = 2
_RECORDED = 3


@dataclass
class NodeRecord:
    """Registry-side state for one registered agent."""

    address: VirtualAddress
    public_key: bytes
    tags: tuple[str, ...]
    hostname: Optional[str]
    registered_at: float
    last_heartbeat: float
    trust_links: int = 0

    def online(self, now: float) -> bool:
        return (now - self.last_heartbeat) <= OFFLINE_AFTER


def normalize_tags(tags, limit: int) -> tuple[str, ...]:
    """Lowercase, deduplicate preserving order, enforce the cap."""
    seen: list[str] = []
    for tag in tags:
        lowered = str(tag).strip().lower()
        if not lowered:
            raise ConfigInvalidError("empty tag")
        if lowered not in seen:
            seen.append(lowered)
    if len(seen) > limit:
        raise ConfigInvalidError(f"{len(seen)} tags exceed the cap of {limit}")
    return tuple(seen)


class RegistryService:
    """In-process registry state machine with a single serialized writer."""

    def __init__(
        self,
        *,
        network_id: int = 0,
        network_name: str = "backbone",
        base_node_id: int = 1,
        tag_limit: int = 3,
        registry_address: VirtualAddress = REGISTRY_ADDRESS,
        clock: Optional[Callable[[], float]] = None,
        event_log: Union[str, Path, None] = None,
    ) -> None:
        if base_node_id < 0:
            raise ConfigInvalidError("base_node_id may not be negative")
        self.network_id = network_id
        self.network_name = network_name
        self.base_node_id = base_node_id
        self.registry_address = registry_address
        self.tag_limit = tag_limit
        self._clock = clock if clock is not None else time.time
        self._nodes: dict[VirtualAddress, NodeRecord] = {}
        self._by_key: dict[bytes, VirtualAddress] = {}
        self._hostnames: dict[str, VirtualAddress] = {}
        self._edges: set[tuple[VirtualAddress, VirtualAddress]] = set()
        self._edge_order: list[tuple[VirtualAddress, VirtualAddress]] = []
        self._summary_trust_links = 0
        self._allocated = 0
        self.requests_served = 0
        self._relay_phase: dict[tuple[VirtualAddress, VirtualAddress], int] = {}
        self._event_log_path = Path(event_log) if event_log is not None else None

    # --- event log ---

    def _log_event(self, event: dict) -> None:
        if self._event_log_path is None:
            return
        with self._event_log_path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, separators=(",", ":")) + "\n")

    @classmethod
    def restore(
        cls, event_log: Union[str, Path], **kwargs
    ) -> "RegistryService":
        """Rebuild registry state by replaying an append-only event log."""
        path = Path(event_log)
        service = cls(event_log=None, **kwargs)
        if path.exists():
            with path.open(encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        service._apply_event(json.loads(line))
        service._event_log_path = path
        return service

    def _apply_event(self, event: dict) -> None:
        kind = event["event"]
        if kind == "register":
            record = self._register_node(
                bytes.fromhex(event["public_key"]),
                tuple(event["tags"]),
                event["hostname"],
                event["t"],
            )
            if record.address.to_text() != event["address"]:
                raise InvariantViolationError(
                    f"replay allocated {record.address} but the log says "
                    f"{event['address']}"
                )
        elif kind == "trust":
            self._record_trust_pair(
                VirtualAddress.from_text(event["a"]),
                VirtualAddress.from_text(event["b"]),
            )
        elif kind == "heartbeat":
            address = VirtualAddress.from_text(event["address"])
            if address in self._nodes:
                self._nodes[address].last_heartbeat = event["t"]
        else:
            raise InvariantViolationError(f"unknown event kind {kind!r}")

    # --- core API; every public call counts toward requests_served ---

    def register(
        self,
        public_key: bytes,
        tags=(),
        hostname: Optional[str] = None,
    ) -> VirtualAddress:
        """Allocate the next sequential address for a new public key."""
        self.requests_served += 1
        if public_key in self._by_key:
            raise DuplicateKeyError("public key is already registered")
        normalized = normalize_tags(tags, self.tag_limit)
        host = hostname.lower() if hostname is not None else None
        if host is not None and host in self._hostnames:
            raise DuplicateKeyError(f"hostname {host!r} is already bound")
        record = self._register_node(public_key, normalized, host, self._clock())
        self._log_event(
            {
                "event": "register",
                "address": record.address.to_text(),
                "public_key": public_key.hex(),
                "tags": list(normalized),
                "hostname": host,
                "t": record.registered_at,
            }
        )
        return record.address

    def _register_node(
        self,
        public_key: bytes,
        tags: tuple[str, ...],
        hostname: Optional[str],
        at_time: float,
    ) -> NodeRecord:
        address = VirtualAddress(self.network_id, self.base_node_id + self._allocated)
        self._allocated += 1
        record = NodeRecord(
            address=address,
            public_key=public_key,
            tags=tags,
            hostname=hostname,
            registered_at=at_time,
            last_heartbeat=at_time,
        )
        self._nodes[address] = record
        self._by_key[public_key] = address
        if hostname is not None:
            self._hostnames[hostname] = address
        return record

    def resolve(self, hostname: str) -> VirtualAddress:
        """Case-insensitive hostname lookup."""
        self.requests_served += 1
        address = self._hostnames.get(hostname.lower())
        if address is None:
            raise HostnameNotFoundError(f"hostname {hostname!r} is not bound")
        return address

    def node(self, address: VirtualAddress) -> NodeRecord:
        record = self._nodes.get(address)
        if record is None:
            raise UnknownNodeError(f"{address} is not registered")
        return record

    def public_key_of(self, address: VirtualAddress) -> bytes:
        """Directory lookup used by handshake verification."""
        self.requests_served += 1
        return self.node(address).public_key

    def record_trust(self, a: VirtualAddress, b: VirtualAddress) -> bool:
        """Store an unordered trust pair; returns False when already present."""
        self.requests_served += 1
        return self._record_trust_pair(a, b)

    def _record_trust_pair(self, a: VirtualAddress, b: VirtualAddress) -> bool:
        if a not in self._nodes:
            raise UnknownNodeError(f"{a} is not registered")
        if b not in self._nodes:
            raise UnknownNodeError(f"{b} is not registered")
        pair = (min(a, b), max(a, b))
        # The summary counter is monotonic over recording attempts, so it can
        # run ahead of the deduplicated edge list when the same pair is
        # recorded twice (e.g. both endpoints initiated a handshake).
        self._summary_trust_links += 1
        self._log_event(
            {"event": "trust", "a": pair[0].to_text(), "b": pair[1].to_text()}
        )
        if pair in self._edges:
            return False
        self._edges.add(pair)
        self._edge_order.append(pair)
        if pair[0] == pair[1]:
            self._nodes[pair[0]].trust_links += 2
        else:
            self._nodes[pair[0]].trust_links += 1
            self._nodes[pair[1]].trust_links += 1
        return True

    def heartbeat(self, address: VirtualAddress) -> None:
        self.requests_served += 1
        now = self._clock()
        self.node(address).last_heartbeat = now
        self._log_event({"event": "heartbeat", "address": address.to_text(), "t": now})

    def snapshot(self) -> StatsSnapshot:
        """Consistent full view; the call itself counts as a request."""
        self.requests_served += 1
        now = self._clock()
        nodes = [
            NodeView(
                address=record.address.to_text(),
                tags=record.tags,
                online=record.online(now),
                trust_links=record.trust_links,
            )
            for record in sorted(self._nodes.values(), key=lambda r: r.address)
        ]
        edges = [(a.to_text(), b.to_text()) for a, b in self._edge_order]
        per_agent = self.requests_served / len(nodes) if nodes else 0.0
        return StatsSnapshot(
            generated_at=now,
            requests_served=self.requests_served,
            networks=[NetworkView(self.network_id, self.network_name)],
            nodes=nodes,
            trust_edges=edges,
            summary_trust_links=self._summary_trust_links,
            requests_per_agent=per_agent,
        )

    # --- handshake relay ---

    def relay_handshake(
        self, datagram: bytes
    ) -> list[tuple[VirtualAddress, bytes]]:
        """Forward a port-444 frame; returns (next_hop, datagram) deliveries.

        The frame body stays opaque: only the overlay header and the leading
        type byte are read. An unknown destination produces an ERROR frame
        back to the sender. Forwarding the first CONFIRM of a handshake whose
        REQUEST and ACCEPT both passed through records the trust pair.
        """
        self.requests_served += 1
        header, payload = decode_packet(datagram)
        if header.dst_port != PORT_TRUST_HANDSHAKE or not payload:
            return []
        if header.src not in self._nodes:
            return []
        if header.dst not in self._nodes:
            error_header = PacketHeader(
                src=self.registry_address,
                dst=header.src,
                src_port=PORT_TRUST_HANDSHAKE,
                dst_port=PORT_TRUST_HANDSHAKE,
                payload_length=2,
            )
            error_payload = bytes([FRAME_ERROR, ERROR_UNKNOWN_DESTINATION])
            return [(header.src, encode_packet(error_header, error_payload))]

        frame_type = payload[0]
        if frame_type == FRAME_REQUEST:
            key = (header.src, header.dst)
            if self._relay_phase.get(key) != _SAW_REQUEST:
                self._relay_phase[key] = _SAW_REQUEST
        elif frame_type == FRAME_ACCEPT:
            key = (header.dst, header.src)
            if self._relay_phase.get(key) == _SAW_REQUEST:
                self._relay_phase[key] = _SAW_ACCEPT
        elif frame_type == FRAME_CONFIRM:
            key = (header.src, header.dst)
            if self._relay_phase.get(key) == _SAW_ACCEPT:
                self._record_trust_pair(header.src, header.dst)
                self._relay_phase[key] = _RECORDED
        elif frame_type == FRAME_DECLINE:
            self._relay_phase.pop((header.dst, header.src), None)
        return [(header.dst, datagram)]

    # --- invariants and introspection ---

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def check_invariants(self) -> None:
        """Degree identity: sum of trust_links == 2*nonself + 2*selfloops."""
        nonself = sum(1 for a, b in self._edges if a != b)
        selfloops = len(self._edges) - nonself
        total = sum(record.trust_links for record in self._nodes.values())
        if total != 2 * nonself + 2 * selfloops:
            raise InvariantViolationError(
                f"trust_links sum {total} != 2*{nonself} + 2*{selfloops}"
            )
        if self._summary_trust_links < len(self._edges):
            raise InvariantViolationError(
                f"summary counter {self._summary_trust_links} fell behind "
                f"{len(self._edges)} stored edges"
            )
