"""Deterministic discrete-event simulator for agent populations.

A scenario runs a virtual-time event loop: agents arrive on a configurable
schedule, register with an in-process registry (tags drawn from the shared
tag model), optionally establish self-trust, then initiate real three-frame
handshakes with peers selected by the configured mechanism mix. Handshake
and data frames ride a lossy transport with latency draws and a fixed
timeout/retry discipline; registrations, heartbeats, and key lookups are
reliable control-plane calls. The registry's snapshot at the end of the run
is the simulator's output, alongside a ground-truth event log that records
what actually happened (arrivals, registrations, handshake starts and
completions, heartbeats, drops).

Determinism: one root seed is split hierarchically (scenario stream for the
arrival schedule, one independent stream per agent for its decisions and key
material, one stream for transport loss/latency), so a given SimConfig always
produces a byte-identical snapshot and event log.

The harness selects handshake targets once, at arrival time, with the newest
agent as initiator. Every unordered pair is therefore attempted at most once,
so a stored trust record always corresponds to exactly one completed
handshake, and at loss rate zero the snapshot's edge set equals the
ground-truth edge set exactly.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from .channel import (
    FRAME_ACCEPT,
    FRAME_CONFIRM,
    FRAME_DATA,
    FRAME_DECLINE,
    FRAME_ERROR,
    FRAME_REQUEST,
    SEAL_OVERHEAD,
    AcceptAllPolicy,
    HandshakeInitiator,
    HandshakeResponder,
    AgentIdentity,
    SecureSession,
)
from .errors import BeaconUnavailableError, ConfigInvalidError
from .growth import MECHANISMS, MechanismMix, TagModel, default_tag_model
from .overlay import (
    PORT_SECURE_CHANNEL,
    PORT_TRUST_HANDSHAKE,
    PacketHeader,
    VirtualAddress,
    decode_packet,
    encode_packet,
)
from .registry import RegistryService
from .snapshot import StatsSnapshot

HANDSHAKE_TIMEOUT = 3.0
HANDSHAKE_RETRIES = 2
DEFAULT_HEARTBEAT_INTERVAL = 30.0
PING_DELAY = 1.0

DISTRIBUTION_KINDS = ("fixed", "uniform", "exponential")
NAT_KINDS = ("cone", "symmetric")

EVENT_KINDS = (
    "arrival",
    "register",
    "handshake-start",
    "handshake-complete",
    "heartbeat",
    "drop",
)


# --- sampling distributions ---


@dataclass(frozen=True)
class Distribution:
    """Scalar sampler for inter-arrival times, latencies, and link counts.

    Times are virtual seconds and latencies virtual milliseconds; the unit is
    set by where the distribution is used, not by the distribution itself.
    """

    kind: str
    value: float = 0.0
    low: float = 0.0
    high: float = 0.0
    mean: float = 0.0

    @classmethod
    def fixed(cls, value: float) -> "Distribution":
        return cls(kind="fixed", value=float(value))

    @classmethod
    def uniform(cls, low: float, high: float) -> "Distribution":
        return cls(kind="uniform", low=float(low), high=float(high))

    @classmethod
    def exponential(cls, mean: float) -> "Distribution":
        return cls(kind="exponential", mean=float(mean))

    def validate(self) -> None:
        if self.kind not in DISTRIBUTION_KINDS:
            raise ConfigInvalidError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "fixed" and self.value < 0:
            raise ConfigInvalidError("fixed value may not be negative")
        if self.kind == "uniform" and not 0 <= self.low <= self.high:
            raise ConfigInvalidError("uniform bounds need 0 <= low <= high")
        if self.kind == "exponential" and self.mean < 0:
            raise ConfigInvalidError("exponential mean may not be negative")

    def sample(self, rng: random.Random) -> float:
        if self.kind == "fixed":
            return self.value
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high)
        if self.mean == 0:
            return 0.0
        return rng.expovariate(1.0 / self.mean)

    def sample_count(self, rng: random.Random) -> int:
        """Draw a non-negative integer (nearest-integer rounding)."""
        return max(0, int(self.sample(rng) + 0.5))

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "value": self.value}
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.low, "high": self.high}
        return {"kind": "exponential", "mean": self.mean}

    @classmethod
    def from_dict(cls, doc: dict) -> "Distribution":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigInvalidError("distribution must be an object with a kind")
        kind = doc["kind"]
        allowed = {
            "fixed": {"kind", "value"},
            "uniform": {"kind", "low", "high"},
            "exponential": {"kind", "mean"},
        }.get(kind)
        if allowed is None:
            raise ConfigInvalidError(f"unknown distribution kind {kind!r}")
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigInvalidError(
                f"unknown {kind} distribution keys {sorted(unknown)}"
            )
        dist = cls(
            kind=kind,
            value=float(doc.get("value", 0.0)),
            low=float(doc.get("low", 0.0)),
            high=float(doc.get("high", 0.0)),
            mean=float(doc.get("mean", 0.0)),
        )
        dist.validate()
        return dist


# --- virtual-time event loop ---


class EventLoop:
    """Priority queue over virtual time; ties break by scheduling order."""

    def __init__(self) -> None:
        self.now = 0.0
        self._seq = 0
        self._queue: list[tuple[float, int, Callable[[], None]]] = []

    def schedule(self, delay: float, action: Callable[[], None]) -> None:
        heapq.heappush(self._queue, (self.now + delay, self._seq, action))
        self._seq += 1

    def run_until(self, end: float) -> None:
        while self._queue and self._queue[0][0] <= end:
            when, _, action = heapq.heappop(self._queue)
            self.now = when
            action()
        self.now = end


# --- lossy transport and NAT traversal ---


def transport_deliver(
    datagram: bytes,
    loss_rate: float,
    latency: Distribution,
    rng: random.Random,
) -> Optional[tuple[float, bytes]]:
    """One lossy hop: None when dropped, else (delay_seconds, datagram).

    The loss draw happens first, then the latency draw (virtual
    milliseconds, returned as seconds). Because each hop draws its own
    latency, deliveries may overtake each other: ordering is not guaranteed.
    """
    if not 0 <= loss_rate <= 1:
        raise ConfigInvalidError("loss_rate must lie in [0, 1]")
    if rng.random() < loss_rate:
        return None
    return latency.sample(rng) / 1000.0, datagram


class Beacon:
    """Rendezvous relay for symmetric-NAT paths; keeps a raw byte trace.

    The beacon forwards datagrams untouched and records exactly the bytes it
    saw, which is what makes the trace useful for opacity checks: sealed
    payloads pass through, plaintext never does.
    """

    def __init__(self) -> None:
        self.trace: list[bytes] = []

    def relay(self, datagram: bytes) -> bytes:
        self.trace.append(bytes(datagram))
        return datagram


def relay_via_beacon(
    datagram: bytes,
    src_nat: str,
    dst_nat: str,
    beacon: Optional[Beacon] = None,
) -> tuple[str, bytes]:
    """Pick the data path for a NAT pair: direct unless either side is symmetric.

    Returns ("direct", datagram) or ("relayed", datagram); the payload bytes
    are identical either way. A relayed path without a registered beacon
    raises BeaconUnavailableError.
    """
    for nat in (src_nat, dst_nat):
        if nat not in NAT_KINDS:
            raise ConfigInvalidError(f"unknown NAT kind {nat!r}")
    if src_nat != "symmetric" and dst_nat != "symmetric":
        return "direct", datagram
    if beacon is None:
        raise BeaconUnavailableError("relayed path requires a registered beacon")
    return "relayed", beacon.relay(datagram)


# --- behavior policy and scenario configuration ---


@dataclass(frozen=True)
class BehaviorPolicy:
    """Behavioral knobs shared by every simulated agent.

    `window` bounds the propinquity pool to the most recent arrivals;
    responders accept every handshake request.
    """

    self_trust_probability: float = 0.0
    peer_selection: MechanismMix = field(default_factory=MechanismMix)
    target_links: Distribution = field(
        default_factory=lambda: Distribution.fixed(2.0)
    )
    tag_model: TagModel = field(default_factory=default_tag_model)
    heartbeat_interval: float = DEFAULT_HEARTBEAT_INTERVAL
    window: int = 10

    def validate(self) -> None:
        if not 0 <= self.self_trust_probability <= 1:
            raise ConfigInvalidError("self_trust_probability must lie in [0, 1]")
        self.peer_selection.validate()
        self.target_links.validate()
        if self.heartbeat_interval <= 0:
            raise ConfigInvalidError("heartbeat_interval must be positive")
        if self.window < 1:
            raise ConfigInvalidError("window must be at least 1")
        if not 0 <= self.tag_model.untagged_probability <= 1:
            raise ConfigInvalidError("untagged_probability must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "self_trust_probability": self.self_trust_probability,
            "peer_selection": self.peer_selection.to_dict(),
            "target_links": self.target_links.to_dict(),
            "untagged_probability": self.tag_model.untagged_probability,
            "heartbeat_interval": self.heartbeat_interval,
            "window": self.window,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BehaviorPolicy":
        if not isinstance(doc, dict):
            raise ConfigInvalidError("behavior must be an object")
        known = {
            "self_trust_probability",
            "peer_selection",
            "target_links",
            "untagged_probability",
            "heartbeat_interval",
            "window",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigInvalidError(f"unknown behavior keys {sorted(unknown)}")
        defaults = cls()
        policy = cls(
            self_trust_probability=float(
                doc.get("self_trust_probability", defaults.self_trust_probability)
            ),
            peer_selection=(
                MechanismMix.from_dict(doc["peer_selection"])
                if "peer_selection" in doc
                else defaults.peer_selection
            ),
            target_links=(
                Distribution.from_dict(doc["target_links"])
                if "target_links" in doc
                else defaults.target_links
            ),
            tag_model=default_tag_model(
                untagged_probability=float(
                    doc.get(
                        "untagged_probability",
                        defaults.tag_model.untagged_probability,
                    )
                )
            ),
            heartbeat_interval=float(
                doc.get("heartbeat_interval", defaults.heartbeat_interval)
            ),
            window=int(doc.get("window", defaults.window)),
        )
        policy.validate()
        return policy


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one scenario run."""

    agent_count: int
    arrival_schedule: Distribution = field(
        default_factory=lambda: Distribution.fixed(10.0)
    )
    loss_rate: float = 0.0
    latency: Distribution = field(
        default_factory=lambda: Distribution.uniform(20.0, 80.0)
    )
    behavior: BehaviorPolicy = field(default_factory=BehaviorPolicy)
    seed: int = 0
    duration: float = 3600.0
    symmetric_nat_fraction: float = 0.0
    ping_marker: str = ""

    def validate(self) -> None:
        if (
            isinstance(self.agent_count, bool)
            or not isinstance(self.agent_count, int)
            or self.agent_count < 1
        ):
            raise ConfigInvalidError("agent_count must be a positive integer")
        if not 0 <= self.loss_rate <= 1:
            raise ConfigInvalidError("loss_rate must lie in [0, 1]")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigInvalidError("seed must be an integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalidError("seed must fit in 64 bits")
        if self.duration <= 0:
            raise ConfigInvalidError("duration must be positive")
        if not 0 <= self.symmetric_nat_fraction <= 1:
            raise ConfigInvalidError("symmetric_nat_fraction must lie in [0, 1]")
        if not isinstance(self.ping_marker, str):
            raise ConfigInvalidError("ping_marker must be a string")
        self.arrival_schedule.validate()
        self.latency.validate()
        self.behavior.validate()

    def to_dict(self) -> dict:
        return {
            "agent_count": self.agent_count,
            "arrival_schedule": self.arrival_schedule.to_dict(),
            "loss_rate": self.loss_rate,
            "latency": self.latency.to_dict(),
            "behavior": self.behavior.to_dict(),
            "seed": self.seed,
            "duration": self.duration,
            "symmetric_nat_fraction": self.symmetric_nat_fraction,
            "ping_marker": self.ping_marker,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalidError("scenario must be an object")
        if "agent_count" not in doc:
            raise ConfigInvalidError("scenario requires agent_count")
        known = {
            "agent_count",
            "arrival_schedule",
            "loss_rate",
            "latency",
            "behavior",
            "seed",
            "duration",
            "symmetric_nat_fraction",
            "ping_marker",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigInvalidError(f"unknown scenario keys {sorted(unknown)}")
        base = cls(agent_count=1)
        config = cls(
            agent_count=doc["agent_count"],
            arrival_schedule=(
                Distribution.from_dict(doc["arrival_schedule"])
                if "arrival_schedule" in doc
                else base.arrival_schedule
            ),
            loss_rate=float(doc.get("loss_rate", base.loss_rate)),
            latency=(
                Distribution.from_dict(doc["latency"])
                if "latency" in doc
                else base.latency
            ),
            behavior=(
                BehaviorPolicy.from_dict(doc["behavior"])
                if "behavior" in doc
                else base.behavior
            ),
            seed=doc.get("seed", base.seed),
            duration=float(doc.get("duration", base.duration)),
            symmetric_nat_fraction=float(
                doc.get("symmetric_nat_fraction", base.symmetric_nat_fraction)
            ),
            ping_marker=doc.get("ping_marker", base.ping_marker),
        )
        config.validate()
        return config

    @classmethod
    def read(cls, path: Union[str, Path]) -> "SimConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def _split_rng(seed: int, label: str) -> random.Random:
    """Independent deterministic substream derived from the root seed."""
    digest = hashlib.sha256(f"{seed}|{label}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


# --- scenario result ---


@dataclass
class ScenarioResult:
    """Snapshot plus ground truth for one completed scenario."""

    config: SimConfig
    snapshot: StatsSnapshot
    events: list[dict]
    registry: RegistryService
    beacon: Beacon
    pings: list[tuple[str, str, bytes]]

    @property
    def ground_truth_edges(self) -> set[tuple[str, str]]:
        """Unordered trusted pairs from completed handshakes."""
        edges = set()
        for event in self.events:
            if event["event"] == "handshake-complete":
                pair = (event["initiator"], event["responder"])
                edges.add((min(pair), max(pair)))
        return edges

    def event_lines(self) -> list[str]:
        return [json.dumps(event, separators=(",", ":")) for event in self.events]

    def write_events(self, path: Union[str, Path]) -> None:
        Path(path).write_text(
            "\n".join(self.event_lines()) + "\n", encoding="utf-8"
        )


# --- agents ---


@dataclass
class _Attempt:
    initiator: HandshakeInitiator
    target: VirtualAddress
    request_datagram: bytes
    retries_left: int = HANDSHAKE_RETRIES
    done: bool = False


class _SimAgent:
    """One simulated agent: identity, NAT class, and protocol state."""

    def __init__(self, scenario: "_Scenario", index: int) -> None:
        self.scenario = scenario
        self.index = index
        self.rng = _split_rng(scenario.config.seed, f"agent-{index}")
        self.identity: Optional[AgentIdentity] = None
        self.nat = "cone"
        self.responder: Optional[HandshakeResponder] = None
        self.attempts: dict[VirtualAddress, _Attempt] = {}
        self.sessions: dict[VirtualAddress, SecureSession] = {}

    @property
    def address(self) -> VirtualAddress:
        assert self.identity is not None
        return self.identity.address

    # -- lifecycle --

    def arrive(self) -> None:
        sc = self.scenario
        config = sc.config
        behavior = config.behavior
        self.identity = AgentIdentity.generate(VirtualAddress(0, 0), self.rng)
        self.nat = (
            "symmetric"
            if self.rng.random() < config.symmetric_nat_fraction
            else "cone"
        )
        tags = behavior.tag_model.draw(self.rng)
        self.identity.address = sc.registry.register(
            self.identity.public_key, tags=tags
        )
        self.responder = HandshakeResponder(
            self.identity, AcceptAllPolicy(), sc.registry.public_key_of, self.rng
        )
        sc.log(
            "arrival", index=self.index, address=self.address.to_text(), nat=self.nat
        )
        sc.log("register", address=self.address.to_text(), tags=list(tags))
        sc.agents_arrived.append(self)
        sc.by_address[self.address] = self
        sc.loop.schedule(behavior.heartbeat_interval, self.heartbeat)
        if self.rng.random() < behavior.self_trust_probability:
            self.start_handshake(self.address)
        count = behavior.target_links.sample_count(self.rng)
        for target in sc.select_targets(self, count):
            self.start_handshake(target)

    def heartbeat(self) -> None:
        sc = self.scenario
        sc.registry.heartbeat(self.address)
        sc.log("heartbeat", address=self.address.to_text())
        sc.loop.schedule(sc.config.behavior.heartbeat_interval, self.heartbeat)

    # -- handshake initiator role --

    def start_handshake(self, target: VirtualAddress) -> None:
        sc = self.scenario
        initiator = HandshakeInitiator(
            self.identity, target, sc.registry.public_key_of, self.rng
        )
        payload = initiator.request_payload()
        attempt = _Attempt(
            initiator=initiator,
            target=target,
            request_datagram=_handshake_datagram(self.address, target, payload),
        )
        self.attempts[target] = attempt
        sc.log(
            "handshake-start",
            initiator=self.address.to_text(),
            responder=target.to_text(),
        )
        self._send_request(attempt)

    def _send_request(self, attempt: _Attempt) -> None:
        sc = self.scenario
        sc.send_via_relay(attempt.request_datagram)
        sc.loop.schedule(HANDSHAKE_TIMEOUT, lambda: self._on_timeout(attempt))

    def _on_timeout(self, attempt: _Attempt) -> None:
        if attempt.done:
            return
        if attempt.retries_left > 0:
            attempt.retries_left -= 1
            self._send_request(attempt)
        else:
            attempt.done = True

    # -- frame dispatch --

    def on_handshake_datagram(self, datagram: bytes) -> None:
        header, payload = decode_packet(datagram)
        if not payload:
            return
        frame_type = payload[0]
        body = payload[1:]
        if frame_type == FRAME_REQUEST:
            reply = self.responder.on_request(header.src, body)
            self.scenario.send_via_relay(
                _handshake_datagram(self.address, header.src, reply)
            )
        elif frame_type == FRAME_ACCEPT:
            self._on_accept(header.src, body)
        elif frame_type == FRAME_CONFIRM:
            record, session = self.responder.on_confirm(header.src, body)
            self.sessions.setdefault(header.src, session)
        elif frame_type in (FRAME_DECLINE, FRAME_ERROR):
            attempt = self.attempts.get(header.src)
            if attempt is not None:
                attempt.done = True

    def _on_accept(self, responder: VirtualAddress, body: bytes) -> None:
        attempt = self.attempts.get(responder)
        if attempt is None or attempt.done:
            return
        confirm = attempt.initiator.on_accept(body)
        attempt.done = True
        self.sessions[responder] = attempt.initiator.session
        sc = self.scenario
        sc.send_via_relay(_handshake_datagram(self.address, responder, confirm))
        sc.log(
            "handshake-complete",
            initiator=self.address.to_text(),
            responder=responder.to_text(),
        )
        sc.note_edge(self.address, responder)
        # Delay the first sealed message so the CONFIRM (two relay legs)
        # settles the responder's session before the ping (one leg) lands.
        sc.loop.schedule(PING_DELAY, lambda: self.send_ping(responder))

    # -- sealed data plane --

    def send_ping(self, peer: VirtualAddress) -> None:
        sc = self.scenario
        session = self.sessions[peer]
        plaintext = sc.config.ping_marker.encode() or b"ping"
        header = PacketHeader(
            src=self.address,
            dst=peer,
            src_port=PORT_SECURE_CHANNEL,
            dst_port=PORT_SECURE_CHANNEL,
            payload_length=1 + len(plaintext) + SEAL_OVERHEAD,
        )
        sealed = session.seal(header, plaintext)
        datagram = encode_packet(header, bytes([FRAME_DATA]) + sealed)
        peer_agent = sc.by_address[peer]
        _, routed = relay_via_beacon(datagram, self.nat, peer_agent.nat, sc.beacon)
        sc.send_data(routed, peer_agent)

    def on_data_datagram(self, datagram: bytes) -> None:
        header, payload = decode_packet(datagram)
        session = self.sessions.get(header.src)
        if session is None or not payload or payload[0] != FRAME_DATA:
            return
        plaintext = session.open(header, payload[1:])
        self.scenario.pings.append(
            (header.src.to_text(), self.address.to_text(), plaintext)
        )


def _handshake_datagram(
    src: VirtualAddress, dst: VirtualAddress, payload: bytes
) -> bytes:
    header = PacketHeader(
        src=src,
        dst=dst,
        src_port=PORT_TRUST_HANDSHAKE,
        dst_port=PORT_TRUST_HANDSHAKE,
        payload_length=len(payload),
    )
    return encode_packet(header, payload)


# --- scenario orchestration ---


class _Scenario:
    def __init__(self, config: SimConfig) -> None:
        self.config = config
        self.loop = EventLoop()
        self.registry = RegistryService(clock=lambda: self.loop.now)
        self.beacon = Beacon()
        self.events: list[dict] = []
        self.pings: list[tuple[str, str, bytes]] = []
        self.agents_arrived: list[_SimAgent] = []
        self.by_address: dict[VirtualAddress, _SimAgent] = {}
        self.neighbors: dict[VirtualAddress, set[VirtualAddress]] = {}
        self.scenario_rng = _split_rng(config.seed, "scenario")
        self.transport_rng = _split_rng(config.seed, "transport")

    # -- ground truth --

    def log(self, kind: str, **fields) -> None:
        self.events.append({"t": self.loop.now, "event": kind, **fields})

    def note_edge(self, a: VirtualAddress, b: VirtualAddress) -> None:
        if a != b:
            self.neighbors.setdefault(a, set()).add(b)
            self.neighbors.setdefault(b, set()).add(a)

    # -- arrivals --

    def schedule_arrivals(self) -> None:
        at = 0.0
        for index in range(self.config.agent_count):
            agent = _SimAgent(self, index)
            self.loop.schedule(at, agent.arrive)
            at += self.config.arrival_schedule.sample(self.scenario_rng)

    # -- peer selection (harness-side, at arrival time) --

    def select_targets(self, agent: _SimAgent, count: int) -> list[VirtualAddress]:
        """Choose distinct older agents for the newcomer to initiate with.

        Each unordered pair is attempted at most once across the scenario
        because only the newest agent ever initiates and its choices are
        deduplicated here.
        """
        pool = [a for a in self.agents_arrived if a is not agent]
        chosen: list[VirtualAddress] = []
        taken: set[VirtualAddress] = set()
        for _ in range(count):
            target = self._select_one(agent, pool, taken)
            if target is not None:
                taken.add(target)
                chosen.append(target)
        return chosen

    def _select_one(
        self,
        agent: _SimAgent,
        pool: list[_SimAgent],
        taken: set[VirtualAddress],
    ) -> Optional[VirtualAddress]:
        mix = self.config.behavior.peer_selection
        mechanism = agent.rng.choices(MECHANISMS, weights=mix.weights())[0]
        if mechanism == "propinquity":
            window = self.config.behavior.window
            candidates = [
                a.address for a in pool[-window:] if a.address not in taken
            ]
            return agent.rng.choice(candidates) if candidates else None
        if mechanism == "preferential":
            candidates = [a.address for a in pool if a.address not in taken]
            if not candidates:
                return None
            degree_weights = [
                len(self.neighbors.get(addr, ())) + 1 for addr in candidates
            ]
            return agent.rng.choices(candidates, weights=degree_weights)[0]
        if mechanism == "triadic":
            # Two-hop closure over settled edges and the newcomer's own
            # in-flight attempts; a fresh arrival usually has neither, and
            # an empty candidate set skips the draw rather than redirecting.
            first_hop = set(self.neighbors.get(agent.address, set()))
            first_hop.update(agent.attempts)
            two_hop: set[VirtualAddress] = set()
            for mid in first_hop:
                two_hop.update(self.neighbors.get(mid, ()))
            two_hop -= {agent.address}
            two_hop -= first_hop
            two_hop -= taken
            candidates = sorted(two_hop)
            return agent.rng.choice(candidates) if candidates else None
        candidates = [a.address for a in pool if a.address not in taken]
        return agent.rng.choice(candidates) if candidates else None

    # -- transport legs --

    def send_via_relay(self, datagram: bytes) -> None:
        """Agent -> registry leg; the relay output rides a second leg."""
        delivery = transport_deliver(
            datagram, self.config.loss_rate, self.config.latency, self.transport_rng
        )
        if delivery is None:
            self._log_drop(datagram, stage="to-relay")
            return
        delay, data = delivery
        self.loop.schedule(delay, lambda: self._relay_ingress(data))

    def _relay_ingress(self, datagram: bytes) -> None:
        for next_hop, out in self.registry.relay_handshake(datagram):
            delivery = transport_deliver(
                out, self.config.loss_rate, self.config.latency, self.transport_rng
            )
            if delivery is None:
                self._log_drop(out, stage="from-relay")
                continue
            delay, data = delivery
            receiver = self.by_address.get(next_hop)
            if receiver is None:
                continue
            self.loop.schedule(
                delay, lambda r=receiver, d=data: r.on_handshake_datagram(d)
            )

    def send_data(self, datagram: bytes, receiver: _SimAgent) -> None:
        delivery = transport_deliver(
            datagram, self.config.loss_rate, self.config.latency, self.transport_rng
        )
        if delivery is None:
            self._log_drop(datagram, stage="data")
            return
        delay, data = delivery
        self.loop.schedule(delay, lambda: receiver.on_data_datagram(data))

    def _log_drop(self, datagram: bytes, stage: str) -> None:
        header, payload = decode_packet(datagram)
        self.log(
            "drop",
            stage=stage,
            src=header.src.to_text(),
            dst=header.dst.to_text(),
            frame=payload[0] if payload else 0,
        )


def run_scenario(config: SimConfig) -> ScenarioResult:
    """Run one deterministic scenario and snapshot the registry at the end."""
    config.validate()
    scenario = _Scenario(config)
    scenario.schedule_arrivals()
    scenario.loop.run_until(config.duration)
    snapshot = scenario.registry.snapshot()
    return ScenarioResult(
        config=config,
        snapshot=snapshot,
        events=scenario.events,
        registry=scenario.registry,
        beacon=scenario.beacon,
        pings=scenario.pings,
    )
