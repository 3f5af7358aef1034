"""Trust-gated overlay network for autonomous agents.

Subsystems: virtual addressing and the datagram codec (overlay), encrypted
channels and trust handshakes (channel), the coordination registry
(registry), a deterministic population simulator (sim), snapshot analytics
(analytics), a calibrated social-graph generator (growth), deterministic
chart rendering (charts), a socket-facing registry server (server), and a
command line front end (cli).
"""

__version__ = "0.1.0"

from .channel import (
    AgentIdentity,
    HandshakeInitiator,
    HandshakeResponder,
    SecureSession,
    TrustRecord,
    run_handshake,
)
from .growth import GrowthConfig, generate, preset, preset_names
from .overlay import PacketHeader, VirtualAddress, decode_packet, encode_packet
from .registry import RegistryService
from .sim import (
    Beacon,
    BehaviorPolicy,
    Distribution,
    ScenarioResult,
    SimConfig,
    relay_via_beacon,
    run_scenario,
    transport_deliver,
)
from .snapshot import StatsSnapshot

__all__ = [
    "AgentIdentity",
    "Beacon",
    "BehaviorPolicy",
    "Distribution",
    "GrowthConfig",
    "HandshakeInitiator",
    "HandshakeResponder",
    "PacketHeader",
    "RegistryService",
    "ScenarioResult",
    "SecureSession",
    "SimConfig",
    "StatsSnapshot",
    "TrustRecord",
    "VirtualAddress",
    "decode_packet",
    "encode_packet",
    "generate",
    "preset",
    "preset_names",
    "relay_via_beacon",
    "run_handshake",
    "run_scenario",
    "transport_deliver",
    "__version__",
]
