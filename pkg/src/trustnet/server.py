"""Network front end for the registry: UDP packet service plus stats endpoint.

Control operations (register, resolve, heartbeat) arrive as overlay packets
addressed to the registry's well-known address with destination port 1; the
body is one JSON object per packet and the reply mirrors it. Port-444 frames
are relayed between learned agent endpoints without reading their bodies.
The stats endpoint is a line-oriented TCP listener on the same port number:
the request line names the path `/api/stats` and the response is the full
snapshot as one JSON document.

All registry mutations funnel through one lock, preserving the serialized
single-writer contract while the UDP and TCP threads run concurrently.
"""

from __future__ import annotations

import json
import socket
import threading
from typing import Optional

from .errors import CodecError, TrustNetError, UnknownNodeError
from .overlay import (
    MAX_PAYLOAD_SIZE,
    PORT_REGISTRY,
    PORT_TRUST_HANDSHAKE,
    PacketHeader,
    VirtualAddress,
    decode_packet,
    encode_packet,
)
from .registry import REGISTRY_ADDRESS, RegistryService
from .snapshot import StatsSnapshot

NULL_ADDRESS = VirtualAddress(0, 0)
STATS_PATH = "/api/stats"
_RECV_SIZE = 65_535
_POLL_INTERVAL = 0.2


class RegistryServer:
    """Serves one RegistryService over real sockets; start()/stop() lifecycle.

    The default node-id base is 2 so allocated addresses never collide with
    the registry's own well-known address (network 0, node 1).
    """

    def __init__(
        self,
        registry: Optional[RegistryService] = None,
        host: str = "127.0.0.1",
        port: int = 0,
        **registry_kwargs,
    ) -> None:
        if registry is None:
            registry_kwargs.setdefault("base_node_id", 2)
            registry = RegistryService(**registry_kwargs)
        self.registry = registry
        self.host = host
        self._requested_port = port
        self.endpoints: dict[VirtualAddress, tuple[str, int]] = {}
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._udp: Optional[socket.socket] = None
        self._tcp: Optional[socket.socket] = None
        self._threads: list[threading.Thread] = []

    # -- lifecycle --

    def start(self) -> None:
        self._udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._udp.bind((self.host, self._requested_port))
        self._udp.settimeout(_POLL_INTERVAL)
        port = self._udp.getsockname()[1]
        self._tcp = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._tcp.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._tcp.bind((self.host, port))
        self._tcp.listen(8)
        self._tcp.settimeout(_POLL_INTERVAL)
        self._threads = [
            threading.Thread(target=self._udp_loop, daemon=True),
            threading.Thread(target=self._tcp_loop, daemon=True),
        ]
        for thread in self._threads:
            thread.start()

    def stop(self) -> None:
        self._stop.set()
        for thread in self._threads:
            thread.join(timeout=2.0)
        for sock in (self._udp, self._tcp):
            if sock is not None:
                sock.close()
        self._threads = []

    def __enter__(self) -> "RegistryServer":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()

    @property
    def port(self) -> int:
        assert self._udp is not None, "server is not started"
        return self._udp.getsockname()[1]

    @property
    def endpoint(self) -> tuple[str, int]:
        return (self.host, self.port)

    # -- UDP packet service --

    def _udp_loop(self) -> None:
        while not self._stop.is_set():
            try:
                data, peer = self._udp.recvfrom(_RECV_SIZE)
            except socket.timeout:
                continue
            except OSError:
                return
            try:
                self._handle_datagram(data, peer)
            except CodecError:
                continue  # malformed datagrams are dropped, not answered

    def _handle_datagram(self, data: bytes, peer: tuple[str, int]) -> None:
        header, payload = decode_packet(data)
        with self._lock:
            try:
                self.registry.node(header.src)
            except UnknownNodeError:
                pass
            else:
                self.endpoints[header.src] = peer
        if header.dst_port == PORT_REGISTRY:
            reply = self._control_op(payload, peer)
            out = PacketHeader(
                src=self.registry.registry_address,
                dst=header.src,
                src_port=PORT_REGISTRY,
                dst_port=header.src_port,
                payload_length=len(reply),
            )
            self._udp.sendto(encode_packet(out, reply), peer)
        elif header.dst_port == PORT_TRUST_HANDSHAKE:
            with self._lock:
                deliveries = self.registry.relay_handshake(data)
            for next_hop, datagram in deliveries:
                endpoint = peer if next_hop == header.src else self.endpoints.get(
                    next_hop
                )
                if endpoint is not None:
                    self._udp.sendto(datagram, endpoint)

    def _control_op(self, payload: bytes, peer: tuple[str, int]) -> bytes:
        try:
            doc = json.loads(payload.decode("utf-8"))
            if not isinstance(doc, dict):
                raise ValueError("control body must be a JSON object")
            op = doc.get("op")
            with self._lock:
                if op == "register":
                    address = self.registry.register(
                        bytes.fromhex(doc["public_key"]),
                        tags=doc.get("tags", ()),
                        hostname=doc.get("hostname"),
                    )
                    self.endpoints[address] = peer
                    reply = {"ok": True, "address": address.to_text()}
                elif op == "resolve":
                    address = self.registry.resolve(doc["hostname"])
                    reply = {"ok": True, "address": address.to_text()}
                elif op == "heartbeat":
                    address = VirtualAddress.from_text(doc["address"])
                    self.registry.heartbeat(address)
                    self.endpoints[address] = peer
                    reply = {"ok": True}
                else:
                    reply = {"ok": False, "error": "unknown-op"}
        except TrustNetError as exc:
            reply = {
                "ok": False,
                "error": type(exc).__name__,
                "message": str(exc),
            }
        except (KeyError, ValueError, UnicodeDecodeError) as exc:
            reply = {"ok": False, "error": "bad-request", "message": str(exc)}
        return json.dumps(reply, separators=(",", ":")).encode("utf-8")

    # -- TCP stats endpoint --

    def _tcp_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._tcp.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            with conn:
                conn.settimeout(2.0)
                try:
                    line = conn.makefile("r", encoding="utf-8").readline()
                except OSError:
                    continue
                tokens = line.split()
                if STATS_PATH in tokens:
                    with self._lock:
                        body = self.registry.snapshot().to_json()
                else:
                    body = json.dumps({"ok": False, "error": "unknown-path"})
                try:
                    conn.sendall(body.encode("utf-8") + b"\n")
                except OSError:
                    continue


# --- client helpers ---


class RegistryClient:
    """UDP client for the control protocol; keeps one socket per identity.

    The socket is the client's network identity: the server learns this
    endpoint at registration and relays handshake frames back to it, so use
    recv_datagram() to receive them.
    """

    def __init__(self, server: tuple[str, int], timeout: float = 3.0) -> None:
        self.server = server
        self.address: Optional[VirtualAddress] = None
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind(("127.0.0.1", 0))
        self._sock.settimeout(timeout)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "RegistryClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _call(self, doc: dict) -> dict:
        body = json.dumps(doc, separators=(",", ":")).encode("utf-8")
        if len(body) > MAX_PAYLOAD_SIZE:
            raise ValueError("control body exceeds one datagram")
        header = PacketHeader(
            src=self.address if self.address is not None else NULL_ADDRESS,
            dst=REGISTRY_ADDRESS,
            src_port=PORT_REGISTRY,
            dst_port=PORT_REGISTRY,
            payload_length=len(body),
        )
        self._sock.sendto(encode_packet(header, body), self.server)
        while True:
            data, _ = self._sock.recvfrom(_RECV_SIZE)
            reply_header, payload = decode_packet(data)
            if reply_header.src_port == PORT_REGISTRY:
                return json.loads(payload.decode("utf-8"))

    def register(self, public_key: bytes, tags=(), hostname=None) -> VirtualAddress:
        doc = {"op": "register", "public_key": public_key.hex(), "tags": list(tags)}
        if hostname is not None:
            doc["hostname"] = hostname
        reply = self._call(doc)
        if not reply.get("ok"):
            raise RuntimeError(f"register failed: {reply}")
        self.address = VirtualAddress.from_text(reply["address"])
        return self.address

    def resolve(self, hostname: str) -> dict:
        return self._call({"op": "resolve", "hostname": hostname})

    def heartbeat(self) -> dict:
        assert self.address is not None, "register first"
        return self._call({"op": "heartbeat", "address": self.address.to_text()})

    def send_datagram(self, datagram: bytes) -> None:
        self._sock.sendto(datagram, self.server)

    def recv_datagram(self) -> bytes:
        data, _ = self._sock.recvfrom(_RECV_SIZE)
        return data


def fetch_stats(server: tuple[str, int], timeout: float = 3.0) -> StatsSnapshot:
    """Request /api/stats over TCP and parse the snapshot document."""
    with socket.create_connection(server, timeout=timeout) as conn:
        conn.sendall(f"GET {STATS_PATH}\n".encode("utf-8"))
        chunks = []
        while True:
            chunk = conn.recv(65536)
            if not chunk:
                break
            chunks.append(chunk)
    return StatsSnapshot.from_json(b"".join(chunks).decode("utf-8"))
