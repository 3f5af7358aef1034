"""48-bit virtual addressing and the overlay datagram codec.

An overlay address combines a 16-bit network id with a 32-bit node id and is
location independent. The canonical text form is ``D:NNNN.HHHH.LLLL`` where
``D`` is the network id in decimal and the three dot-separated groups are
16-bit hex values: the network id again, then the high and low halves of the
node id. The decimal prefix and the first hex group must agree.

Datagrams carry a fixed 20-byte header followed by the payload:

    magic(2) version(1) flags(1) src(6) dst(6) src_port(2) dst_port(2)

All multi-byte fields are big-endian. The payload length is not carried on
the wire; UDP preserves datagram boundaries, so it is derived from the
datagram length on decode and validated against the header on encode. The
payload ceiling of 65,487 bytes is the 65,535-byte UDP limit minus transport
headers and this 20-byte header.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

from .errors import (
    BadMagicError,
    BadVersionError,
    CodecError,
    MalformedAddressError,
    OversizePayloadError,
    TruncatedPacketError,
)

MAGIC = b"\x50\x56"
PROTOCOL_VERSION = 1
HEADER_SIZE = 20
MAX_PAYLOAD_SIZE = 65_487

PORT_SECURE_CHANNEL = 443
PORT_TRUST_HANDSHAKE = 444
PORT_REGISTRY = 1

_HEADER_STRUCT = struct.Struct("!2sBB6s6sHH")
_ADDRESS_STRUCT = struct.Struct("!HI")
_ADDRESS_RE = re.compile(
    r"\A([0-9]+):([0-9A-Fa-f]{4})\.([0-9A-Fa-f]{4})\.([0-9A-Fa-f]{4})\Z"
)


@dataclass(frozen=True, order=True)
class VirtualAddress:
    """Overlay endpoint identity: (network_id, node_id)."""

    network_id: int
    node_id: int

    def __post_init__(self) -> None:
        if not 0 <= self.network_id <= 0xFFFF:
            raise MalformedAddressError(
                f"network_id {self.network_id} outside 16-bit range"
            )
        if not 0 <= self.node_id <= 0xFFFF_FFFF:
            raise MalformedAddressError(f"node_id {self.node_id} outside 32-bit range")

    def to_text(self) -> str:
        """Render the canonical text form (hex groups uppercase)."""
        return "%d:%04X.%04X.%04X" % (
            self.network_id,
            self.network_id,
            self.node_id >> 16,
            self.node_id & 0xFFFF,
        )

    @classmethod
    def from_text(cls, text: str) -> "VirtualAddress":
        """Parse the text form; hex digits may be either case.

        Raises MalformedAddressError on wrong group count, non-hex digits,
        out-of-range values, or disagreement between the decimal prefix and
        the first hex group.
        """
        match = _ADDRESS_RE.match(text)
        if match is None:
            raise MalformedAddressError(f"unparseable address text: {text!r}")
        prefix = int(match.group(1), 10)
        network = int(match.group(2), 16)
        if prefix != network:
            raise MalformedAddressError(
                f"decimal prefix {prefix} disagrees with hex network group "
                f"{network} in {text!r}"
            )
        if prefix > 0xFFFF:
            raise MalformedAddressError(f"network id {prefix} overflows 16 bits")
        node = (int(match.group(3), 16) << 16) | int(match.group(4), 16)
        return cls(network, node)

    def to_bytes(self) -> bytes:
        """Serialize to the 6-byte big-endian wire form."""
        return _ADDRESS_STRUCT.pack(self.network_id, self.node_id)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "VirtualAddress":
        if len(raw) != 6:
            raise MalformedAddressError(f"address needs 6 bytes, got {len(raw)}")
        network, node = _ADDRESS_STRUCT.unpack(raw)
        return cls(network, node)

    def __str__(self) -> str:
        return self.to_text()


def _check_port(value: int, name: str) -> None:
    if not 0 <= value <= 0xFFFF:
        raise CodecError(f"{name} {value} outside 16-bit range")


@dataclass
class PacketHeader:
    """Fixed-size datagram header.

    payload_length is a logical field: encode_packet checks it against the
    actual payload and decode_packet reconstructs it from the datagram size.
    """

    src: VirtualAddress
    dst: VirtualAddress
    src_port: int
    dst_port: int
    payload_length: int = 0
    version: int = PROTOCOL_VERSION
    flags: int = 0

    def __post_init__(self) -> None:
        _check_port(self.src_port, "src_port")
        _check_port(self.dst_port, "dst_port")
        if not 0 <= self.version <= 0xFF:
            raise CodecError(f"version {self.version} outside 8-bit range")
        if not 0 <= self.flags <= 0xFF:
            raise CodecError(f"flags {self.flags} outside 8-bit range")
        if self.payload_length < 0:
            raise CodecError("payload_length may not be negative")
        if self.payload_length > MAX_PAYLOAD_SIZE:
            raise OversizePayloadError(
                f"payload_length {self.payload_length} exceeds {MAX_PAYLOAD_SIZE}"
            )

    def to_bytes(self) -> bytes:
        """Serialize the constant 20-byte wire header."""
        return _HEADER_STRUCT.pack(
            MAGIC,
            self.version,
            self.flags,
            self.src.to_bytes(),
            self.dst.to_bytes(),
            self.src_port,
            self.dst_port,
        )


def encode_packet(header: PacketHeader, payload: bytes) -> bytes:
    """Serialize header and payload into one datagram.

    Raises OversizePayloadError above the payload ceiling and CodecError when
    header.payload_length disagrees with the payload.
    """
    if len(payload) > MAX_PAYLOAD_SIZE:
        raise OversizePayloadError(
            f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD_SIZE}"
        )
    if header.payload_length != len(payload):
        raise CodecError(
            f"header.payload_length {header.payload_length} != payload "
            f"length {len(payload)}"
        )
    return header.to_bytes() + payload


def decode_packet(datagram: bytes) -> tuple[PacketHeader, bytes]:
    """Parse a datagram back into (header, payload).

    Raises TruncatedPacketError, BadMagicError, BadVersionError, or
    OversizePayloadError.
    """
    if len(datagram) < HEADER_SIZE:
        raise TruncatedPacketError(
            f"datagram of {len(datagram)} bytes is shorter than the "
            f"{HEADER_SIZE}-byte header"
        )
    magic, version, flags, src_raw, dst_raw, src_port, dst_port = (
        _HEADER_STRUCT.unpack_from(datagram)
    )
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != PROTOCOL_VERSION:
        raise BadVersionError(f"unsupported version {version}")
    payload = datagram[HEADER_SIZE:]
    if len(payload) > MAX_PAYLOAD_SIZE:
        raise OversizePayloadError(
            f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD_SIZE}"
        )
    header = PacketHeader(
        src=VirtualAddress.from_bytes(src_raw),
        dst=VirtualAddress.from_bytes(dst_raw),
        src_port=src_port,
        dst_port=dst_port,
        payload_length=len(payload),
        version=version,
        flags=flags,
    )
    return header, payload
