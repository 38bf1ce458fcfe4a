"""Length-prefixed TCP framing for running the parties as separate processes.

Frame: 4-byte big-endian payload length, 1-byte version (0x01), payload.
Payloads are one of

* a protocol message (first byte = round 1..4, see ``protocol.encode_message``);
* a handshake: b"X2FS", version, variant byte, 4-byte id count, then each id
  as a 4-byte length and UTF-8 bytes. Carol sends her id order; Felix answers
  with an empty id list to accept;
* an abort: 0xFF, round byte, then code and detail as length-prefixed UTF-8.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass

from securechi2.errors import HandshakeVersionMismatch, TransportError, UnexpectedMessage

VERSION = 0x01
MAGIC = b"X2FS"
MAX_PAYLOAD = 64 * 1024 * 1024
HEADER = struct.Struct("!IB")
ABORT_TAG = 0xFF


def frame(payload: bytes, version: int = VERSION) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise TransportError(f"payload of {len(payload)} bytes exceeds the 64 MiB frame limit")
    return HEADER.pack(len(payload), version) + payload


def parse_header(header: bytes) -> tuple[int, int]:
    length, version = HEADER.unpack(header)
    if version != VERSION:
        raise HandshakeVersionMismatch(f"peer speaks version {version:#04x}, expected {VERSION:#04x}")
    if length > MAX_PAYLOAD:
        raise TransportError(f"announced payload of {length} bytes exceeds the frame limit")
    return length, version


def deframe(data: bytes) -> tuple[bytes, bytes]:
    """Split one frame off the front of ``data``; returns (payload, rest)."""
    if len(data) < HEADER.size:
        raise TransportError("truncated frame header")
    length, _ = parse_header(data[: HEADER.size])
    end = HEADER.size + length
    if len(data) < end:
        raise TransportError("truncated frame payload")
    return data[HEADER.size:end], data[end:]


def _recv_exact(sock: socket.socket, k: int) -> bytes:
    buf = bytearray()
    while len(buf) < k:
        try:
            chunk = sock.recv(k - len(buf))
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        if not chunk:
            raise TransportError("connection closed by peer")
        buf += chunk
    return bytes(buf)


def send_frame(sock: socket.socket, payload: bytes) -> None:
    try:
        sock.sendall(frame(payload))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def recv_frame(sock: socket.socket) -> bytes:
    length, _ = parse_header(_recv_exact(sock, HEADER.size))
    return _recv_exact(sock, length) if length else b""


# --------------------------------------------------------------------------
# handshake and abort payloads


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("!I", len(b)) + b


def _unpack_str(buf: bytes, offset: int) -> tuple[str, int]:
    if len(buf) - offset < 4:
        raise UnexpectedMessage("truncated string length")
    (k,) = struct.unpack_from("!I", buf, offset)
    start = offset + 4
    if start + k > len(buf):
        raise UnexpectedMessage("truncated string")
    return buf[start:start + k].decode("utf-8"), start + k


@dataclass(frozen=True)
class Handshake:
    variant: int
    ids: tuple[str, ...] = ()
    version: int = VERSION

    def to_bytes(self) -> bytes:
        body = b"".join(_pack_str(i) for i in self.ids)
        return MAGIC + bytes([self.version, self.variant]) + struct.pack("!I", len(self.ids)) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Handshake":
        if data[:4] != MAGIC or len(data) < 10:
            raise UnexpectedMessage("expected a handshake")
        version, variant = data[4], data[5]
        if version != VERSION:
            raise HandshakeVersionMismatch(f"peer handshake version {version:#04x}, expected {VERSION:#04x}")
        (count,) = struct.unpack_from("!I", data, 6)
        offset, ids = 10, []
        for _ in range(count):
            s, offset = _unpack_str(data, offset)
            ids.append(s)
        if offset != len(data):
            raise UnexpectedMessage("trailing bytes after handshake")
        return cls(variant, tuple(ids), version)


@dataclass(frozen=True)
class Abort:
    round: int
    code: str
    detail: str = ""

    def to_bytes(self) -> bytes:
        return bytes([ABORT_TAG, self.round]) + _pack_str(self.code) + _pack_str(self.detail)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Abort":
        if len(data) < 2 or data[0] != ABORT_TAG:
            raise UnexpectedMessage("expected an abort frame")
        code, offset = _unpack_str(data, 2)
        detail, _ = _unpack_str(data, offset)
        return cls(data[1], code, detail)


def is_handshake(payload: bytes) -> bool:
    return payload[:4] == MAGIC


def is_abort(payload: bytes) -> bool:
    return payload[:1] == bytes([ABORT_TAG])


def payload_kind(payload: bytes) -> str:
    """'handshake', 'abort' or 'round<k>'; used by tooling that watches the wire."""
    if is_handshake(payload):
        return "handshake"
    if is_abort(payload):
        return "abort"
    if payload and 1 <= payload[0] <= 4:
        return f"round{payload[0]}"
    return "unknown"
