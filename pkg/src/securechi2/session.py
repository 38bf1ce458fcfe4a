"""Running a party over TCP, or both parties in one process."""

from __future__ import annotations

import logging
import socket
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from securechi2 import protocol, wire
from securechi2.chi2core import confidence, format_decimal
from securechi2.dataset import Dataset, align, load_dataset
from securechi2.errors import PeerAbort, SecureChi2Error, TransportError, UnexpectedMessage
from securechi2.protocol import BlindingVariant
from securechi2.rng import RandomSource
from securechi2.transcript import RECEIVED, SENT, Transcript, epoch_clock, utc_now

log = logging.getLogger(__name__)

MIN_KEY_BITS = 512


@dataclass
class SessionConfig:
    """One party's settings. ``key_bits`` is the size of the modulus N."""

    role: str
    input_path: Path
    variant: BlindingVariant = protocol.DEFAULT_VARIANT
    key_bits: int = 1024
    listen: tuple[str, int] | None = None
    connect: tuple[str, int] | None = None
    id_column: str = "id"
    value_column: str = "value"
    transcript_path: Path | None = None
    seed: str | None = None
    timeout: float = 300.0

    def __post_init__(self):
        if self.role not in ("carol", "felix"):
            raise ValueError(f"role must be carol or felix, not {self.role!r}")
        if (self.listen is None) == (self.connect is None):
            raise ValueError("exactly one of listen / connect is required")
        check_key_bits(self.key_bits, test_mode=self.seed is not None)

    @property
    def prime_bits(self) -> int:
        return self.key_bits // 2


def check_key_bits(key_bits: int, test_mode: bool) -> None:
    if key_bits < MIN_KEY_BITS and not test_mode:
        raise ValueError(f"key_bits must be >= {MIN_KEY_BITS} (smaller keys need --seed test mode)")
    if key_bits < 32:
        raise ValueError("key_bits must be >= 32")


@dataclass
class SessionReport:
    role: str
    status: str
    transcript: Transcript = field(repr=False)
    chi2: Fraction | None = None

    @property
    def chi2_decimal(self) -> str | None:
        return None if self.chi2 is None else format_decimal(self.chi2)

    @property
    def confidence(self) -> str | None:
        return None if self.chi2 is None else str(confidence(self.chi2))

    def to_dict(self) -> dict:
        out = {"role": self.role, "status": self.status}
        if self.chi2 is not None:
            out.update(
                chi2=f"{self.chi2.numerator}/{self.chi2.denominator}",
                chi2_decimal=self.chi2_decimal,
                confidence=self.confidence,
            )
        return out


def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def _open(cfg: SessionConfig) -> socket.socket:
    try:
        if cfg.listen is not None:
            with socket.create_server(cfg.listen) as server:
                server.settimeout(cfg.timeout)
                log.info("listening on %s:%d", *cfg.listen)
                conn, _ = server.accept()
        else:
            deadline = time.monotonic() + min(cfg.timeout, 30.0)
            while True:
                try:
                    conn = socket.create_connection(cfg.connect, timeout=cfg.timeout)
                    break
                except ConnectionRefusedError:
                    if time.monotonic() > deadline:
                        raise
                    time.sleep(0.05)
    except OSError as exc:
        raise TransportError(f"could not establish connection: {exc}") from exc
    conn.settimeout(cfg.timeout)
    return conn


class _Channel:
    """Framed socket that mirrors every payload into the transcript."""

    def __init__(self, sock: socket.socket, transcript: Transcript):
        self.sock = sock
        self.transcript = transcript

    def send(self, payload: bytes, round: int) -> None:
        wire.send_frame(self.sock, payload)
        self.transcript.record(SENT, round, payload)

    def send_message(self, msg) -> None:
        self.send(protocol.encode_message(msg), msg.round)

    def abort(self, round: int, exc: SecureChi2Error) -> None:
        try:
            self.send(wire.Abort(round, exc.code, str(exc)).to_bytes(), 0)
        except TransportError:
            log.warning("could not deliver abort frame to peer")

    def recv(self) -> bytes:
        payload = wire.recv_frame(self.sock)
        if wire.is_abort(payload):
            self.transcript.record(RECEIVED, 0, payload)
            a = wire.Abort.from_bytes(payload)
            raise PeerAbort(a.round, a.code, a.detail)
        return payload

    def recv_handshake(self) -> wire.Handshake:
        payload = self.recv()
        self.transcript.record(RECEIVED, 0, payload)
        return wire.Handshake.from_bytes(payload)

    def recv_message(self, expected_cls):
        payload = self.recv()
        round_no = payload[0] if payload and 1 <= payload[0] <= 4 else 0
        self.transcript.record(RECEIVED, round_no, payload)
        msg = protocol.decode_message(payload)
        if not isinstance(msg, expected_cls):
            raise UnexpectedMessage(f"expected round {expected_cls.round}, got round {msg.round}")
        return msg


def _guarded(chan: _Channel, round: int, fn, *args, **kwargs):
    """Run a local protocol step; on failure tell the peer which round broke."""
    try:
        return fn(*args, **kwargs)
    except SecureChi2Error as exc:
        if exc.round is None:
            exc.round = round
        chan.abort(round, exc)
        raise


def _carol(chan: _Channel, cfg: SessionConfig, data: Dataset, rng: RandomSource) -> Fraction:
    chan.send(wire.Handshake(cfg.variant.value, data.ids).to_bytes(), 0)
    chan.recv_handshake()
    st, m1 = _guarded(chan, 1, protocol.carol_round1, data.values, cfg.prime_bits, cfg.variant, rng)
    chan.send_message(m1)
    m2 = chan.recv_message(protocol.Round2Message)
    chan.send_message(_guarded(chan, 3, protocol.carol_round3, st, m2))
    m4 = chan.recv_message(protocol.Round4Message)
    return _guarded(chan, 4, protocol.carol_finish, st, m4)


def _felix(chan: _Channel, cfg: SessionConfig, data: Dataset, rng: RandomSource) -> None:
    hello = chan.recv_handshake()
    f = _guarded(chan, 0, align, hello.ids, data)
    chan.send(wire.Handshake(hello.variant).to_bytes(), 0)
    m1 = chan.recv_message(protocol.Round1Message)
    st, m2 = _guarded(chan, 2, protocol.felix_round2, f, m1, rng)
    chan.send_message(m2)
    m3 = chan.recv_message(protocol.Round3Message)
    chan.send_message(_guarded(chan, 4, protocol.felix_round4, st, m3))


def serve_session(cfg: SessionConfig) -> SessionReport:
    """Run ``cfg.role`` against a peer over TCP.

    Carol's report carries the statistic; Felix's only the completion status.
    The transcript is written (if configured) whether or not the session
    completes.
    """
    data = load_dataset(cfg.input_path, cfg.id_column, cfg.value_column)
    rng = RandomSource.from_hex(cfg.seed).spawn(cfg.role)
    transcript = Transcript(cfg.role, clock=epoch_clock if cfg.seed is not None else utc_now)
    chi2 = None
    try:
        with _open(cfg) as sock:
            chan = _Channel(sock, transcript)
            if cfg.role == "carol":
                chi2 = _carol(chan, cfg, data, rng)
            else:
                _felix(chan, cfg, data, rng)
        transcript.outcome = "completed"
    except SecureChi2Error as exc:
        transcript.outcome = f"aborted:{exc.code}" + (f":round{exc.round}" if exc.round is not None else "")
        raise
    finally:
        transcript.randomness_digest = rng.digest()
        if cfg.transcript_path is not None:
            transcript.write(cfg.transcript_path)
    return SessionReport(cfg.role, "completed", transcript, chi2)


def run_local(
    carol_csv,
    felix_csv,
    variant: BlindingVariant = protocol.DEFAULT_VARIANT,
    key_bits: int = 1024,
    *,
    id_column: str = "id",
    value_column: str = "value",
    felix_value_column: str | None = None,
    transcript_path=None,
    seed: str | None = None,
) -> SessionReport:
    """Both parties in one process, no sockets; returns Carol's report."""
    check_key_bits(key_bits, test_mode=seed is not None)
    carol_data = load_dataset(carol_csv, id_column, value_column)
    felix_data = load_dataset(felix_csv, id_column, felix_value_column or value_column)
    f = align(carol_data.ids, felix_data)
    rng = RandomSource.from_hex(seed)
    clock = epoch_clock if seed is not None else utc_now
    chi2, carol_t, _ = protocol.run_session(carol_data.values, f, variant, key_bits // 2, rng, clock=clock)
    if transcript_path is not None:
        carol_t.write(transcript_path)
    return SessionReport("carol", "completed", carol_t, chi2)
