import socket
import threading

import pytest

from securechi2 import wire
from securechi2.paillier import keygen
from securechi2.rng import RandomSource


@pytest.fixture(scope="session")
def key512():
    """A fixed 512-bit modulus key pair, reused across tests."""
    return keygen(256, RandomSource(b"fixed test key 512"))


@pytest.fixture(scope="session")
def tiny_key():
    return keygen(primes=(5, 7))


@pytest.fixture
def rng():
    return RandomSource(b"per-test stream")


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class FrameCountingProxy:
    """TCP relay that parses the framed stream in both directions.

    ``frames`` collects (direction, kind, payload length) for every frame it
    forwards; direction is 'c2u' for client-to-upstream.
    """

    def __init__(self, upstream: tuple[str, int]):
        self.upstream = upstream
        self.frames: list[tuple[str, str, int]] = []
        self.bytes = {"c2u": 0, "u2c": 0}
        self._lock = threading.Lock()
        self._server = socket.create_server(("127.0.0.1", 0))
        self.address = self._server.getsockname()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _pump(self, src, dst, direction):
        buf = b""
        try:
            while True:
                chunk = src.recv(65536)
                if not chunk:
                    break
                buf += chunk
                with self._lock:
                    self.bytes[direction] += len(chunk)
                while len(buf) >= wire.HEADER.size:
                    length, _ = wire.HEADER.unpack(buf[: wire.HEADER.size])
                    end = wire.HEADER.size + length
                    if len(buf) < end:
                        break
                    payload = buf[wire.HEADER.size:end]
                    with self._lock:
                        self.frames.append((direction, wire.payload_kind(payload), length))
                    buf = buf[end:]
                # forward only after recording, so frames keep causal order
                dst.sendall(chunk)
        except OSError:
            pass
        finally:
            try:
                dst.shutdown(socket.SHUT_WR)
            except OSError:
                pass

    def _run(self):
        client, _ = self._server.accept()
        up = socket.create_connection(self.upstream)
        a = threading.Thread(target=self._pump, args=(client, up, "c2u"), daemon=True)
        b = threading.Thread(target=self._pump, args=(up, client, "u2c"), daemon=True)
        a.start()
        b.start()
        a.join()
        b.join()
        client.close()
        up.close()
        self._server.close()

    def join(self, timeout=60):
        self._thread.join(timeout)

    def protocol_frames(self):
        return [f for f in self.frames if f[1].startswith("round")]


# --------------------------------------------------------------------------
# acceptance reporting: each criterion appends one line, printed at the end

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a named criterion result; use as ``criterion(1, "name", ok, detail)``."""

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
