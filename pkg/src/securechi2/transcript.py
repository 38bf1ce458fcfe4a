"""A party's view of a session: what it sent and received, digested.

Entries hold a SHA-256 of each payload and its length, never the payload
itself, so a transcript can be written to disk without leaking ciphertexts or
data. Round 0 marks handshake/abort frames outside the four protocol rounds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Callable

SENT = "sent"
RECEIVED = "received"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def epoch_clock() -> str:
    """Fixed timestamp, for byte-reproducible transcripts under a seed."""
    return datetime.fromtimestamp(0, timezone.utc).isoformat(timespec="microseconds")


@dataclass(frozen=True)
class TranscriptEntry:
    direction: str
    round: int
    sha256: str
    length: int
    timestamp: str


@dataclass
class Transcript:
    party: str
    entries: list[TranscriptEntry] = field(default_factory=list)
    outcome: str = "incomplete"
    randomness_digest: str = ""
    clock: Callable[[], str] = field(default=utc_now, repr=False, compare=False)

    def record(self, direction: str, round: int, payload: bytes) -> None:
        if direction not in (SENT, RECEIVED):
            raise ValueError(direction)
        if round and any(e.round > round for e in self.entries):
            raise ValueError(f"round {round} recorded after a later round")
        self.entries.append(
            TranscriptEntry(direction, round, hashlib.sha256(payload).hexdigest(), len(payload), self.clock())
        )

    def message_entries(self) -> list[TranscriptEntry]:
        return [e for e in self.entries if 1 <= e.round <= 4]

    def to_lines(self) -> str:
        """JSON Lines: one record per entry, then a summary record."""
        lines = [json.dumps(asdict(e), sort_keys=True) for e in self.entries]
        summary = {"party": self.party, "outcome": self.outcome, "randomness_digest": self.randomness_digest}
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_lines())

    @classmethod
    def from_lines(cls, text: str) -> "Transcript":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records:
            raise ValueError("empty transcript")
        summary = records[-1]
        t = cls(party=summary["party"], outcome=summary["outcome"], randomness_digest=summary["randomness_digest"])
        t.entries = [TranscriptEntry(**r) for r in records[:-1]]
        return t
