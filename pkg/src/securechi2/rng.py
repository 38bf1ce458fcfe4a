"""Randomness sources.

Production code draws from the OS CSPRNG. Tests and reproducible demos pass a
seed, which switches to a SHA-256 counter-mode generator; both expose the same
interface, and both keep a running digest of everything they hand out so a
party's transcript can commit to its local randomness.
"""

from __future__ import annotations

import hashlib
import math
import os


class RandomSource:
    def __init__(self, seed: bytes | None = None):
        self._seeded = seed is not None
        self._key = hashlib.sha256(b"securechi2/drbg" + (seed or b"")).digest()
        self._counter = 0
        self._audit = hashlib.sha256()

    @classmethod
    def from_hex(cls, seed_hex: str | None) -> "RandomSource":
        return cls(bytes.fromhex(seed_hex) if seed_hex is not None else None)

    @property
    def seeded(self) -> bool:
        return self._seeded

    def spawn(self, label: str) -> "RandomSource":
        """Independent child stream; deterministic iff this source is seeded."""
        if not self._seeded:
            return RandomSource()
        return RandomSource(hashlib.sha256(self._key + label.encode()).digest())

    def randbytes(self, k: int) -> bytes:
        if self._seeded:
            out = bytearray()
            while len(out) < k:
                self._counter += 1
                out += hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
            data = bytes(out[:k])
        else:
            data = os.urandom(k)
        self._audit.update(data)
        return data

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        x = int.from_bytes(self.randbytes((k + 7) // 8), "big")
        return x >> (-k % 8)

    def randbelow(self, n: int) -> int:
        """Uniform in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("upper bound must be positive")
        k = n.bit_length()
        while True:
            x = self.randbits(k)
            if x < n:
                return x

    def rand_unit(self, n: int) -> int:
        """Uniform element of the multiplicative group Z*_n."""
        while True:
            x = self.randbelow(n)
            if x and math.gcd(x, n) == 1:
                return x

    def digest(self) -> str:
        """Hex digest of all output drawn so far."""
        return self._audit.hexdigest()


def default_rng(rng: RandomSource | None) -> RandomSource:
    return rng if rng is not None else RandomSource()
