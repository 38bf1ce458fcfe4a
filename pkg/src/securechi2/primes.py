"""Probable-prime generation (Miller-Rabin)."""

from __future__ import annotations

from securechi2.bigmod import powmod
from securechi2.rng import RandomSource, default_rng

MR_ROUNDS = 64

_SMALL_PRIMES = [p for p in range(3, 2000) if all(p % d for d in range(2, int(p**0.5) + 1))]


def is_probable_prime(n: int, rounds: int = MR_ROUNDS, rng: RandomSource | None = None) -> bool:
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    rng = default_rng(rng)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = 2 + rng.randbelow(n - 3)
        x = powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: RandomSource | None = None) -> int:
    """Probable prime with exactly ``bits`` bits and its top two bits set.

    Setting the second bit as well makes the product of two such primes have
    exactly 2*bits bits.
    """
    if bits < 3:
        raise ValueError("need at least 3 bits")
    rng = default_rng(rng)
    top = (1 << (bits - 1)) | (1 << (bits - 2))
    while True:
        candidate = rng.randbits(bits) | top | 1
        if is_probable_prime(candidate, rng=rng):
            return candidate
