"""Paillier cryptosystem with generator 1+N.

    Enc(m; r) = (1+N)^m * r^N mod N^2
    Dec(c)    = ((c^phi mod N^2) - 1) / N * phi^-1 mod N

Addition of plaintexts is ciphertext multiplication mod N^2; multiplication by
a public scalar is ciphertext exponentiation. The secret key keeps p and q so
the key owner can evaluate the same formulas through the CRT.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from securechi2.bigmod import decode_natural, encode_natural, invmod, powmod
from securechi2.errors import KeyMismatch, MalformedCiphertext
from securechi2.primes import random_prime
from securechi2.rng import RandomSource, default_rng

MIN_PRIME_BITS = 16
FINGERPRINT_SIZE = 32


@dataclass(frozen=True)
class PublicKey:
    n: int
    n_squared: int = field(init=False, repr=False)
    fingerprint: bytes = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 6:
            raise ValueError("modulus too small")
        object.__setattr__(self, "n_squared", self.n * self.n)
        object.__setattr__(self, "fingerprint", hashlib.sha256(encode_natural(self.n)).digest())

    def to_bytes(self) -> bytes:
        return encode_natural(self.n)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["PublicKey", int]:
        n, offset = decode_natural(data, offset)
        return cls(n), offset


@dataclass(frozen=True)
class SecretKey:
    public_key: PublicKey
    p: int = field(repr=False)
    q: int = field(repr=False)
    phi: int = field(init=False, repr=False)
    phi_inverse: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.p == self.q or self.p * self.q != self.public_key.n:
            raise ValueError("p, q must be distinct factors of N")
        phi = (self.p - 1) * (self.q - 1)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi_inverse", invmod(phi, self.public_key.n))
        p2, q2 = self.p * self.p, self.q * self.q
        # CRT constants for working mod N^2 = p^2 * q^2
        object.__setattr__(self, "_p2", p2)
        object.__setattr__(self, "_q2", q2)
        object.__setattr__(self, "_p2_inv_mod_q2", invmod(p2, q2))
        object.__setattr__(self, "_q_mod_pm1", self.q % (self.p - 1))
        object.__setattr__(self, "_p_mod_qm1", self.p % (self.q - 1))

    @property
    def n(self) -> int:
        return self.public_key.n

    def _crt(self, xp: int, xq: int) -> int:
        # x ≡ xp mod p^2, x ≡ xq mod q^2
        h = (xq - xp) * self._p2_inv_mod_q2 % self._q2
        return xp + h * self._p2

    def pow_n(self, r: int) -> int:
        """r^N mod N^2 via CRT.

        x -> x^p mod p^2 only depends on x mod p, so r^N = (r^q)^p mod p^2
        needs r^q mod p alone.
        """
        p, q = self.p, self.q
        xp = powmod(powmod(r, self._q_mod_pm1, p), p, self._p2)
        xq = powmod(powmod(r, self._p_mod_qm1, q), q, self._q2)
        return self._crt(xp, xq)

    def pow_phi(self, c: int) -> int:
        """c^phi mod N^2 via CRT.

        c^(p-1) = 1 + kp mod p^2, hence c^phi = 1 + (q-1)kp mod p^2.
        """
        p, q = self.p, self.q
        kp = (powmod(c, p - 1, self._p2) - 1) // p
        kq = (powmod(c, q - 1, self._q2) - 1) // q
        return self._crt(1 + (q - 1) * kp % p * p, 1 + (p - 1) * kq % q * q)


@dataclass(frozen=True)
class Ciphertext:
    value: int
    key_fingerprint: bytes

    def to_bytes(self) -> bytes:
        return self.key_fingerprint + encode_natural(self.value)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["Ciphertext", int]:
        fp = data[offset:offset + FINGERPRINT_SIZE]
        if len(fp) != FINGERPRINT_SIZE:
            raise ValueError("truncated key fingerprint")
        value, offset = decode_natural(data, offset + FINGERPRINT_SIZE)
        return cls(value, fp), offset


def keygen(
    k: int = 1024,
    rng: RandomSource | None = None,
    *,
    primes: tuple[int, int] | None = None,
) -> tuple[PublicKey, SecretKey]:
    """Generate a key pair from two distinct ``k``-bit probable primes.

    ``primes`` bypasses generation and the size check; it exists for
    small-modulus unit tests.
    """
    if primes is not None:
        p, q = primes
    else:
        if k < MIN_PRIME_BITS:
            raise ValueError(f"security parameter k must be >= {MIN_PRIME_BITS}")
        rng = default_rng(rng)
        while True:
            p = random_prime(k, rng)
            q = random_prime(k, rng)
            # gcd(N, phi) = 1 is automatic for equal-size distinct primes, checked anyway
            if p != q and math.gcd(p * q, (p - 1) * (q - 1)) == 1:
                break
    pk = PublicKey(p * q)
    return pk, SecretKey(pk, p, q)


def _check_key(pk_fp: bytes, c: Ciphertext):
    if c.key_fingerprint != pk_fp:
        raise KeyMismatch("ciphertext belongs to a different key")


def _check_plaintext(pk: PublicKey, m: int):
    if not 0 <= m < pk.n:
        raise ValueError("value outside Z_N")


def encrypt(pk: PublicKey, m: int, rng: RandomSource | None = None, *, r: int | None = None) -> Ciphertext:
    """Encrypt ``m`` in [0, N). ``r`` forces the randomness (tests only)."""
    _check_plaintext(pk, m)
    if r is None:
        r = default_rng(rng).rand_unit(pk.n)
    # (1+N)^m = 1 + mN mod N^2
    value = (1 + m * pk.n) * powmod(r, pk.n, pk.n_squared) % pk.n_squared
    return Ciphertext(value, pk.fingerprint)


def encrypt_with_secret(sk: SecretKey, m: int, rng: RandomSource | None = None, *, r: int | None = None) -> Ciphertext:
    """Same ciphertext as :func:`encrypt`, computed through the factorization."""
    pk = sk.public_key
    _check_plaintext(pk, m)
    if r is None:
        r = default_rng(rng).rand_unit(pk.n)
    value = (1 + m * pk.n) * sk.pow_n(r) % pk.n_squared
    return Ciphertext(value, pk.fingerprint)


def decrypt(sk: SecretKey, c: Ciphertext) -> int:
    pk = sk.public_key
    _check_key(pk.fingerprint, c)
    if not 0 < c.value < pk.n_squared or math.gcd(c.value, pk.n) != 1:
        raise MalformedCiphertext("ciphertext not a unit mod N^2")
    u = sk.pow_phi(c.value)
    if (u - 1) % pk.n:
        raise MalformedCiphertext("c^phi - 1 not divisible by N")
    return (u - 1) // pk.n * sk.phi_inverse % pk.n


def hom_add(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Enc(m1) ⊕ Enc(m2) = Enc(m1 + m2 mod N)."""
    _check_key(pk.fingerprint, c1)
    _check_key(pk.fingerprint, c2)
    return Ciphertext(c1.value * c2.value % pk.n_squared, pk.fingerprint)


def hom_scalar_mul(pk: PublicKey, a: int, c: Ciphertext) -> Ciphertext:
    """a ⊗ Enc(m) = Enc(a*m mod N) for a public scalar a in [0, N)."""
    _check_key(pk.fingerprint, c)
    _check_plaintext(pk, a)
    return Ciphertext(powmod(c.value, a, pk.n_squared), pk.fingerprint)


def rerandomize(pk: PublicKey, c: Ciphertext, rng: RandomSource | None = None, *, s: int | None = None) -> Ciphertext:
    """Multiply by a fresh s^N so the result looks like a fresh encryption."""
    _check_key(pk.fingerprint, c)
    if s is None:
        s = default_rng(rng).rand_unit(pk.n)
    return Ciphertext(c.value * powmod(s, pk.n, pk.n_squared) % pk.n_squared, pk.fingerprint)


def randomness_component(pk: PublicKey, c: Ciphertext, m: int) -> int:
    """c * (1+N)^-m mod N^2, i.e. the r^N factor of an encryption of m."""
    return c.value * ((1 - m * pk.n) % pk.n_squared) % pk.n_squared
