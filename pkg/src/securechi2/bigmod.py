"""Modular arithmetic on arbitrary-precision integers.

Plain Python ``int`` plays the role of a natural number and
``fractions.Fraction`` the role of a reduced rational. ``Residue`` pins a value
to its modulus for the public API; the hot paths in the cryptosystem call the
int-level ``powmod``/``invmod`` directly.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from securechi2.errors import NotInvertible, ReconstructionFailed

__all__ = [
    "Residue",
    "decode_natural",
    "encode_natural",
    "encode_rational",
    "invmod",
    "mod_inverse",
    "mod_pow",
    "natural_from_bytes",
    "natural_to_bytes",
    "powmod",
    "reconstruct_rational",
]


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} outside [0, {self.modulus})")

    def __int__(self):
        return self.value


def powmod(base: int, exponent: int, modulus: int) -> int:
    if exponent < 0:
        raise ValueError("negative exponent; invert first")
    return int(gmpy2.powmod(base, exponent, modulus))


def invmod(x: int, modulus: int) -> int:
    x %= modulus
    if math.gcd(x, modulus) != 1:
        raise NotInvertible(f"{x} is not invertible mod {modulus}")
    return int(gmpy2.invert(x, modulus))


def mod_pow(base: Residue, exponent: int) -> Residue:
    return Residue(powmod(base.value, exponent, base.modulus), base.modulus)


def mod_inverse(x: Residue) -> Residue:
    return Residue(invmod(x.value, x.modulus), x.modulus)


def encode_rational(q: Fraction | int, modulus: int) -> Residue:
    """Map a rational into Z_modulus as numerator * denominator^-1."""
    q = Fraction(q)
    return Residue(q.numerator * invmod(q.denominator, modulus) % modulus, modulus)


def reconstruct_rational(
    x: Residue,
    numerator_bound: int | None = None,
    denominator_bound: int | None = None,
) -> Fraction:
    """Recover a/b with a ≡ x·b (mod m), |a| <= numerator_bound, 0 < b <= denominator_bound.

    Both bounds default to floor(sqrt(m/2)). The answer is unique whenever
    2 * numerator_bound * denominator_bound < m; callers passing custom bounds
    are responsible for that.
    """
    m = x.modulus
    default = math.isqrt(m // 2)
    nb = default if numerator_bound is None else numerator_bound
    db = default if denominator_bound is None else denominator_bound

    # extended Euclid on (m, x), tracking the cofactor of x only
    r0, r1 = m, x.value
    t0, t1 = 0, 1
    while r1 > nb:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    a, b = r1, t1
    if b < 0:
        a, b = -a, -b
    if b == 0 or b > db or math.gcd(a, b) != 1 or math.gcd(b, m) != 1:
        raise ReconstructionFailed(f"no rational within bounds for residue mod {m.bit_length()}-bit modulus")
    return Fraction(a, b)


def natural_to_bytes(x: int) -> bytes:
    """Canonical big-endian magnitude: no leading zero byte, zero is empty."""
    if x < 0:
        raise ValueError("naturals are non-negative")
    return x.to_bytes((x.bit_length() + 7) // 8, "big")


def natural_from_bytes(data: bytes) -> int:
    if data[:1] == b"\x00":
        raise ValueError("non-canonical encoding (leading zero byte)")
    return int.from_bytes(data, "big")


def encode_natural(x: int) -> bytes:
    """Wire form: 4-byte big-endian length, then the canonical magnitude."""
    body = natural_to_bytes(x)
    return struct.pack("!I", len(body)) + body


def decode_natural(buf: bytes, offset: int = 0) -> tuple[int, int]:
    """Parse one wire-encoded natural at ``offset``; returns (value, next offset)."""
    if len(buf) - offset < 4:
        raise ValueError("truncated length prefix")
    (length,) = struct.unpack_from("!I", buf, offset)
    start = offset + 4
    end = start + length
    if end > len(buf):
        raise ValueError("truncated natural")
    return natural_from_bytes(buf[start:end]), end
