"""Four-round two-party chi-squared protocol.

Carol holds the class vector and the Paillier key; Felix holds the feature
vector. Felix learns nothing but ciphertexts; Carol learns the statistic and
a blinded count. Two blinding variants exist:

* multiplicative: Carol sees r*D and returns Enc(r^2 D^2 / XY), Enc(rD / Y);
* additive: Carol sees r+D and returns five ciphertexts from which Felix
  strips r with homomorphic linear combinations.

with X = B+D, Y = A+C. In both, Felix then evaluates

    chi2 = n^3/((A+B)(C+D)) * D^2/XY + n(C+D)/(A+B) * X/Y - 2n^2/(A+B) * D/Y

under encryption. Rationals live in Z_N as numerator * denominator^-1 and
Carol maps the decrypted residue back with rational reconstruction.

The functions here move typed messages only; ``run_session`` chains them in
process through their byte encodings.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, ClassVar, Sequence, Union

from securechi2.bigmod import Residue, decode_natural, encode_natural, encode_rational, invmod, reconstruct_rational
from securechi2.chi2core import binary_vector
from securechi2.errors import (
    DegenerateClassVector,
    DegenerateFeatureVector,
    KeyMismatch,
    KeyTooSmall,
    LengthMismatch,
    SecureChi2Error,
    UnexpectedMessage,
    WrongCiphertextCount,
)
from securechi2.paillier import (
    Ciphertext,
    PublicKey,
    SecretKey,
    decrypt,
    encrypt,
    encrypt_with_secret,
    hom_add,
    hom_scalar_mul,
    keygen,
    rerandomize,
)
from securechi2.rng import RandomSource, default_rng
from securechi2.transcript import RECEIVED, SENT, Transcript, utc_now


class BlindingVariant(enum.Enum):
    MULTIPLICATIVE = 1
    ADDITIVE = 2

    @property
    def short_name(self) -> str:
        return {BlindingVariant.MULTIPLICATIVE: "mult", BlindingVariant.ADDITIVE: "add"}[self]

    @classmethod
    def from_name(cls, name: str) -> "BlindingVariant":
        for v in cls:
            if name in (v.short_name, v.name.lower()):
                return v
        raise ValueError(f"unknown blinding variant {name!r}")

    @property
    def round3_size(self) -> int:
        return 2 if self is BlindingVariant.MULTIPLICATIVE else 5


DEFAULT_VARIANT = BlindingVariant.ADDITIVE


def check_key_size(n_records: int, modulus: int) -> None:
    """Require n^9 < N so the statistic survives rational reconstruction."""
    if n_records**9 >= modulus:
        raise KeyTooSmall(f"n={n_records} needs a modulus above n^9 ({modulus.bit_length()}-bit given)")


def reconstruction_bounds(n_records: int) -> tuple[int, int]:
    """Numerator and denominator bounds for a 2x2 chi-squared over n records.

    |AD - BC| <= n^2/4 and each pair of marginals multiplies to at most n^2/4.
    """
    return max(1, n_records**5 // 16), max(1, n_records**4 // 16)


# --------------------------------------------------------------------------
# messages


def _pack_ciphertexts(cts: Sequence[Ciphertext]) -> bytes:
    return struct.pack("!I", len(cts)) + b"".join(c.to_bytes() for c in cts)


def _unpack_ciphertexts(buf: bytes, offset: int) -> tuple[tuple[Ciphertext, ...], int]:
    if len(buf) - offset < 4:
        raise ValueError("truncated sequence count")
    (count,) = struct.unpack_from("!I", buf, offset)
    offset += 4
    out = []
    for _ in range(count):
        c, offset = Ciphertext.from_bytes(buf, offset)
        out.append(c)
    return tuple(out), offset


@dataclass(frozen=True)
class Round1Message:
    round: ClassVar[int] = 1
    variant: BlindingVariant
    pk: PublicKey
    n: int
    encrypted_labels: tuple[Ciphertext, ...]
    encrypted_ratio: Ciphertext

    def _body(self) -> bytes:
        return (
            self.pk.to_bytes()
            + encode_natural(self.n)
            + _pack_ciphertexts(self.encrypted_labels)
            + self.encrypted_ratio.to_bytes()
        )

    @classmethod
    def _parse(cls, variant, buf, offset):
        pk, offset = PublicKey.from_bytes(buf, offset)
        n, offset = decode_natural(buf, offset)
        labels, offset = _unpack_ciphertexts(buf, offset)
        ratio, offset = Ciphertext.from_bytes(buf, offset)
        return cls(variant, pk, n, labels, ratio), offset


@dataclass(frozen=True)
class Round2Message:
    round: ClassVar[int] = 2
    variant: BlindingVariant
    blinded_d: Ciphertext

    def _body(self) -> bytes:
        return self.blinded_d.to_bytes()

    @classmethod
    def _parse(cls, variant, buf, offset):
        c, offset = Ciphertext.from_bytes(buf, offset)
        return cls(variant, c), offset


@dataclass(frozen=True)
class Round3Message:
    round: ClassVar[int] = 3
    variant: BlindingVariant
    ciphertexts: tuple[Ciphertext, ...]

    def _body(self) -> bytes:
        return _pack_ciphertexts(self.ciphertexts)

    @classmethod
    def _parse(cls, variant, buf, offset):
        cts, offset = _unpack_ciphertexts(buf, offset)
        return cls(variant, cts), offset


@dataclass(frozen=True)
class Round4Message:
    round: ClassVar[int] = 4
    variant: BlindingVariant
    encrypted_chi2: Ciphertext

    def _body(self) -> bytes:
        return self.encrypted_chi2.to_bytes()

    @classmethod
    def _parse(cls, variant, buf, offset):
        c, offset = Ciphertext.from_bytes(buf, offset)
        return cls(variant, c), offset


ProtocolMessage = Union[Round1Message, Round2Message, Round3Message, Round4Message]
_MESSAGE_TYPES = {cls.round: cls for cls in (Round1Message, Round2Message, Round3Message, Round4Message)}


def encode_message(msg: ProtocolMessage) -> bytes:
    """1-byte message type, 1-byte variant, then the fields in order."""
    return bytes([msg.round, msg.variant.value]) + msg._body()


def decode_message(data: bytes) -> ProtocolMessage:
    if len(data) < 2:
        raise UnexpectedMessage("message shorter than its header")
    cls = _MESSAGE_TYPES.get(data[0])
    if cls is None:
        raise UnexpectedMessage(f"unknown message type {data[0]}")
    try:
        variant = BlindingVariant(data[1])
        msg, end = cls._parse(variant, data, 2)
    except ValueError as exc:
        raise UnexpectedMessage(f"malformed round-{cls.round} message: {exc}") from exc
    if end != len(data):
        raise UnexpectedMessage(f"{len(data) - end} trailing bytes after round-{cls.round} message")
    return msg


# --------------------------------------------------------------------------
# Carol


@dataclass
class CarolState:
    sk: SecretKey
    variant: BlindingVariant
    n: int
    labelled: int  # B+D
    unlabelled: int  # A+C
    rng: RandomSource = field(repr=False)
    nonce: str = ""
    stage: int = 1  # next round Carol acts in: 3, then 4 (finish), then 5 (done)

    @property
    def pk(self) -> PublicKey:
        return self.sk.public_key


def _expect_stage(actual: int, wanted: int, what: str):
    if actual != wanted:
        raise UnexpectedMessage(f"{what} called out of order")


def carol_round1(
    c: Sequence[int],
    k: int = 1024,
    variant: BlindingVariant = DEFAULT_VARIANT,
    rng: RandomSource | None = None,
    *,
    keypair: tuple[PublicKey, SecretKey] | None = None,
) -> tuple[CarolState, Round1Message]:
    """Generate (or reuse) a key and send the encrypted labels.

    ``k`` is the bit length of each prime. Marginals are checked before any
    key material or ciphertext exists.
    """
    c = binary_vector(c)
    n = len(c)
    labelled = sum(c)
    unlabelled = n - labelled
    if labelled == 0 or unlabelled == 0:
        raise DegenerateClassVector("class vector has a zero marginal", round=1)
    rng = default_rng(rng)
    pk, sk = keypair if keypair is not None else keygen(k, rng)
    check_key_size(n, pk.n)

    labels = tuple(encrypt_with_secret(sk, ci, rng) for ci in c)
    ratio = encode_rational(Fraction(labelled, unlabelled), pk.n)
    st = CarolState(sk, variant, n, labelled, unlabelled, rng, nonce=rng.randbytes(16).hex(), stage=3)
    msg = Round1Message(variant, pk, n, labels, encrypt_with_secret(sk, ratio.value, rng))
    return st, msg


def carol_round3(st: CarolState, m2: Round2Message) -> Round3Message:
    """Decrypt the blinded count and return the variant's ciphertext tuple."""
    _expect_stage(st.stage, 3, "carol_round3")
    N = st.pk.n
    x = decrypt(st.sk, m2.blinded_d)  # r*D or r+D
    inv_xy = invmod(st.labelled * st.unlabelled, N)
    inv_y = invmod(st.unlabelled, N)
    if st.variant is BlindingVariant.MULTIPLICATIVE:
        plain = [x * x % N * inv_xy % N, x * inv_y % N]
    else:
        plain = [x * x % N * inv_xy % N, x * inv_xy % N, x * inv_y % N, inv_xy, inv_y]
    st.stage = 4
    return Round3Message(st.variant, tuple(encrypt_with_secret(st.sk, v, st.rng) for v in plain))


def carol_finish(st: CarolState, m4: Round4Message) -> Fraction:
    _expect_stage(st.stage, 4, "carol_finish")
    residue = Residue(decrypt(st.sk, m4.encrypted_chi2), st.pk.n)
    num_bound, den_bound = reconstruction_bounds(st.n)
    st.stage = 5
    return reconstruct_rational(residue, num_bound, den_bound)


# --------------------------------------------------------------------------
# Felix


@dataclass
class FelixState:
    f: tuple[int, ...]
    pk: PublicKey
    variant: BlindingVariant
    r: int = field(repr=False)
    featured: int  # C+D
    unfeatured: int  # A+B
    encrypted_ratio: Ciphertext = field(repr=False)
    rng: RandomSource = field(repr=False)
    stage: int = 4

    @property
    def n(self) -> int:
        return len(self.f)


def encrypted_overlap(pk: PublicKey, f: Sequence[int], encrypted_labels: Sequence[Ciphertext]) -> Ciphertext:
    """Enc(sum f_i c_i) = Enc(D), skipping the f_i = 0 terms."""
    acc = None
    for fi, ci in zip(f, encrypted_labels):
        if fi:
            acc = ci if acc is None else hom_add(pk, acc, ci)
    if acc is None:
        return encrypt(pk, 0, r=1)
    return acc


def blind(
    pk: PublicKey,
    enc_d: Ciphertext,
    variant: BlindingVariant,
    rng: RandomSource,
    r: int | None = None,
) -> tuple[int, Ciphertext]:
    """Mask Enc(D) as Enc(rD) or Enc(r + D); returns (r, fresh-looking ciphertext).

    Multiplicative blinding samples r from Z*_N since Felix later needs r^-1.
    The additive variant adds a fresh Enc(r), whose randomness already
    re-randomizes the sum.
    """
    if variant is BlindingVariant.MULTIPLICATIVE:
        if r is None:
            r = rng.rand_unit(pk.n)
        invmod(r, pk.n)
        return r, rerandomize(pk, hom_scalar_mul(pk, r, enc_d), rng)
    if r is None:
        r = rng.randbelow(pk.n)
    return r, hom_add(pk, encrypt(pk, r, rng), enc_d)


def felix_round2(
    f: Sequence[int],
    m1: Round1Message,
    rng: RandomSource | None = None,
    *,
    r: int | None = None,
    variant: BlindingVariant | None = None,
) -> tuple[FelixState, Round2Message]:
    """Compute Enc(D) from the encrypted labels and send it blinded.

    ``r`` forces the blinding value (tests only). ``variant`` overrides the
    one in Carol's header, which only a misconfigured peer would do.
    """
    f = binary_vector(f)
    pk = m1.pk
    if len(f) != m1.n or len(m1.encrypted_labels) != m1.n:
        raise LengthMismatch(f"feature vector has {len(f)} records, Carol announced {m1.n}", round=2)
    if any(c.key_fingerprint != pk.fingerprint for c in (*m1.encrypted_labels, m1.encrypted_ratio)):
        raise KeyMismatch("round-1 ciphertext under a foreign key", round=2)
    featured = sum(f)
    unfeatured = len(f) - featured
    if featured == 0 or unfeatured == 0:
        raise DegenerateFeatureVector("feature vector has a zero marginal", round=2)
    check_key_size(len(f), pk.n)

    rng = default_rng(rng)
    variant = variant or m1.variant
    r, blinded = blind(pk, encrypted_overlap(pk, f, m1.encrypted_labels), variant, rng, r)
    st = FelixState(f, pk, variant, r, featured, unfeatured, m1.encrypted_ratio, rng)
    return st, Round2Message(variant, blinded)


def felix_round4(st: FelixState, m3: Round3Message) -> Round4Message:
    """Strip the blinding and evaluate the three-term sum under encryption."""
    _expect_stage(st.stage, 4, "felix_round4")
    pk, N, r = st.pk, st.pk.n, st.r
    cts = m3.ciphertexts
    if len(cts) != st.variant.round3_size:
        raise WrongCiphertextCount(
            f"{st.variant.short_name} blinding expects {st.variant.round3_size} ciphertexts, got {len(cts)}",
            round=4,
        )
    if any(c.key_fingerprint != pk.fingerprint for c in cts):
        raise KeyMismatch("round-3 ciphertext under a foreign key", round=4)

    def mul(q, c):
        return hom_scalar_mul(pk, encode_rational(q, N).value, c)

    if st.variant is BlindingVariant.MULTIPLICATIVE:
        r_inv = invmod(r, N)
        enc_d2 = hom_scalar_mul(pk, r_inv * r_inv % N, cts[0])  # D^2 / XY
        enc_d = hom_scalar_mul(pk, r_inv, cts[1])  # D / Y
    else:
        enc_d2 = hom_add(pk, cts[0], hom_scalar_mul(pk, r * r % N, cts[3]))
        enc_d2 = hom_add(pk, enc_d2, hom_scalar_mul(pk, -2 * r % N, cts[1]))
        enc_d = hom_add(pk, cts[2], hom_scalar_mul(pk, -r % N, cts[4]))

    n, cd, ab = st.n, st.featured, st.unfeatured
    total = mul(Fraction(n**3, ab * cd), enc_d2)
    total = hom_add(pk, total, mul(Fraction(n * cd, ab), st.encrypted_ratio))
    total = hom_add(pk, total, mul(Fraction(-2 * n * n, ab), enc_d))
    st.stage = 5
    return Round4Message(st.variant, rerandomize(pk, total, st.rng))


# --------------------------------------------------------------------------
# in-process driver


def run_session(
    c: Sequence[int],
    f: Sequence[int],
    variant: BlindingVariant = DEFAULT_VARIANT,
    k: int = 1024,
    rng: RandomSource | None = None,
    *,
    keypair: tuple[PublicKey, SecretKey] | None = None,
    felix_variant: BlindingVariant | None = None,
    clock: Callable[[], str] = utc_now,
) -> tuple[Fraction, Transcript, Transcript]:
    """Run all four rounds through their byte encodings.

    Returns Carol's statistic and both parties' transcripts. Errors propagate
    with ``.round`` set to the round that failed.
    """
    rng = default_rng(rng)
    carol_rng, felix_rng = rng.spawn("carol"), rng.spawn("felix")
    carol_t, felix_t = Transcript("carol", clock=clock), Transcript("felix", clock=clock)

    def send(msg, sender, receiver):
        data = encode_message(msg)
        sender.record(SENT, msg.round, data)
        receiver.record(RECEIVED, msg.round, data)
        return decode_message(data)

    current = 1
    try:
        carol, m1 = carol_round1(c, k, variant, carol_rng, keypair=keypair)
        m1 = send(m1, carol_t, felix_t)
        current = 2
        felix, m2 = felix_round2(f, m1, felix_rng, variant=felix_variant)
        m2 = send(m2, felix_t, carol_t)
        current = 3
        m3 = send(carol_round3(carol, m2), carol_t, felix_t)
        current = 4
        m4 = send(felix_round4(felix, m3), felix_t, carol_t)
        chi2 = carol_finish(carol, m4)
    except SecureChi2Error as exc:
        if exc.round is None:
            exc.round = current
        for t in (carol_t, felix_t):
            t.outcome = f"aborted:{exc.code}:round{exc.round}"
        raise
    finally:
        carol_t.randomness_digest = carol_rng.digest()
        felix_t.randomness_digest = felix_rng.digest()
    carol_t.outcome = felix_t.outcome = "completed"
    return chi2, carol_t, felix_t
