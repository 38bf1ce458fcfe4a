"""Oracle cross-checks that drive whole protocol sessions.

Used by the acceptance suite and by ``scripts/exhaustive_equivalence.py``.
Work is split by (n, class vector) and spread over processes when more than
one CPU is available; every pair is still a full four-round session.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from securechi2.chi2core import build_table, chi2_exact
from securechi2.paillier import PublicKey, SecretKey, keygen
from securechi2.protocol import BlindingVariant, run_session
from securechi2.rng import RandomSource

FIXED_KEY_SEED = b"exhaustive oracle key"
_worker_key: tuple[PublicKey, SecretKey] | None = None


def fixed_key(prime_bits: int = 256) -> tuple[PublicKey, SecretKey]:
    return keygen(prime_bits, RandomSource(FIXED_KEY_SEED))


def bits_to_vector(bits: int, n: int) -> tuple[int, ...]:
    return tuple((bits >> i) & 1 for i in range(n))


def non_degenerate_vectors(n: int) -> range:
    """Bit patterns of length n with at least one 0 and one 1."""
    return range(1, (1 << n) - 1)


def count_pairs(max_n: int) -> int:
    return sum(((1 << n) - 2) ** 2 for n in range(1, max_n + 1))


@dataclass
class EquivalenceResult:
    checked: int = 0
    mismatches: list = field(default_factory=list)

    def merge(self, other: "EquivalenceResult") -> None:
        self.checked += other.checked
        self.mismatches.extend(other.mismatches)


def _init_worker(prime_bits: int) -> None:
    global _worker_key
    _worker_key = fixed_key(prime_bits)


def _check_class_vector(task) -> EquivalenceResult:
    n, c_bits, variant_value, prime_bits = task
    keypair = _worker_key or fixed_key(prime_bits)
    variant = BlindingVariant(variant_value)
    rng = RandomSource(b"exhaustive/%d/%d/%d" % (n, c_bits, variant_value))
    c = bits_to_vector(c_bits, n)
    out = EquivalenceResult()
    for f_bits in non_degenerate_vectors(n):
        f = bits_to_vector(f_bits, n)
        got, _, _ = run_session(c, f, variant, prime_bits, rng, keypair=keypair)
        want = chi2_exact(build_table(f, c))
        out.checked += 1
        if got != want:
            out.mismatches.append((c, f, got, want))
    return out


def exhaustive_equivalence(
    max_n: int,
    variant: BlindingVariant,
    prime_bits: int = 256,
    workers: int | None = None,
) -> EquivalenceResult:
    """Run every non-degenerate (f, c) with n <= max_n and compare to the oracle."""
    tasks = [(n, c_bits, variant.value, prime_bits)
             for n in range(1, max_n + 1) for c_bits in non_degenerate_vectors(n)]
    workers = workers or os.cpu_count() or 1
    total = EquivalenceResult()
    if workers == 1:
        _init_worker(prime_bits)
        for task in tasks:
            total.merge(_check_class_vector(task))
        return total
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(prime_bits,)) as pool:
        for part in pool.map(_check_class_vector, tasks, chunksize=4):
            total.merge(part)
    return total
