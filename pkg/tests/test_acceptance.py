"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import random
import time
from fractions import Fraction
from math import isqrt
from pathlib import Path

import pytest
from scipy.stats import ks_2samp

from test_runner import configs, run_pair, write_csv
from securechi2.bigmod import encode_rational, reconstruct_rational
from securechi2.chi2core import (
    ConfidenceLevel,
    ContingencyTable,
    build_table,
    chi2_decomposed,
    chi2_exact,
    confidence,
)
from securechi2.errors import DegenerateClassVector, DegenerateFeatureVector, PeerAbort
from securechi2.paillier import decrypt, encrypt, hom_add, hom_scalar_mul, keygen, rerandomize
from securechi2.protocol import BlindingVariant, blind, run_session
from securechi2.rng import RandomSource
from securechi2.verify import count_pairs, exhaustive_equivalence

REFERENCE_DOC = Path(__file__).resolve().parents[1] / "paper.md"
VARIANTS = list(BlindingVariant)


@pytest.mark.slow
def test_exhaustive_equivalence(criterion):
    expected = count_pairs(10)
    summary, ok = [], True
    for variant in VARIANTS:
        t0 = time.perf_counter()
        res = exhaustive_equivalence(10, variant)
        elapsed = time.perf_counter() - t0
        summary.append(f"{variant.short_name}: {res.checked} pairs, {len(res.mismatches)} mismatches, {elapsed:.0f}s")
        ok &= res.checked == expected and not res.mismatches
    criterion(1, "exhaustive oracle equivalence n<=10", ok, "; ".join(summary))
    assert ok


def _random_pair(rnd):
    n = rnd.randint(11, 500)
    while True:
        c = [rnd.randint(0, 1) for _ in range(n)]
        f = [rnd.randint(0, 1) for _ in range(n)]
        if 0 < sum(c) < n and 0 < sum(f) < n:
            return c, f


@pytest.mark.slow
def test_randomized_equivalence(criterion):
    rnd = random.Random(20261014)
    pairs = [_random_pair(rnd) for _ in range(100)]
    key_rng = RandomSource(b"criterion 2 keys")
    rng = RandomSource(b"criterion 2 sessions")
    sessions = mismatches = keys = 0
    keypair = None
    for variant in VARIANTS:
        for c, f in pairs:
            if sessions % 10 == 0:
                keypair = keygen(256, key_rng)
                keys += 1
            got, _, _ = run_session(c, f, variant, 256, rng, keypair=keypair)
            mismatches += got != chi2_exact(build_table(f, c))
            sessions += 1
    ok = mismatches == 0 and sessions == 200
    criterion(2, "randomized oracle equivalence n in [11,500]", ok,
              f"{sessions} sessions, {keys} keys, {mismatches} mismatches")
    assert ok


def test_decomposition_identity(criterion):
    checked = bad = 0
    for n in range(1, 13):
        for a in range(n + 1):
            for b in range(n - a + 1):
                for c in range(n - a - b + 1):
                    t = ContingencyTable(a, b, c, n - a - b - c)
                    if 0 in t.marginals().values():
                        continue
                    checked += 1
                    bad += chi2_decomposed(t) != chi2_exact(t)
    rnd = random.Random(3)
    for _ in range(10_000):
        t = ContingencyTable(*(rnd.randint(1, 10 ** rnd.randint(1, 9)) for _ in range(4)))
        checked += 1
        bad += chi2_decomposed(t) != chi2_exact(t)
    ok = bad == 0
    criterion(3, "decomposition identity", ok, f"{checked} tables, {bad} differ")
    assert ok


def test_homomorphism_suite(criterion, key512):
    pk, sk = key512
    rnd = random.Random(4)
    rng = RandomSource(b"criterion 4")
    N = pk.n
    add_bad = mul_bad = rr_bad = 0
    for _ in range(1000):
        m1, m2 = rnd.randrange(N), rnd.randrange(N)
        add_bad += decrypt(sk, hom_add(pk, encrypt(pk, m1, rng), encrypt(pk, m2, rng))) != (m1 + m2) % N
    for _ in range(1000):
        a, m = rnd.randrange(N), rnd.randrange(N)
        mul_bad += decrypt(sk, hom_scalar_mul(pk, a, encrypt(pk, m, rng))) != (a * m) % N
    for _ in range(100):
        m = rnd.randrange(N)
        c = encrypt(pk, m, rng)
        c2 = rerandomize(pk, c, rng)
        rr_bad += decrypt(sk, c2) != m or c2.value == c.value
    ok = add_bad == mul_bad == rr_bad == 0
    criterion(4, "homomorphism suite", ok, f"add {add_bad}/1000, scalar {mul_bad}/1000, rerandomize {rr_bad}/100 wrong")
    assert ok


TABLE = [
    ("10.83", "99.9", ConfidenceLevel.P99_9),
    ("7.88", "99.5", ConfidenceLevel.P99_5),
    ("6.63", "99", ConfidenceLevel.P99),
    ("3.84", "95", ConfidenceLevel.P95),
    ("2.71", "90", ConfidenceLevel.P90),
]


def test_confidence_mapping(criterion):
    # the reference table is checked against the source document when present
    rows = [line for line in REFERENCE_DOC.read_text(encoding="utf-8").splitlines() if line.startswith("&")] \
        if REFERENCE_DOC.exists() else None
    problems = []
    for value, pct, level in TABLE:
        if rows is not None and not any(f"& {value}" in r and f"& {pct}\\%" in r for r in rows):
            problems.append(f"row {value} / {pct}% not in reference table")
        if confidence(Fraction(value)) is not level or level.threshold != Fraction(value):
            problems.append(f"{value} -> {confidence(Fraction(value))}")
        if confidence(Fraction(value) - Fraction(1, 10 ** 9)) >= level:
            problems.append(f"just below {value} earns {level}")
    probe = confidence(Fraction("2.70"))
    if probe is not ConfidenceLevel.BELOW_90:
        problems.append(f"2.70 -> {probe}")
    ok = not problems
    criterion(5, "confidence mapping of the threshold table", ok,
              "5 thresholds + probe 2.70" if ok else "; ".join(problems))
    assert ok


def test_additive_blinding_indistinguishable(criterion, key512):
    pk, sk = key512
    n = 100
    samples = {}
    for d in (0, n):
        rng = RandomSource(b"criterion 6 D=%d" % d)
        enc_d = encrypt(pk, d, rng)
        samples[d] = [decrypt(sk, blind(pk, enc_d, BlindingVariant.ADDITIVE, rng)[1]) / pk.n for _ in range(2000)]
    p = ks_2samp(samples[0], samples[n]).pvalue
    ok = p > 0.01
    criterion(6, "additive blinding indistinguishability (KS)", ok, f"p = {p:.4f}, 2000 trials each for D=0 and D={n}")
    assert ok


def test_four_protocol_frames(criterion, tmp_path):
    rows = [(f"r{i}", i % 2) for i in range(9)]
    carol = write_csv(tmp_path / "c.csv", rows)
    felix = write_csv(tmp_path / "f.csv", [(r, (i // 2) % 2) for i, (r, _) in enumerate(rows)])
    counts = []
    for variant in VARIANTS:
        c_cfg, f_cfg = configs(carol, felix, variant=variant)
        results, proxy = run_pair(c_cfg, f_cfg, proxy_to=c_cfg.listen)
        assert results["carol"].chi2 is not None
        counts.append(len(proxy.protocol_frames()))
    ok = counts == [4, 4]
    criterion(7, "four protocol frames per session", ok, f"mult {counts[0]}, add {counts[1]}")
    assert ok


def test_rational_reconstruction(criterion, key512):
    N = key512[0].n
    bound = isqrt(N // 2)
    rnd = random.Random(8)
    bad = 0
    for _ in range(1000):
        a = rnd.randint(-bound, bound)
        b = rnd.randint(1, bound)
        bad += reconstruct_rational(encode_rational(Fraction(a, b), N)) != Fraction(a, b)
    ok = bad == 0
    criterion(8, "rational reconstruction round trip", ok, f"{N.bit_length()}-bit N, {bad}/1000 wrong")
    assert ok


def test_degenerate_handling(criterion, tmp_path):
    problems = []
    ids = [f"r{i}" for i in range(6)]
    mixed = [0, 1, 1, 0, 1, 0]
    for bit in (0, 1):
        carol = write_csv(tmp_path / f"c{bit}.csv", [(i, bit) for i in ids])
        felix = write_csv(tmp_path / f"fmix{bit}.csv", zip(ids, mixed))
        c_cfg, f_cfg = configs(carol, felix)
        results, proxy = run_pair(c_cfg, f_cfg, proxy_to=c_cfg.listen)
        if not isinstance(results["carol"], DegenerateClassVector):
            problems.append(f"class all-{bit}: carol got {results['carol']!r}")
        if proxy.protocol_frames():
            problems.append(f"class all-{bit}: {len(proxy.protocol_frames())} protocol frames sent")

        carol = write_csv(tmp_path / f"cmix{bit}.csv", zip(ids, mixed))
        felix = write_csv(tmp_path / f"f{bit}.csv", [(i, bit) for i in ids])
        c_cfg, f_cfg = configs(carol, felix)
        results, proxy = run_pair(c_cfg, f_cfg, proxy_to=c_cfg.listen)
        peer = results["carol"]
        if not (isinstance(peer, PeerAbort) and peer.round == 2 and peer.error_code == "DegenerateFeatureVector"):
            problems.append(f"feature all-{bit}: carol got {peer!r}")
        if not isinstance(results["felix"], DegenerateFeatureVector):
            problems.append(f"feature all-{bit}: felix got {results['felix']!r}")
        if [k for _, k, _ in proxy.protocol_frames()] != ["round1"]:
            problems.append(f"feature all-{bit}: frames {proxy.protocol_frames()}")
    ok = not problems
    criterion(9, "degenerate vectors abort at the right round", ok,
              "class: no ciphertext sent; feature: round-2 DegenerateFeatureVector" if ok else "; ".join(problems))
    assert ok
