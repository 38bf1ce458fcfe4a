"""Compare decrypted Round-2 plaintexts for two overlap values D.

Additive blinding should look uniform regardless of D. Multiplicative
blinding reveals D = 0 outright (the blinded value is 0), which this script
makes visible.

    python scripts/blinding_distribution.py --trials 2000 --d 0 100
"""

import argparse

from scipy.stats import ks_2samp

from securechi2.paillier import decrypt, encrypt, keygen
from securechi2.protocol import BlindingVariant, blind
from securechi2.rng import RandomSource


def samples(pk, sk, d, variant, trials, rng):
    enc_d = encrypt(pk, d, rng)
    return [decrypt(sk, blind(pk, enc_d, variant, rng)[1]) / pk.n for _ in range(trials)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--d", type=int, nargs=2, default=[0, 100], metavar=("D1", "D2"))
    ap.add_argument("--key-bits", type=int, default=512)
    ap.add_argument("--seed", default="626c696e64")
    args = ap.parse_args()
    rng = RandomSource.from_hex(args.seed)
    pk, sk = keygen(args.key_bits // 2, rng)
    for variant in BlindingVariant:
        a, b = (samples(pk, sk, d, variant, args.trials, rng) for d in args.d)
        res = ks_2samp(a, b)
        zeros = [sum(x == 0 for x in s) for s in (a, b)]
        print(f"{variant.short_name}: KS statistic {res.statistic:.4f}, p = {res.pvalue:.4g}, "
              f"zero plaintexts {zeros[0]}/{zeros[1]}")


if __name__ == "__main__":
    main()
