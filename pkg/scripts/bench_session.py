"""Time whole in-process sessions for a few record counts and key sizes.

    python scripts/bench_session.py --n 10 100 1000 --key-bits 512 1024
"""

import argparse
import json
import random
import statistics
import time

from securechi2.paillier import keygen
from securechi2.protocol import BlindingVariant, run_session
from securechi2.rng import RandomSource


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000])
    ap.add_argument("--key-bits", type=int, nargs="+", default=[512, 1024])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    rnd = random.Random(0)
    rng = RandomSource(b"bench")
    for bits in args.key_bits:
        keypair = keygen(bits // 2, rng)
        for n in args.n:
            c = [i % 2 for i in range(n)]
            f = [rnd.randint(0, 1) for _ in range(n - 2)] + [0, 1]
            for variant in BlindingVariant:
                times = []
                for _ in range(args.repeats):
                    t0 = time.perf_counter()
                    run_session(c, f, variant, bits // 2, rng, keypair=keypair)
                    times.append(time.perf_counter() - t0)
                print(json.dumps({"key_bits": bits, "n": n, "variant": variant.short_name,
                                  "median_s": round(statistics.median(times), 5)}))


if __name__ == "__main__":
    main()
