"""Check every non-degenerate (f, c) with n <= --max-n against the chi2 oracle.

    python scripts/exhaustive_equivalence.py --max-n 6 --variant both
"""

import argparse
import time

from securechi2.protocol import BlindingVariant
from securechi2.verify import count_pairs, exhaustive_equivalence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=10)
    ap.add_argument("--variant", choices=["mult", "add", "both"], default="both")
    ap.add_argument("--workers", type=int, help="processes (default: all CPUs)")
    args = ap.parse_args()
    variants = list(BlindingVariant) if args.variant == "both" else [BlindingVariant.from_name(args.variant)]
    print(f"{count_pairs(args.max_n)} pairs per variant")
    failed = False
    for v in variants:
        t0 = time.perf_counter()
        res = exhaustive_equivalence(args.max_n, v, workers=args.workers)
        print(f"{v.short_name}: checked {res.checked}, mismatches {len(res.mismatches)}, "
              f"{time.perf_counter() - t0:.1f}s")
        for c, f, got, want in res.mismatches[:5]:
            print(f"  c={c} f={f} protocol={got} oracle={want}")
        failed |= bool(res.mismatches)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
