"""Command-line entry point.

    securechi2 carol --listen 127.0.0.1:9000 --input labels.csv
    securechi2 felix --connect 127.0.0.1:9000 --input feature.csv
    securechi2 local --carol-input labels.csv --felix-input feature.csv
    securechi2 keygen-bench --key-bits 512 1024

Exit status: 0 success, 2 data error, 3 protocol abort, 4 transport error.
"""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
import time
from pathlib import Path

from securechi2.errors import DataError, PeerAbort, SecureChi2Error, TransportError
from securechi2.paillier import keygen
from securechi2.protocol import DEFAULT_VARIANT, BlindingVariant
from securechi2.rng import RandomSource
from securechi2.session import SessionConfig, parse_endpoint, run_local, serve_session

EXIT_OK, EXIT_DATA, EXIT_PROTOCOL, EXIT_TRANSPORT = 0, 2, 3, 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, PeerAbort):
        return EXIT_PROTOCOL
    if isinstance(exc, (TransportError, OSError)):
        return EXIT_TRANSPORT
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_PROTOCOL


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=["mult", "add"], default=DEFAULT_VARIANT.short_name)
    p.add_argument("--key-bits", type=int, default=1024, help="modulus size in bits")
    p.add_argument("--id-column", default="id")
    p.add_argument("--value-column", default="value")
    p.add_argument("--transcript", type=Path)
    p.add_argument("--seed", help="hex seed for deterministic runs (testing only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="securechi2", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for role in ("carol", "felix"):
        p = sub.add_parser(role, help=f"run the {role} side over TCP")
        where = p.add_mutually_exclusive_group(required=True)
        where.add_argument("--listen", metavar="HOST:PORT", type=parse_endpoint)
        where.add_argument("--connect", metavar="HOST:PORT", type=parse_endpoint)
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--timeout", type=float, default=300.0)
        _add_common(p)

    p = sub.add_parser("local", help="run both parties in one process")
    p.add_argument("--carol-input", type=Path, required=True)
    p.add_argument("--felix-input", type=Path, required=True)
    p.add_argument("--felix-value-column")
    _add_common(p)

    p = sub.add_parser("keygen-bench", help="time key generation")
    p.add_argument("--key-bits", type=int, nargs="+", default=[512, 1024])
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed")
    return parser


def _keygen_bench(args) -> int:
    rng = RandomSource.from_hex(args.seed)
    for bits in args.key_bits:
        times = []
        for _ in range(args.trials):
            t0 = time.perf_counter()
            keygen(bits // 2, rng)
            times.append(time.perf_counter() - t0)
        print(json.dumps({"key_bits": bits, "trials": args.trials,
                          "median_s": round(statistics.median(times), 4), "max_s": round(max(times), 4)}))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "keygen-bench":
        return _keygen_bench(args)
    if args.seed is not None:
        logging.warning("--seed given: randomness is deterministic, do not use outside testing")
    variant = BlindingVariant.from_name(args.variant)
    try:
        if args.command == "local":
            report = run_local(
                args.carol_input, args.felix_input, variant, args.key_bits,
                id_column=args.id_column, value_column=args.value_column,
                felix_value_column=args.felix_value_column, transcript_path=args.transcript, seed=args.seed,
            )
        else:
            cfg = SessionConfig(
                role=args.command, input_path=args.input, variant=variant, key_bits=args.key_bits,
                listen=args.listen, connect=args.connect, id_column=args.id_column,
                value_column=args.value_column, transcript_path=args.transcript, seed=args.seed,
                timeout=args.timeout,
            )
            report = serve_session(cfg)
    except (SecureChi2Error, OSError) as exc:
        code = getattr(exc, "error_code", None) or getattr(exc, "code", type(exc).__name__)
        print(json.dumps({"status": "error", "error": code, "round": getattr(exc, "round", None),
                          "detail": str(exc)}), file=sys.stderr)
        return exit_code_for(exc)
    except ValueError as exc:
        print(json.dumps({"status": "error", "error": "ConfigError", "detail": str(exc)}), file=sys.stderr)
        return EXIT_DATA
    print(json.dumps(report.to_dict()))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
