"""Command line entry point.

Usage::

    fbmc-sim <experiment> [--config PATH] [--scheme identity|mulaw|uniform|linear|all]
             [--subcarriers K] [--symbols N] [--c C] [--cutoff A] [--mu MU]
             [--snr-db LIST] [--seed S] [--out PATH] ...

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import ConfigError, parse_config, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmc-sim",
        description="FBMC-OQAM companding Monte Carlo experiments (CSV output)",
    )
    parser.add_argument("experiment", choices=["ccdf", "ber", "psd", "table"])
    parser.add_argument("--config", help="flat key=value config file; flags override it")
    parser.add_argument("--scheme", help="identity|mulaw|uniform|linear|all (default all)")
    parser.add_argument("--subcarriers", type=int, help="number of subcarriers K")
    parser.add_argument("--symbols", type=int, help="total multicarrier symbols to simulate")
    parser.add_argument("--blocks", type=int, help="symbols per frame")
    parser.add_argument("--constellation", choices=["qpsk", "qam16"])
    parser.add_argument("--c", type=float, help="compander inflection scale (sigma units)")
    parser.add_argument("--cutoff", type=float, help="linear-pdf cutoff A_c (sigma units)")
    parser.add_argument("--mu", type=float, help="mu-law parameter")
    parser.add_argument("--sigma", type=float, help="fix sigma instead of per-frame estimation")
    parser.add_argument("--snr-db", help="SNR grid, comma list or start:stop:step")
    parser.add_argument("--gamma-db", help="PAPR threshold grid (dB), comma list or start:stop:step")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--min-errors", type=int, help="BER stop criterion")
    parser.add_argument("--max-bits", type=int, help="BER bit budget per point")
    parser.add_argument("--oversample", type=int, help="samples per period as a multiple of K")
    parser.add_argument("--workers", type=int, help="worker processes (results identical for any count)")
    parser.add_argument("--dump-iq", help="also dump one frame as raw little-endian float64 IQ")
    parser.add_argument("--out", help="output CSV path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "experiment": args.experiment,
        "scheme": args.scheme,
        "subcarriers": args.subcarriers,
        "symbols": args.symbols,
        "blocks": args.blocks,
        "constellation": args.constellation,
        "c": args.c,
        "cutoff": args.cutoff,
        "mu": args.mu,
        "sigma": args.sigma,
        "snr_db": args.snr_db,
        "gamma_db": args.gamma_db,
        "seed": args.seed,
        "min_errors": args.min_errors,
        "max_bits": args.max_bits,
        "oversample": args.oversample,
        "workers": args.workers,
        "dump_iq": args.dump_iq,
        "out": args.out,
    }
    try:
        config = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"fbmc-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        for path in run(config):
            print(path)
    except ConfigError as exc:
        print(f"fbmc-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced with a message, not a stack trace
        print(f"fbmc-sim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
