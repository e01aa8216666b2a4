"""Command line: ``run``, ``validate`` and ``converge``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigurationError, RemnantError
from .scenario import compare_exact_quasiclassical, run_scenario, validate, write_convergence_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _n0_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remnant",
        description="Entanglement between a laser mode and an electron wave packet.",
    )
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (default: ./out)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for time sweeps (output is identical)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="write the requested CSV files and a manifest")
    p_run.add_argument("config", type=Path)

    p_val = sub.add_parser("validate", help="run the invariant checks for a scenario")
    p_val.add_argument("config", type=Path)
    p_val.add_argument("--oracle", action="store_true",
                       help="also run the wavepacket oracle (slow for large q)")

    p_conv = sub.add_parser("converge", help="exact vs quasi-classical matrix elements")
    p_conv.add_argument("--n0", type=_n0_list, required=True, help="e.g. 100,1000,10000")
    p_conv.add_argument("--arg", type=float, required=True, help="fixed 2 sqrt(n0)|sigma|")

    # accept --out/--workers after the subcommand as well
    for p in (p_run, p_val, p_conv):
        p.add_argument("--out", type=Path, default=argparse.SUPPRESS)
        p.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    return parser


def _config_error(exc: ConfigurationError) -> int:
    print("configuration error:", file=sys.stderr)
    for v in exc.violations:
        print(f"  - {v}", file=sys.stderr)
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            summary = run_scenario(load_config(args.config), args.out, args.workers)
            for f in summary.files:
                print(f)
            print(summary.manifest_path)
            return EXIT_OK

        if args.command == "validate":
            cfg = load_config(args.config)
            report = validate(cfg, args.workers, oracle=True if args.oracle else None)
            for c in report.checks:
                print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
            return EXIT_OK if report.passed else EXIT_VALIDATION

        rows = compare_exact_quasiclassical(args.n0, args.arg)
        args.out.mkdir(parents=True, exist_ok=True)
        path = write_convergence_csv(rows, args.out / "convergence.csv")
        for n0, dev in rows:
            print(f"n0={n0} max_abs_deviation={dev:.6e}")
        print(path)
        devs = [d for _, d in rows]
        if any(b > a for a, b in zip(devs, devs[1:])):
            print("FAIL deviations are not non-increasing in n0", file=sys.stderr)
            return EXIT_VALIDATION
        return EXIT_OK
    except ConfigurationError as exc:
        return _config_error(exc)
    except (RemnantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.command == "converge" else 1


if __name__ == "__main__":
    sys.exit(main())
