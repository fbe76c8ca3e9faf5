"""Command-line entry point.

    hybridmem run <scenario> [--config PATH] [--out DIR] [--threads N]
                             [--print-defaults]

Exit codes: 0 on success, 2 for configuration problems (unknown
scenario, bad config file, unwritable output), 3 when any cell breached
the numerical diagnostics.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import (
    SCENARIO_NAMES,
    ConfigError,
    check_scenario_name,
    parse_config,
    print_defaults,
)
from .lindblad import IntegrationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIAGNOSTICS = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridmem",
        description="Hybrid junction / resonator / spin-ensemble memory "
                    "simulator",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run", help="run a scenario and write CSV, metadata, and figure",
        description="Scenarios: " + ", ".join(SCENARIO_NAMES),
    )
    run.add_argument("scenario", help="scenario name")
    run.add_argument("--config", metavar="PATH", default=None,
                     help="INI config overriding the scenario defaults")
    run.add_argument("--out", metavar="DIR", default=".",
                     help="output directory (default: current directory)")
    run.add_argument("--threads", metavar="N", type=int, default=1,
                     help="worker threads for sweep cells (default: 1; "
                          "output is identical for any N)")
    run.add_argument("--print-defaults", action="store_true",
                     help="print the scenario's effective defaults and "
                          "exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    try:
        check_scenario_name(args.scenario)
        if args.print_defaults:
            sys.stdout.write(print_defaults(args.scenario))
            return EXIT_OK
        cfg = parse_config(args.scenario, args.config)
    except ConfigError as exc:
        print(f"hybridmem: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.threads < 1:
        print("hybridmem: config error: --threads must be >= 1",
              file=sys.stderr)
        return EXIT_CONFIG

    from .scenarios import run_scenario
    try:
        result = run_scenario(cfg, args.out, threads=args.threads)
    except IntegrationError as exc:
        print(f"hybridmem: numerical diagnostics breach in "
              f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except OSError as exc:
        print(f"hybridmem: config error: cannot write output: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG

    print(f"wrote {result.csv_path}")
    print(f"wrote {result.meta_path}")
    if result.figure_path is not None:
        print(f"wrote {result.figure_path}")
    if not result.ok:
        print(f"hybridmem: numerical diagnostics breach in "
              f"{args.scenario}:", file=sys.stderr)
        for failure in result.failures:
            print(f"  {failure}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
