"""Command-line entry point: ``simulate <preset|config-file> [options]``."""

import argparse
import logging
import os
import sys

from .errors import ConfigError, InvalidArgument, NonUniqueSteadyState, NumericalFailure, UnsupportedConfiguration
from .scenarios import load_config, preset, preset_names, run, write_outputs
from .scenarios.runners import SweepResult

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Run a preset or a JSON scenario and write CSV/JSON data plus a config sidecar.",
        epilog="presets: " + ", ".join(preset_names()),
    )
    p.add_argument("scenario", help="preset name or path to a JSON config (a sidecar works too)")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--truncation", type=int, default=None, help="override the Fock truncation k")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.scenario in preset_names():
            config = preset(args.scenario)
        elif os.path.isfile(args.scenario):
            config = load_config(args.scenario)
        else:
            raise ConfigError("scenario", f"{args.scenario!r} is neither a preset nor a file")
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
        if args.truncation is not None:
            if args.truncation < 1:
                raise ConfigError("--truncation", "must be >= 1")
            config = config.with_truncation(args.truncation)
        result = run(config, workers=args.workers)
    except (ConfigError, InvalidArgument, UnsupportedConfiguration) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, NonUniqueSteadyState) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for path in write_outputs(config, result, args.out, args.format):
        print(path)
    if isinstance(result, SweepResult) and result.errors:
        print(f"{len(result.errors)} grid point(s) failed; see the sidecar", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
