"""Command-line experiment driver.

One subcommand per run mode plus ``validate``::

    qtypicality speckle        --config configs/speckle_dim500.json
    qtypicality concentration  --config ... [--seed N] [--workers N] [--out DIR]
    qtypicality scaling        --config ...
    qtypicality gradient-check --config ...
    qtypicality poincare-check --config ...
    qtypicality validate       --config ...

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import logging
import sys
from dataclasses import replace

from .concentration import FiniteDifferenceError
from .config import MODES, ConfigError, load_config, memory_estimate_bytes, sanity_warnings
from .dynamics import PhysicalityError
from .experiments import run_experiment
from .linalg import EigendecompositionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtypicality",
        description="Ensemble Monte Carlo for embedded quantum dynamics "
        "and its concentration bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in MODES + ("validate",):
        p = sub.add_parser(name, help=f"run the {name} mode" if name in MODES else "check a config file")
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--workers", type=int, default=None, help="override worker count")
        p.add_argument("--out", default=None, help="override output directory")
    return parser


def _load_and_override(args) -> "ExperimentConfig":
    config = load_config(args.config)
    if args.command != "validate" and config.mode != args.command:
        raise ConfigError(
            [f"mode: config says {config.mode!r} but the {args.command!r} "
             "subcommand was invoked"]
        )
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError([f"workers: must be >= 1, got {args.workers}"])
        config = replace(config, workers=args.workers)
    if args.out is not None:
        config = replace(config, out_dir=args.out)
    return config


def cmd_validate(args) -> int:
    try:
        config = _load_and_override(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"config ok: mode={config.mode}, composite dim={config.system.dim}, "
          f"n_realizations={config.n_realizations}")
    mib = memory_estimate_bytes(config.system.dim) / 2**20
    print(f"memory per dense matrix: {mib:.1f} MiB")
    for warning in sanity_warnings(config):
        print(f"warning: {warning}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args)
    try:
        config = _load_and_override(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run_experiment(config)
    except (PhysicalityError, FiniteDifferenceError, EigendecompositionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid run parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"done: artifacts in {config.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
