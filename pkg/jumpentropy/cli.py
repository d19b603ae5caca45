"""Command-line entry point.

This module provides:

- `build_parser`: Argument parser with one subcommand per scenario.
- `main`: Run a scenario and return the exit status.

Exit status is 0 when every assertion holds, 1 when one fails and 2 on configuration or
validation errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path
from typing import TYPE_CHECKING

from jumpentropy.common import ConfigError, JumpEntropyError
from jumpentropy.config import MAX_SEED, ExperimentConfig, Scenario, load_config, scenario_from_name
from jumpentropy.scenarios import run

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < MAX_SEED:
        msg = f"seed must lie in [0, 2^64), got {text}"
        raise argparse.ArgumentTypeError(msg)
    return value


def _threads(text: str) -> int:
    value = int(text)
    if value < 1:
        msg = f"threads must be positive, got {text}"
        raise argparse.ArgumentTypeError(msg)
    return value


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser.

    Returns
    -------
    `argparse.ArgumentParser`
        parser with the scenario subcommands
    """
    parser = argparse.ArgumentParser(
        prog="jumpentropy", description="Numerical experiments for SDEs driven by pure-jump Lévy noise."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="YAML configuration or a previous manifest.json")
    common.add_argument("--seed", type=_seed, default=None, help="master seed, overrides the configuration")
    common.add_argument("--out", type=str, default=None, help="output directory, overrides the configuration")
    common.add_argument("--threads", type=_threads, default=1, help="worker threads for path blocks")
    common.add_argument(
        "--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level"
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for scenario in Scenario:
        sub.add_parser(scenario.value, parents=[common], help=f"run the {scenario.value} scenario")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    scenario = scenario_from_name(args.scenario)
    if args.config is None:
        config = ExperimentConfig(scenario=scenario)
    else:
        config = load_config(args.config, scenario)
    return config.with_overrides(scenario=scenario, seed=args.seed, out=args.out)


def main(argv: Sequence[str] | None = None) -> int:
    r"""Run the command line.

    Parameters
    ----------
    argv : `collections.abc.Sequence`\[`str`\] | None, optional
        arguments, by default ``sys.argv[1:]``

    Returns
    -------
    `int`
        exit status
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = _load(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)  # noqa: TRY400
        return EXIT_CONFIG
    pool = ThreadPoolExecutor(max_workers=args.threads) if args.threads > 1 else None
    try:
        with pool if pool is not None else nullcontext():
            result = run(config, executor=pool)
    except (ConfigError, ValueError) as exc:
        logger.error("validation error: %s", exc)  # noqa: TRY400
        return EXIT_CONFIG
    except JumpEntropyError as exc:
        logger.error("%s failed: %s", config.scenario.value, exc)  # noqa: TRY400
        return EXIT_FAIL
    if not result.passed:
        logger.error("%s failed: %s", config.scenario.value, ", ".join(result.failures))
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
