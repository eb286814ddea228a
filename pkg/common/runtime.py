"""Shared plumbing for the subcommand CLIs: flags, logging, error reporting."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable

from .config import RunConfig, load_run_config
from .errors import HostImpactError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """Route all log records to stderr at the given level."""
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Run config (YAML, JSON or TOML)")
    parser.add_argument("--out", type=Path, help="Output directory (overrides output_dir)")
    parser.add_argument("--lambda", dest="lambda_", type=float, help="Ridge parameter")
    parser.add_argument("--seed", type=int, help="Seed for augmentation and synthesis")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log verbosity",
    )


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Load ``--config`` and apply the override flags."""
    config = load_run_config(args.config)
    return config.with_overrides(
        output_dir=args.out,
        lambda_=args.lambda_,
        seed=args.seed,
        log_level=args.log_level,
    )


def report_error(error: HostImpactError) -> int:
    """Write the single-line machine-parsable error record and return the exit code."""
    record = {
        "error": type(error).__name__,
        "exit_code": error.exit_code,
        "message": str(error),
    }
    print(json.dumps(record), file=sys.stderr)
    return error.exit_code


def run_command(body: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Run a subcommand body, translating library errors into exit codes."""
    try:
        return body(args)
    except HostImpactError as e:
        logger.debug("command failed", exc_info=True)
        return report_error(e)