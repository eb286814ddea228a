"""Structured DMD CLI: the ``staged-fit`` subcommand."""
import argparse
import logging
import sys
from typing import List, Optional

from common.config import RunConfig
from common.errors import ConfigError
from common.runtime import add_common_arguments, configure_logging, resolve_config, run_command
from common.storage import LocalDirectoryStore
from modules.data.loader import condition_pair, load_ensemble_from_config
from .archive import save_archive
from .hierarchy import load_hierarchy
from .models import StructuredModel
from .service import staged_fit

logger = logging.getLogger(__name__)


def run_hierarchy(config: RunConfig) -> StructuredModel:
    """Load data and hierarchy named by the config and execute every stage."""
    if config.inputs.hierarchy is None:
        raise ConfigError("No hierarchy configured (inputs.hierarchy)")
    hierarchy = load_hierarchy(config.inputs.hierarchy)
    ensemble = load_ensemble_from_config(config)
    partition = hierarchy.partition.resolve(ensemble.variable_ids)

    conditions = list(dict.fromkeys(s.condition for s in hierarchy.stages))
    datasets = {}
    for condition in conditions:
        if condition in ensemble.condition_ids:
            datasets[condition] = condition_pair(ensemble, condition, config)

    default_lambda = config.fit.lambda_ if config.fit.lambda_ is not None else hierarchy.lambda_
    return staged_fit(hierarchy.stages, datasets, partition, default_lambda)


def cmd_staged_fit(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_logging(config.log_level)

    model = run_hierarchy(config)
    save_archive(model, LocalDirectoryStore(config.output_dir), config.fingerprint())
    logger.info(f"Archive written to {config.output_dir}")

    for result in model.stages:
        print(
            f"{result.spec.stage_id}  {result.block_name:<12} "
            f"{result.matrix.shape[0]}x{result.matrix.shape[1]}  "
            f"residual={result.residual_fro:.6e}  lambda={result.lambda_:.3e}"
        )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact staged-fit",
        description="Run a design hierarchy of structured DMD stages",
    )
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    return run_command(cmd_staged_fit, args)


if __name__ == "__main__":
    sys.exit(main())
