"""Koopman CLI: the ``fit`` subcommand."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from common import __version__
from common.config import RunConfig
from common.errors import ConfigError, DataError
from common.runtime import add_common_arguments, configure_logging, resolve_config, run_command
from common.storage import LocalDirectoryStore, read_matrix_csv
from modules.data import pair_dump_frame
from modules.data.loader import augmentation_from_config, condition_pair, load_ensemble_from_config
from modules.observables import make_dictionary
from .models import KoopmanModel
from .service import fit_koopman, recovery_error, save_model, spectrum

logger = logging.getLogger(__name__)


def choose_condition(config: RunConfig, available: List[str]) -> str:
    """The configured condition, or the only one present."""
    if config.condition is not None:
        return config.condition
    if len(available) == 1:
        return available[0]
    raise ConfigError(f"Config must name a condition. Available: {available}")


def read_truth(path: Path, model: KoopmanModel) -> np.ndarray:
    """Ground-truth operator CSV, aligned to the model's labels."""
    if not Path(path).is_file():
        raise ConfigError(f"Truth not found: {path}")
    frame = read_matrix_csv(path, str(path))
    labels = list(model.row_labels)
    missing = [label for label in labels if label not in frame.index or label not in frame.columns]
    if missing:
        raise DataError(f"Ground truth {path} lacks labels {missing}")
    return frame.loc[labels, labels].to_numpy(dtype=float)


def cmd_fit(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_logging(config.log_level)

    ensemble = load_ensemble_from_config(config)
    condition = choose_condition(config, ensemble.condition_ids)
    pair = condition_pair(ensemble, condition, config)
    dictionary = make_dictionary(config.fit.dictionary, pair.labels)

    model = fit_koopman(pair, dictionary, config.fit.lambda_, augmentation_from_config(config))
    extra = {
        "condition": condition,
        "config_hash": config.fingerprint(),
        "tool_version": __version__,
    }
    if config.inputs.truth is not None:
        extra["recovery_error"] = recovery_error(model, read_truth(config.inputs.truth, model))

    store = LocalDirectoryStore(config.output_dir)
    save_model(model, store, extra)
    if args.dump_pairs:
        store.write_frame("pairs.csv", pair_dump_frame(pair))
    logger.info(f"Model written to {config.output_dir}")

    print(f"residual: {model.fit_meta.residual_fro:.6e}")
    for i, value in enumerate(spectrum(model).top(5), start=1):
        print(f"eigenvalue {i}: {value.real:+.6e} {value.imag:+.6e}j  |{abs(value):.6e}|")
    if "recovery_error" in extra:
        print(f"recovery_error: {extra['recovery_error']:.6e}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact fit",
        description="Fit a Koopman matrix on one condition",
    )
    add_common_arguments(parser)
    parser.add_argument(
        "--dump-pairs",
        action="store_true",
        help="Also write the (augmented) snapshot pairs as pairs.csv",
    )
    args = parser.parse_args(argv)
    return run_command(cmd_fit, args)


if __name__ == "__main__":
    sys.exit(main())
