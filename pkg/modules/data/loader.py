"""Run-config driven loading: table + manifest → ensemble → (augmented) snapshot pairs."""
import logging
from pathlib import Path
from typing import Optional

from common.config import RunConfig
from common.errors import ConfigError
from .augment import augment_pairs
from .models import AugmentationConfig, SnapshotEnsemble, SnapshotPair
from .service import (
    build_snapshot_pairs,
    load_expression_table,
    load_manifest,
    log2_transform,
    select_variables,
)

logger = logging.getLogger(__name__)


def _require(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise ConfigError(f"No {what} configured (inputs.{what})")
    if not Path(path).is_file():
        raise ConfigError(f"{what.capitalize()} not found: {path}")
    return Path(path)


def load_ensemble_from_config(config: RunConfig) -> SnapshotEnsemble:
    """Table + manifest from ``config.inputs``, then variable selection and log2 if asked."""
    manifest = load_manifest(_require(config.inputs.manifest, "manifest"))
    ensemble = load_expression_table(_require(config.inputs.table, "table"), manifest)
    if config.variables:
        ensemble = select_variables(ensemble, config.variables)
    if config.log2:
        logger.info("Applying log2(x+1) preprocessing")
        ensemble = log2_transform(ensemble)
    return ensemble


def augmentation_from_config(config: RunConfig) -> Optional[AugmentationConfig]:
    settings = config.fit.augmentation
    if settings is None:
        return None
    return AugmentationConfig(
        count_per_pair=settings.count,
        magnitude=settings.magnitude,
        distribution=settings.distribution,
        seed=config.augmentation_seed,
        clamp_sigmas=settings.clamp_sigmas,
    )


def condition_pair(ensemble: SnapshotEnsemble, condition: str, config: RunConfig) -> SnapshotPair:
    """Snapshot pairs of one condition, augmented when the config asks for it."""
    pair = build_snapshot_pairs(ensemble, condition)
    augmentation = augmentation_from_config(config)
    if augmentation is not None:
        pair = augment_pairs(pair, augmentation)
    return pair
