"""
Data Module
===========
Expression-table ingestion, snapshot-pair assembly and sparse-data augmentation.

Usage:
    from modules.data import (
        load_manifest, load_expression_table, select_variables,
        build_snapshot_pairs, augment_pairs, AugmentationConfig,
    )

    ensemble = load_expression_table(Path("expression.csv"), load_manifest(Path("manifest.json")))
    pair = build_snapshot_pairs(ensemble, "wt")
    pair = augment_pairs(pair, AugmentationConfig(count_per_pair=25, seed=7))
"""

from .models import (
    AugmentationConfig,
    ColumnProvenance,
    ConditionManifest,
    Sample,
    SampleKey,
    SnapshotEnsemble,
    SnapshotPair,
    frozen_array,
)
from .service import (
    build_snapshot_pairs,
    expression_frame,
    load_expression_table,
    load_manifest,
    log2_transform,
    pair_dump_frame,
    pair_from_trajectory,
    select_variables,
    trajectory_ensemble,
    write_expression_table,
    write_pair_dump,
)
from .augment import augment_pairs, make_rng

__all__ = [
    # Models
    "AugmentationConfig",
    "ColumnProvenance",
    "ConditionManifest",
    "Sample",
    "SampleKey",
    "SnapshotEnsemble",
    "SnapshotPair",
    "frozen_array",
    # Service
    "build_snapshot_pairs",
    "expression_frame",
    "load_expression_table",
    "load_manifest",
    "log2_transform",
    "pair_dump_frame",
    "pair_from_trajectory",
    "select_variables",
    "trajectory_ensemble",
    "write_expression_table",
    "write_pair_dump",
    # Augmentation
    "augment_pairs",
    "make_rng",
]
