"""Synth CLI: the ``simulate`` and ``synth`` subcommands.

Both write a ready-to-run dataset: ``expression.csv``, ``manifest.json``,
ground-truth CSVs, ``hierarchy.yaml`` and a ``run.yaml`` pointing at them.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import yaml

from common.config import DEFAULT_SETTINGS, RunConfig, load_document
from common.runtime import add_common_arguments, configure_logging, resolve_config, run_command
from common.storage import ArtifactStore, LocalDirectoryStore
from modules.data.models import SnapshotEnsemble
from modules.data.service import expression_frame, trajectory_ensemble
from modules.structured.models import Partition
from .blocks import simulate_block_system
from .models import BlockSystemSpec, OscillatorParams
from .oscillators import (
    OSCILLATOR_LABELS,
    propagator,
    simulate_oscillators,
    simulate_original_oscillator,
)
from .rnaseq import NAND_CONDITIONS, toy_from_settings

logger = logging.getLogger(__name__)

NAND_HIERARCHY = DEFAULT_SETTINGS.parent / "hierarchies" / "nand.yaml"

TABLE_FILE = "expression.csv"
MANIFEST_FILE = "manifest.json"
HIERARCHY_FILE = "hierarchy.yaml"
RUN_FILE = "run.yaml"


def labelled(matrix: np.ndarray, rows: Sequence[str], cols: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(matrix, index=pd.Index(list(rows), name="target"), columns=list(cols))


def write_dataset(store: ArtifactStore, ensemble: SnapshotEnsemble) -> None:
    frame, manifest = expression_frame(ensemble)
    store.write_frame(TABLE_FILE, frame)
    store.write_json(MANIFEST_FILE, manifest.to_dict())


def write_yaml(store: ArtifactStore, name: str, document: Dict[str, Any]) -> None:
    store.write_text(name, yaml.safe_dump(document, sort_keys=False))


def two_stage_hierarchy(partition: Partition, original: str, coupled: str) -> Dict[str, Any]:
    """Original block from ``original`` data, then every other group's block from ``coupled``."""
    host, *added = partition.group_ids
    stages = [
        {"stage_id": "a", "block_name": f"K_{host}{host}", "condition": original,
         "target_group": host, "learn": [host]},
    ]
    if added:
        stages.append(
            {"stage_id": "b", "block_name": f"K_{host}{''.join(added)}", "condition": coupled,
             "target_group": host, "known": [{"stage": "a", "group": host}], "learn": added}
        )
    return {"lambda": None, "partition": partition.to_dict(), "stages": stages}


def run_document(**inputs: str) -> Dict[str, Any]:
    condition = inputs.pop("condition", None)
    document: Dict[str, Any] = {"inputs": inputs}
    if condition is not None:
        document["condition"] = condition
    return document


def _simulate_oscillators(config: RunConfig, store: ArtifactStore) -> None:
    params = OscillatorParams.from_settings(config.synth.oscillator)
    original = np.zeros((4, params.steps + 1))
    original[:2] = simulate_original_oscillator(params)
    coupled = simulate_oscillators(params)

    samples = (
        trajectory_ensemble(original, OSCILLATOR_LABELS, "original").samples
        + trajectory_ensemble(coupled, OSCILLATOR_LABELS, "coupled").samples
    )
    write_dataset(store, SnapshotEnsemble(OSCILLATOR_LABELS, samples))
    truth = labelled(propagator(params), OSCILLATOR_LABELS, OSCILLATOR_LABELS)
    store.write_frame("truth.csv", truth)

    partition = Partition.from_dict({"O": ["x1", "v1"], "A": ["x2", "v2"]})
    write_yaml(store, HIERARCHY_FILE, two_stage_hierarchy(partition, "original", "coupled"))
    write_yaml(store, RUN_FILE, run_document(
        table=TABLE_FILE, manifest=MANIFEST_FILE, hierarchy=HIERARCHY_FILE,
        truth="truth.csv", condition="coupled",
    ))
    logger.info(f"Simulated coupled oscillators (k_c={params.k_c}, {params.steps} steps)")


def _simulate_blocks(config: RunConfig, store: ArtifactStore) -> None:
    settings = config.synth.block_system
    spec = BlockSystemSpec.from_settings(settings, seed=config.seed)
    trajectory = simulate_block_system(spec, settings.steps)

    write_dataset(store, trajectory_ensemble(trajectory.states, trajectory.labels, "system"))
    store.write_frame("truth.csv", labelled(trajectory.operator, spec.labels, spec.labels))
    partition = spec.partition
    for key, block in trajectory.blocks.items():
        rows, cols = key.split("-")
        store.write_frame(
            f"truth/{key}.csv", labelled(block, partition.members(rows), partition.members(cols))
        )

    write_yaml(store, HIERARCHY_FILE, two_stage_hierarchy(partition, "system", "system"))
    write_yaml(store, RUN_FILE, run_document(
        table=TABLE_FILE, manifest=MANIFEST_FILE, hierarchy=HIERARCHY_FILE,
        truth="truth.csv", condition="system",
    ))
    logger.info(f"Simulated block system {dict(spec.group_dims)} for {settings.steps} steps")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_logging(config.log_level)
    store = LocalDirectoryStore(config.output_dir)
    if config.synth.system == "oscillator":
        _simulate_oscillators(config, store)
    else:
        _simulate_blocks(config, store)
    print(config.output_dir)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_logging(config.log_level)
    store = LocalDirectoryStore(config.output_dir)

    toy = toy_from_settings(config.synth.toy, seed=config.seed)
    write_dataset(store, toy.ensemble)
    for key, block in toy.ground_truth.items():
        rows, cols = key.split("-")
        store.write_frame(
            f"truth/{key}.csv",
            labelled(block, toy.partition.members(rows), toy.partition.members(cols)),
        )

    inputs = {"table": TABLE_FILE, "manifest": MANIFEST_FILE}
    conditions = config.synth.toy.conditions
    if conditions is None or set(conditions) == set(NAND_CONDITIONS):
        hierarchy = dict(load_document(NAND_HIERARCHY))
        hierarchy["partition"] = toy.partition.to_dict()
        write_yaml(store, HIERARCHY_FILE, hierarchy)
        inputs["hierarchy"] = HIERARCHY_FILE
    else:
        logger.info("Custom strains: no hierarchy written")
    write_yaml(store, RUN_FILE, run_document(**inputs))

    print(config.output_dir)
    return 0


def simulate_main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact simulate",
        description="Simulate coupled oscillators or a planted block system",
    )
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    return run_command(cmd_simulate, args)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact synth",
        description="Generate the toy host + circuit transcriptome",
    )
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    return run_command(cmd_synth, args)


if __name__ == "__main__":
    sys.exit(main())
