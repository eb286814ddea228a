"""StructuredModel archive: ``blocks/<block_name>.csv`` plus ``provenance.json``."""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from common import __version__
from common.errors import DataError
from common.storage import ArtifactStore, LocalDirectoryStore
from modules.data.models import frozen_array
from .models import Partition, StageResult, StageSpec, StructuredModel
from .service import frozen_terms, split_groups

logger = logging.getLogger(__name__)

PROVENANCE_FILE = "provenance.json"


def block_file(block_name: str) -> str:
    return f"blocks/{block_name}.csv"


def block_frame(result: StageResult) -> pd.DataFrame:
    return pd.DataFrame(
        result.matrix,
        index=pd.Index(result.row_labels, name="target"),
        columns=list(result.col_labels),
    )


def save_archive(
    model: StructuredModel,
    store: ArtifactStore,
    config_hash: str,
    extra: Optional[Dict[str, Any]] = None,
) -> None:
    """Write every learned block and the provenance record."""
    stages = []
    for result in model.stages:
        name = block_file(result.block_name)
        store.write_frame(name, block_frame(result))
        stages.append({
            "spec": result.spec.to_dict(),
            "block_file": name,
            "residual_fro": result.residual_fro,
            "lambda": result.lambda_,
            "state_labels": list(result.state_labels),
            "column_count": result.column_count,
        })
    record = {
        "config_hash": config_hash,
        "tool_version": __version__,
        "partition": model.partition.to_dict(),
        "provenance": {k: list(v) for k, v in model.provenance.items()},
        "stages": stages,
    }
    record.update(extra or {})
    store.write_json(PROVENANCE_FILE, record)
    logger.info(f"Archived {len(stages)} blocks")


def load_archive(directory: Path) -> Tuple[StructuredModel, Dict[str, Any]]:
    """Rebuild the model from an archive; also returns the raw provenance record."""
    store = LocalDirectoryStore(directory)
    record = store.read_json(PROVENANCE_FILE)
    try:
        return _rebuild(store, record), record
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise DataError(f"Malformed archive {directory}: {e!r}") from e


def _rebuild(store: ArtifactStore, record: Dict[str, Any]) -> StructuredModel:
    partition = Partition.from_dict(record["partition"])

    done: Dict[str, StageResult] = {}
    for entry in record["stages"]:
        spec = StageSpec.from_dict(entry["spec"])
        frame = store.read_frame(entry["block_file"])
        matrix = frozen_array(frame.to_numpy(dtype=float))
        row_labels = tuple(str(i) for i in frame.index)
        expected = tuple(partition.members(spec.learn))
        if tuple(str(c) for c in frame.columns) != expected:
            raise DataError(f"Block file {entry['block_file']} columns do not match {spec.learn}")
        done[spec.stage_id] = StageResult(
            spec=spec,
            matrix=matrix,
            row_labels=row_labels,
            col_labels=expected,
            group_blocks=split_groups(matrix, spec, partition),
            frozen=tuple(frozen_terms(spec, done, row_labels)),
            residual_fro=float(entry["residual_fro"]),
            lambda_=float(entry["lambda"]),
            state_labels=tuple(entry.get("state_labels", ())),
            column_count=int(entry.get("column_count", 0)),
        )

    model = StructuredModel(
        partition=partition,
        stages=tuple(done.values()),
        provenance={k: tuple(v) for k, v in record["provenance"].items()},
    )
    logger.debug(f"Loaded archive {store.root}: {model.block_names}")
    return model
