"""Design-hierarchy files and their validation."""
import logging
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Sequence

from common.config import load_document
from common.errors import HierarchyError
from .models import Hierarchy, Partition, StageSpec

logger = logging.getLogger(__name__)


def validate_stages(stages: Sequence[StageSpec]) -> None:
    """Unique ids, resolvable references, no cycles, references point backwards."""
    ids = [s.stage_id for s in stages]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise HierarchyError(f"Duplicate stage ids: {duplicates}")

    known_ids = set(ids)
    for spec in stages:
        for ref in spec.known:
            if ref.stage not in known_ids:
                raise HierarchyError(
                    f"Stage '{spec.stage_id}' references unknown stage '{ref.stage}'. "
                    f"Available: {ids}"
                )

    graph = TopologicalSorter({s.stage_id: s.depends_on for s in stages})
    try:
        graph.prepare()
    except CycleError as e:
        cycle = e.args[1]
        raise HierarchyError(f"cycle detected: {' -> '.join(cycle)}") from e

    position = {stage_id: i for i, stage_id in enumerate(ids)}
    for spec in stages:
        for dep in spec.depends_on:
            if position[dep] >= position[spec.stage_id]:
                raise HierarchyError(
                    f"Stage '{spec.stage_id}' references stage '{dep}', "
                    f"which is not declared before it"
                )


def hierarchy_from_dict(data: dict) -> Hierarchy:
    if "stages" not in data or not data["stages"]:
        raise HierarchyError("Hierarchy defines no stages")
    if "partition" not in data:
        raise HierarchyError("Hierarchy defines no partition")
    lam = data.get("lambda")
    try:
        lam = None if lam is None else float(lam)
    except (TypeError, ValueError) as e:
        raise HierarchyError(f"Hierarchy lambda must be a number, got {lam!r}") from e
    if not isinstance(data["stages"], (list, tuple)):
        raise HierarchyError("Hierarchy stages must be a list")
    stages = tuple(StageSpec.from_dict(s) for s in data["stages"])
    validate_stages(stages)
    return Hierarchy(
        partition=Partition.from_dict(data["partition"]),
        stages=stages,
        lambda_=lam,
    )


def load_hierarchy(path: Path) -> Hierarchy:
    """Read a hierarchy file (YAML, JSON or TOML)."""
    hierarchy = hierarchy_from_dict(load_document(Path(path)))
    logger.info(f"Loaded hierarchy {path}: {len(hierarchy.stages)} stages")
    return hierarchy
