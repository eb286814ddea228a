"""
Circuit-to-host impact measures.

The score of a p×q block is ||B||_F / (p·q), the Frobenius norm divided by the
entry count (not its square root). Impacted targets are rows passing a
:class:`ThresholdRule`.
"""
import logging
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from common import __version__
from common.errors import ConfigError, DataError, not_found
from common.storage import ArtifactStore
from modules.structured.models import StructuredModel
from .models import ImpactEntry, ImpactReport, ThresholdRule

logger = logging.getLogger(__name__)

REPORT_FILE = "impact_report.json"


def _check_block(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=float)
    if block.ndim != 2 or block.size == 0:
        raise DataError(f"Impact needs a non-empty matrix, got shape {block.shape}")
    if not np.all(np.isfinite(block)):
        raise DataError("Block contains non-finite entries")
    return block


def impact_score(block: np.ndarray) -> float:
    """||block||_F / (p·q)."""
    block = _check_block(block)
    p, q = block.shape
    return float(np.linalg.norm(block) / (p * q))


def impacted_targets(
    block: np.ndarray,
    row_labels: Sequence[str],
    rule: ThresholdRule,
) -> List[str]:
    """Row labels whose largest |entry| meets the rule, in row order."""
    block = _check_block(block)
    if len(row_labels) != block.shape[0]:
        raise DataError(f"{len(row_labels)} row labels for a block with {block.shape[0]} rows")

    row_max = np.max(np.abs(block), axis=1)
    if rule.kind == "absolute":
        tau = rule.value
    else:
        tau = rule.value * float(row_max.max())
    hit = (row_max > 0) & (row_max >= tau)
    return [label for label, flag in zip(row_labels, hit) if flag]


class BlockView(NamedTuple):
    block_id: str
    matrix: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    stage_id: str


def _entry(view: BlockView, rule: ThresholdRule) -> ImpactEntry:
    targets = impacted_targets(view.matrix, view.row_labels, rule)
    p, q = view.matrix.shape
    return ImpactEntry(
        block_id=view.block_id,
        rows=p,
        cols=q,
        fro_norm=float(np.linalg.norm(view.matrix)),
        score=impact_score(view.matrix),
        impacted_targets=targets,
        impacted_count=len(targets),
        stage_id=view.stage_id,
    )


def selected_blocks(
    model: StructuredModel, blocks: Optional[Iterable[str]] = None, per_group: bool = False
) -> List[BlockView]:
    """Blocks to report on; composite stages add one view per learned group if asked."""
    names = list(blocks) if blocks is not None else model.block_names
    available = model.block_names
    chosen = []
    for name in names:
        if name not in available:
            raise ConfigError(not_found("Block", name, available))
        result = model.block(name)
        stage_id = result.spec.stage_id
        chosen.append(
            BlockView(name, result.matrix, result.row_labels, result.col_labels, stage_id)
        )
        if per_group and result.spec.composite:
            for gid in result.spec.learn:
                chosen.append(BlockView(
                    f"{name}[{gid}]",
                    result.group_blocks[gid],
                    result.row_labels,
                    result.group_col_labels(gid),
                    stage_id,
                ))
    return chosen


def rank_entries(entries: Sequence[ImpactEntry]) -> List[str]:
    """Block ids by descending score; ties by block id."""
    return [e.block_id for e in sorted(entries, key=lambda e: (-e.score, e.block_id))]


def impact_report(
    model: StructuredModel,
    rule: ThresholdRule,
    blocks: Optional[Iterable[str]] = None,
    per_group: bool = False,
    config_hash: str = "",
) -> ImpactReport:
    """One entry per learned block (or per selected block), ranked by score."""
    if not model.stages:
        raise ConfigError("Model has no learned blocks")
    entries = [_entry(view, rule) for view in selected_blocks(model, blocks, per_group)]
    report = ImpactReport(
        entries=entries,
        threshold_rule=rule.to_dict(),
        ranking=rank_entries(entries),
        block_source="all" if blocks is None else "selected",
        per_group=per_group,
        tool_version=__version__,
        config_hash=config_hash,
    )
    for e in entries:
        logger.debug(f"{e.block_id}: score={e.score:.3e} impacted={e.impacted_count}")
    logger.info(f"Impact report: {len(entries)} blocks under {rule}")
    return report


def write_report(report: ImpactReport, store: ArtifactStore, name: str = REPORT_FILE) -> str:
    """Deterministic JSON (sorted keys, indent 2)."""
    return store.write_json(name, report.model_dump(mode="json"))


def read_report(store: ArtifactStore, name: str = REPORT_FILE) -> ImpactReport:
    return ImpactReport.model_validate(store.read_json(name))
