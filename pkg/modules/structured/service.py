"""
Structured (staged, block-wise) DMD.

The host block is learned first from host-only data; every later stage freezes
earlier blocks and learns the interaction block from what they leave unexplained:

    R = F_target - sum_k K_k P_k
    B = argmin ||R - B P_learn||_F^2 + lam ||B||_F^2

Stages run sequentially in declared order; blocks are aligned across conditions
by observable label.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from common.errors import DataError, HierarchyError
from modules.data.models import SnapshotPair, frozen_array
from modules.koopman.solver import ridge_solve
from .hierarchy import validate_stages
from .models import FrozenTerm, Partition, StageResult, StageSpec, StructuredModel

logger = logging.getLogger(__name__)

KnownTerm = Tuple[np.ndarray, np.ndarray]


def residual_target(known: Sequence[KnownTerm], target_future: np.ndarray) -> np.ndarray:
    """``target_future`` minus the contribution of every frozen (block, past) term."""
    target_future = np.asarray(target_future, dtype=float)
    if target_future.ndim != 2:
        raise DataError("target_future must be a matrix")
    p, m = target_future.shape
    residual = target_future.copy()
    for i, (block, past) in enumerate(known):
        block = np.asarray(block, dtype=float)
        past = np.asarray(past, dtype=float)
        if past.ndim != 2 or past.shape[1] != m:
            raise DataError(f"Known term {i}: past has shape {past.shape}, expected (*, {m})")
        if block.shape != (p, past.shape[0]):
            raise DataError(
                f"Known term {i}: block is {block.shape}, expected {(p, past.shape[0])}"
            )
        residual -= block @ past
    return residual


def fit_residual_block(
    known: Sequence[KnownTerm],
    target_future: np.ndarray,
    learn_past: np.ndarray,
    lambda_: Optional[float] = None,
) -> np.ndarray:
    """Ridge fit of the block that maps ``learn_past`` onto the unexplained residual.

    ``known`` is a list of (frozen block p×q_k, past sub-matrix q_k×m). With no known
    terms this is :func:`modules.koopman.fit_koopman` restricted to the target rows.
    """
    learn_past = np.asarray(learn_past, dtype=float)
    if learn_past.ndim != 2 or learn_past.shape[0] == 0:
        raise DataError("learn_past is empty")
    residual = residual_target(known, target_future)
    block, _ = ridge_solve(residual, learn_past, lambda_)
    return block


# ---------------------------------------------------------------------------
# Staged fitting
# ---------------------------------------------------------------------------

def _require_groups(spec: StageSpec, partition: Partition, pair: SnapshotPair) -> None:
    named = [spec.target_group, *spec.learn]
    for gid in named:
        partition.group(gid)
        missing = [label for label in partition.members(gid) if label not in pair.labels]
        if missing:
            raise HierarchyError(
                f"Stage '{spec.stage_id}': group '{gid}' is absent from condition "
                f"'{spec.condition}' (missing {missing[:5]})"
            )


def frozen_terms(
    spec: StageSpec,
    done: Mapping[str, StageResult],
    target_labels: Tuple[str, ...],
) -> List[FrozenTerm]:
    terms = []
    for ref in spec.known:
        source = done[ref.stage]
        if source.row_labels != target_labels:
            raise HierarchyError(
                f"Stage '{spec.stage_id}' targets group '{spec.target_group}', but frozen "
                f"stage '{ref.stage}' targets '{source.spec.target_group}'"
            )
        groups = [ref.group] if ref.group is not None else list(source.spec.learn)
        for gid in groups:
            if gid not in source.group_blocks:
                raise HierarchyError(
                    f"Stage '{spec.stage_id}' references group '{gid}' of stage "
                    f"'{ref.stage}', which learned {list(source.spec.learn)}"
                )
            terms.append(FrozenTerm(
                stage=ref.stage,
                group=gid,
                col_labels=source.group_col_labels(gid),
                matrix=source.group_blocks[gid],
            ))

    if not spec.composite:
        frozen_groups = {t.group for t in terms}
        overlap = sorted(frozen_groups.intersection(spec.learn))
        if overlap:
            raise HierarchyError(
                f"Stage '{spec.stage_id}' learns groups {overlap} that already carry frozen "
                f"blocks; mark the stage composite to learn a correction over them"
            )
    return terms


def split_groups(
    matrix: np.ndarray, spec: StageSpec, partition: Partition
) -> Dict[str, np.ndarray]:
    blocks = {}
    start = 0
    for gid in spec.learn:
        width = len(partition.members(gid))
        blocks[gid] = frozen_array(matrix[:, start:start + width])
        start += width
    return blocks


def fit_stage(
    spec: StageSpec,
    pair: SnapshotPair,
    partition: Partition,
    done: Mapping[str, StageResult],
    default_lambda: Optional[float] = None,
) -> StageResult:
    """Fit one stage on its condition's snapshot pair with earlier stages frozen."""
    _require_groups(spec, partition, pair)
    target_labels = tuple(partition.members(spec.target_group))
    learn_labels = tuple(partition.members(spec.learn))
    terms = frozen_terms(spec, done, target_labels)

    try:
        target_future = pair.future[pair.row_indices(target_labels)]
        known = [(t.matrix, pair.past[pair.row_indices(t.col_labels)]) for t in terms]
    except DataError as e:
        raise HierarchyError(f"Stage '{spec.stage_id}': frozen block labels not aligned: {e}")
    learn_past = pair.past[pair.row_indices(learn_labels)]

    lam = spec.lambda_ if spec.lambda_ is not None else default_lambda
    residual = residual_target(known, target_future)
    block, info = ridge_solve(residual, learn_past, lam)
    residual_fro = float(np.linalg.norm(residual - block @ learn_past))

    matrix = frozen_array(block)
    result = StageResult(
        spec=spec,
        matrix=matrix,
        row_labels=target_labels,
        col_labels=learn_labels,
        group_blocks=split_groups(matrix, spec, partition),
        frozen=tuple(terms),
        residual_fro=residual_fro,
        lambda_=info.lambda_,
        state_labels=pair.labels,
        column_count=pair.column_count,
    )
    logger.info(
        f"Stage {spec.stage_id} ({spec.block_name}): {block.shape[0]}x{block.shape[1]} on "
        f"'{spec.condition}', {len(terms)} frozen blocks, residual={residual_fro:.3e}"
    )
    return result


def staged_fit(
    stages: Sequence[StageSpec],
    datasets: Mapping[str, SnapshotPair],
    partition: Partition,
    default_lambda: Optional[float] = None,
) -> StructuredModel:
    """Execute a design hierarchy stage by stage.

    ``default_lambda`` applies to stages without their own lambda; ``None`` falls back
    to the solver's scale-aware default.
    """
    validate_stages(stages)
    unresolved = [g.group_id for g in partition.groups if not g.resolved]
    if unresolved:
        raise HierarchyError(f"Partition groups {unresolved} are not resolved against labels")

    done: Dict[str, StageResult] = {}
    for spec in stages:
        if spec.condition not in datasets:
            raise HierarchyError(
                f"Stage '{spec.stage_id}' needs condition '{spec.condition}'. "
                f"Available: {sorted(datasets)}"
            )
        done[spec.stage_id] = fit_stage(
            spec, datasets[spec.condition], partition, done, default_lambda
        )

    return StructuredModel(
        partition=partition,
        stages=tuple(done[s.stage_id] for s in stages),
        provenance={s.stage_id: s.depends_on for s in stages},
    )


# ---------------------------------------------------------------------------
# Using a fitted model
# ---------------------------------------------------------------------------

def _state_slice(state: np.ndarray, labels: Sequence[str], wanted: Sequence[str]) -> np.ndarray:
    index = {label: i for i, label in enumerate(labels)}
    missing = [label for label in wanted if label not in index]
    if missing:
        raise DataError(f"State vector lacks observables {missing[:5]}")
    return state[[index[label] for label in wanted]]


def compose_step(
    model: StructuredModel,
    stage_id: str,
    full_state: np.ndarray,
    labels: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Next target-group observables: frozen blocks plus the learned block, summed."""
    result = model.stage(stage_id)
    labels = list(labels) if labels is not None else list(result.state_labels)
    state = np.asarray(full_state, dtype=float).ravel()
    if state.shape[0] != len(labels):
        raise DataError(f"State has {state.shape[0]} entries, labels name {len(labels)}")

    out = result.matrix @ _state_slice(state, labels, result.col_labels)
    for term in result.frozen:
        out = out + term.matrix @ _state_slice(state, labels, term.col_labels)
    return out


def stage_residual(model: StructuredModel, stage_id: str, pair: SnapshotPair) -> float:
    """||F_target - sum(all blocks · pasts)||_F recomputed from stored blocks."""
    result = model.stage(stage_id)
    predicted = np.column_stack([
        compose_step(model, stage_id, pair.past[:, j], pair.labels)
        for j in range(pair.column_count)
    ])
    target = pair.future[pair.row_indices(result.row_labels)]
    return float(np.linalg.norm(target - predicted))


@dataclass(frozen=True)
class JointComparison:
    """Per column group: relative Frobenius gap between joint and structured blocks."""
    stage_id: str
    differences: Dict[str, float]
    joint: np.ndarray
    col_labels: Tuple[str, ...]


def compare_with_joint_fit(
    model: StructuredModel,
    stage_id: str,
    dataset: SnapshotPair,
    lambda_: Optional[float] = None,
) -> JointComparison:
    """Fit one unstructured operator for the stage's target rows and compare group-wise.

    The structured counterpart of a column group is the sum of every frozen and learned
    block over that group. The gap is relative to the structured block's norm, or
    absolute where that norm is zero.
    """
    result = model.stage(stage_id)
    partition = model.partition
    used = {t.group for t in result.frozen} | set(result.spec.learn)
    groups = [gid for gid in partition.group_ids if gid in used]
    col_labels = tuple(partition.members(groups))

    target = dataset.future[dataset.row_indices(result.row_labels)]
    past = dataset.past[dataset.row_indices(col_labels)]
    joint, _ = ridge_solve(target, past, lambda_)

    differences = {}
    start = 0
    for gid in groups:
        width = len(partition.members(gid))
        structured = np.zeros((len(result.row_labels), width))
        for term in result.frozen:
            if term.group == gid:
                structured += term.matrix
        if gid in result.group_blocks:
            structured += result.group_blocks[gid]
        gap = np.linalg.norm(joint[:, start:start + width] - structured)
        scale = np.linalg.norm(structured)
        differences[gid] = float(gap / scale if scale > 0 else gap)
        start += width

    logger.info(f"Joint vs structured ({stage_id}): {differences}")
    return JointComparison(stage_id, differences, frozen_array(joint), col_labels)
