"""Structured-DMD data types: partition, hierarchy stages, staged results."""

import fnmatch
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from common.errors import DataError, HierarchyError, not_found


@dataclass(frozen=True)
class Group:
    """A named set of observable labels.

    ``pattern`` (shell-style, e.g. ``"H*"``) is resolved against dataset labels
    by :meth:`Partition.resolve`; explicit ``members`` are kept as given.
    """
    group_id: str
    members: Tuple[str, ...] = ()
    pattern: Optional[str] = None

    @property
    def resolved(self) -> bool:
        return self.pattern is None or bool(self.members)

    @classmethod
    def from_dict(cls, data: Dict) -> "Group":
        try:
            members = data.get("members", ())
            if isinstance(members, str):
                return cls(group_id=str(data["id"]), pattern=members)
            return cls(group_id=str(data["id"]), members=tuple(str(m) for m in members))
        except (KeyError, TypeError, AttributeError) as e:
            raise HierarchyError(f"Malformed group {data!r}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.group_id, "members": list(self.members)}


@dataclass(frozen=True)
class Partition:
    """Ordered, disjoint groups of observable labels."""
    groups: Tuple[Group, ...]

    def __post_init__(self):
        ids = [g.group_id for g in self.groups]
        if len(set(ids)) != len(ids):
            raise HierarchyError(f"Duplicate group ids in partition: {ids}")
        seen: Dict[str, str] = {}
        for group in self.groups:
            for label in group.members:
                if label in seen:
                    raise HierarchyError(
                        f"Label '{label}' belongs to groups '{seen[label]}' and '{group.group_id}'"
                    )
                seen[label] = group.group_id

    @property
    def group_ids(self) -> List[str]:
        return [g.group_id for g in self.groups]

    @property
    def labels(self) -> List[str]:
        return [label for g in self.groups for label in g.members]

    def group(self, group_id: str) -> Group:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise HierarchyError(not_found("Group", group_id, self.group_ids))

    def members(self, group_ids: Union[str, Sequence[str]]) -> List[str]:
        """Labels of one group, or of several groups concatenated in the given order."""
        if isinstance(group_ids, str):
            group_ids = [group_ids]
        return [label for gid in group_ids for label in self.group(gid).members]

    def resolve(self, labels: Sequence[str]) -> "Partition":
        """Expand patterns against ``labels`` and check that every label is covered."""
        taken = {label for g in self.groups if g.pattern is None for label in g.members}
        groups = []
        for g in self.groups:
            if g.resolved:
                groups.append(g)
                continue
            matched = tuple(
                label for label in labels
                if fnmatch.fnmatchcase(label, g.pattern) and label not in taken
            )
            if not matched:
                raise HierarchyError(
                    f"Group '{g.group_id}' pattern '{g.pattern}' matches no labels"
                )
            taken.update(matched)
            groups.append(Group(g.group_id, matched))
        partition = Partition(tuple(groups))

        covered = set(partition.labels)
        uncovered = [label for label in labels if label not in covered]
        if uncovered:
            raise HierarchyError(f"Labels not assigned to any group: {uncovered}")
        return partition

    @classmethod
    def from_dict(cls, data: Union[List, Dict]) -> "Partition":
        """Accepts a list of ``{id, members}`` or a mapping ``group_id -> members``."""
        if isinstance(data, dict):
            data = [{"id": k, "members": v} for k, v in data.items()]
        if not isinstance(data, (list, tuple)):
            raise HierarchyError(f"Partition must be a list or a mapping, got {data!r}")
        return cls(tuple(Group.from_dict(d) for d in data))

    def to_dict(self) -> List[Dict[str, Any]]:
        return [g.to_dict() for g in self.groups]


@dataclass(frozen=True)
class KnownRef:
    """A frozen block from an earlier stage; ``group=None`` means all its learned groups."""
    stage: str
    group: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Union[str, Dict]) -> "KnownRef":
        if isinstance(data, str):
            return cls(stage=data)
        try:
            group = data.get("group")
            return cls(stage=str(data["stage"]), group=None if group is None else str(group))
        except (KeyError, TypeError, AttributeError) as e:
            raise HierarchyError(f"Malformed known reference {data!r}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {"stage": self.stage, "group": self.group}


@dataclass(frozen=True)
class StageSpec:
    """One step of a design hierarchy."""
    stage_id: str
    condition: str
    target_group: str
    learn: Tuple[str, ...]
    known: Tuple[KnownRef, ...] = ()
    lambda_: Optional[float] = None
    block_name: Optional[str] = None
    # additive correction over groups that may already carry frozen blocks
    composite: bool = False

    def __post_init__(self):
        if not self.learn:
            raise HierarchyError(f"Stage '{self.stage_id}' learns no groups")
        if len(set(self.learn)) != len(self.learn):
            raise HierarchyError(f"Stage '{self.stage_id}' lists a learned group twice")
        if self.lambda_ is not None and self.lambda_ < 0:
            raise HierarchyError(f"Stage '{self.stage_id}': lambda must be >= 0")
        if not self.block_name:
            object.__setattr__(self, "block_name", self.stage_id)

    @property
    def depends_on(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(ref.stage for ref in self.known))

    @classmethod
    def from_dict(cls, data: Dict) -> "StageSpec":
        try:
            lam = data.get("lambda")
            learn = data.get("learn", ())
            if isinstance(learn, str):
                learn = [learn]
            return cls(
                stage_id=str(data["stage_id"]),
                condition=str(data["condition"]),
                target_group=str(data["target_group"]),
                learn=tuple(str(g) for g in learn),
                known=tuple(KnownRef.from_dict(k) for k in data.get("known") or ()),
                lambda_=None if lam is None else float(lam),
                block_name=data.get("block_name"),
                composite=bool(data.get("composite", False)),
            )
        except KeyError as e:
            raise HierarchyError(f"Stage definition lacks field {e}: {data}") from e
        except (TypeError, ValueError, AttributeError) as e:
            raise HierarchyError(f"Malformed stage definition {data!r}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stage_id": self.stage_id,
            "block_name": self.block_name,
            "condition": self.condition,
            "target_group": self.target_group,
            "known": [k.to_dict() for k in self.known],
            "learn": list(self.learn),
            "lambda": self.lambda_,
            "composite": self.composite,
        }


@dataclass(frozen=True)
class Hierarchy:
    """Partition plus ordered stages, as read from a hierarchy file."""
    partition: Partition
    stages: Tuple[StageSpec, ...]
    lambda_: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lambda_,
            "partition": self.partition.to_dict(),
            "stages": [s.to_dict() for s in self.stages],
        }


@dataclass(frozen=True)
class FrozenTerm:
    """A frozen block as applied within a later stage."""
    stage: str
    group: str
    col_labels: Tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class StageResult:
    """Learned blocks of one stage.

    ``matrix`` is the learned block over all ``spec.learn`` groups concatenated in
    declared order; ``group_blocks`` holds read-only column slices of it.
    """
    spec: StageSpec
    matrix: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    group_blocks: Dict[str, np.ndarray]
    frozen: Tuple[FrozenTerm, ...]
    residual_fro: float
    lambda_: float
    state_labels: Tuple[str, ...] = ()
    column_count: int = 0

    def __post_init__(self):
        p = len(self.row_labels)
        if self.matrix.shape != (p, len(self.col_labels)):
            raise DataError(
                f"Stage '{self.spec.stage_id}' block is {self.matrix.shape}, "
                f"labels give {(p, len(self.col_labels))}"
            )
        for term in self.frozen:
            if term.matrix.shape[0] != p:
                raise DataError(
                    f"Frozen block {term.stage}:{term.group} has {term.matrix.shape[0]} rows, "
                    f"stage '{self.spec.stage_id}' targets {p}"
                )

    @property
    def block_name(self) -> str:
        return self.spec.block_name

    def group_col_labels(self, group_id: str) -> Tuple[str, ...]:
        start = 0
        for gid in self.spec.learn:
            width = self.group_blocks[gid].shape[1]
            if gid == group_id:
                return self.col_labels[start:start + width]
            start += width
        raise HierarchyError(not_found(
            f"Group in stage '{self.spec.stage_id}'", group_id, self.spec.learn
        ))


@dataclass(frozen=True)
class StructuredModel:
    """Partition, per-stage results in execution order, and the stage dependency edges."""
    partition: Partition
    stages: Tuple[StageResult, ...]
    provenance: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def stage_ids(self) -> List[str]:
        return [s.spec.stage_id for s in self.stages]

    @property
    def block_names(self) -> List[str]:
        return [s.block_name for s in self.stages]

    def stage(self, stage_id: str) -> StageResult:
        for s in self.stages:
            if s.spec.stage_id == stage_id:
                return s
        raise HierarchyError(not_found("Stage", stage_id, self.stage_ids))

    def block(self, block_name: str) -> StageResult:
        for s in self.stages:
            if s.block_name == block_name:
                return s
        raise HierarchyError(not_found("Block", block_name, self.block_names))

    def group_block(self, stage_id: str, group_id: str) -> np.ndarray:
        result = self.stage(stage_id)
        if group_id not in result.group_blocks:
            raise HierarchyError(not_found(
                f"Group in stage '{stage_id}'", group_id, result.group_blocks
            ))
        return result.group_blocks[group_id]
