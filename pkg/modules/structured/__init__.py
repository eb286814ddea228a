"""
Structured Module
=================
Staged, block-wise DMD over a design hierarchy: learn the host block first,
freeze it, then learn each added component's interaction block from the residual.

Usage:
    from modules.structured import load_hierarchy, staged_fit, compose_step

    hierarchy = load_hierarchy(Path("config/hierarchies/nand.yaml"))
    partition = hierarchy.partition.resolve(ensemble.variable_ids)
    model = staged_fit(hierarchy.stages, datasets, partition)
    print(model.block("K_HARY").matrix.shape)
"""

from .models import (
    FrozenTerm,
    Group,
    Hierarchy,
    KnownRef,
    Partition,
    StageResult,
    StageSpec,
    StructuredModel,
)
from .hierarchy import hierarchy_from_dict, load_hierarchy, validate_stages
from .service import (
    JointComparison,
    compare_with_joint_fit,
    compose_step,
    fit_residual_block,
    fit_stage,
    residual_target,
    stage_residual,
    staged_fit,
)
from .archive import block_frame, load_archive, save_archive

__all__ = [
    # Models
    "FrozenTerm",
    "Group",
    "Hierarchy",
    "KnownRef",
    "Partition",
    "StageResult",
    "StageSpec",
    "StructuredModel",
    # Hierarchy files
    "hierarchy_from_dict",
    "load_hierarchy",
    "validate_stages",
    # Service
    "JointComparison",
    "compare_with_joint_fit",
    "compose_step",
    "fit_residual_block",
    "fit_stage",
    "residual_target",
    "stage_residual",
    "staged_fit",
    # Archive
    "block_frame",
    "load_archive",
    "save_archive",
]
