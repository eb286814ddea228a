"""
Toy host + circuit transcriptome with the layout of a replicated two-timepoint
RNAseq experiment.

Host genes (``H001``…) share one baseline profile in every strain and replicate.
Inducer groups read 1.0 wherever they are present; other circuit parts are drawn
per replicate as ``level * U(0.5, 1.5)``. Each strain advances by
x_{t+1} = x_t + (B restricted to the strain's groups) x_t, and measurements get
additive gaussian noise of ``noise_sigma``.
"""
import logging
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from common.config import ToySettings
from common.errors import ConfigError
from modules.data.augment import make_rng
from modules.data.models import Sample, SnapshotEnsemble, frozen_array
from modules.structured.models import Group, Partition
from .blocks import assemble_increment, group_slices, split_blocks
from .models import BlockPlan, ToyRnaseq

logger = logging.getLogger(__name__)

HOST = "H"
INDUCERS = ("I", "A")

# strain -> groups present, bottom-up through the NAND design
NAND_CONDITIONS: Dict[str, Sequence[str]] = {
    "wt": ("H",),
    "iptg": ("H", "I"),
    "ara": ("H", "A"),
    "iptg_phlf": ("H", "I", "P", "Y"),
    "ara_icar": ("H", "A", "R", "Y"),
    "nand": ("H", "I", "A", "P", "R", "Y"),
}


def toy_partition(n_genes: int, groups: Mapping[str, int]) -> Partition:
    width = max(3, len(str(n_genes)))
    host = Group(HOST, tuple(f"{HOST}{i:0{width}d}" for i in range(1, n_genes + 1)))
    circuit = [Group(g, tuple(f"{g}{i}" for i in range(1, n + 1))) for g, n in groups.items()]
    return Partition((host, *circuit))


def make_toy_rnaseq(
    n_genes: int,
    groups: Mapping[str, int],
    planted_blocks: Sequence[BlockPlan],
    conditions: Optional[Mapping[str, Sequence[str]]] = None,
    timepoints: int = 2,
    replicates: int = 4,
    noise_sigma: float = 0.0,
    seed: int = 0,
    inducers: Sequence[str] = INDUCERS,
) -> ToyRnaseq:
    """Ensemble, partition and planted increment blocks (keyed ``"<rows>-<cols>"``)."""
    if n_genes < 1 or timepoints < 2 or replicates < 1:
        raise ConfigError("Toy data needs n_genes >= 1, timepoints >= 2 and replicates >= 1")
    if HOST in groups:
        raise ConfigError(f"Group id '{HOST}' is reserved for host genes")
    if noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {noise_sigma}")
    conditions = dict(conditions or NAND_CONDITIONS)

    partition = toy_partition(n_genes, groups)
    dims = {g.group_id: len(g.members) for g in partition.groups}
    for plan in planted_blocks:
        for gid in (plan.rows, plan.cols):
            if gid not in dims:
                raise ConfigError(
                    f"Block {plan.key} names unknown group '{gid}'. Available: {list(dims)}"
                )
    for name, present in conditions.items():
        unknown = [g for g in present if g not in dims]
        if unknown:
            raise ConfigError(f"Condition '{name}' names unknown groups {unknown}")

    rng = make_rng(seed)
    increment = assemble_increment(dims, planted_blocks, rng)
    slices = group_slices(dims)
    d = increment.shape[0]

    baseline = rng.uniform(1.0, 10.0, size=dims[HOST])
    levels = {g: rng.uniform(1.0, 5.0) for g in dims if g != HOST}

    samples = []
    for condition, present in conditions.items():
        mask = np.zeros(d, dtype=bool)
        for gid in present:
            mask[slices[gid]] = True
        step = increment * np.outer(mask, mask)

        for replicate in range(1, replicates + 1):
            state = np.zeros(d)
            for gid in present:
                if gid == HOST:
                    state[slices[gid]] = baseline
                elif gid in inducers:
                    state[slices[gid]] = 1.0
                else:
                    state[slices[gid]] = levels[gid] * rng.uniform(0.5, 1.5, size=dims[gid])
            for t in range(timepoints):
                observed = state.copy()
                if noise_sigma > 0:
                    observed[mask] += noise_sigma * rng.standard_normal(int(mask.sum()))
                samples.append(Sample(condition, t, replicate, frozen_array(observed)))
                state = state + step @ state

    ensemble = SnapshotEnsemble(variable_ids=tuple(partition.labels), samples=tuple(samples))
    logger.info(
        f"Toy transcriptome: {n_genes} host genes, {d - n_genes} circuit variables, "
        f"{len(conditions)} strains x {replicates} replicates x {timepoints} timepoints"
    )
    truth = split_blocks(increment, dims)
    return ToyRnaseq(
        ensemble=ensemble,
        partition=partition,
        ground_truth={plan.key: truth[plan.key] for plan in planted_blocks},
    )


def toy_from_settings(settings: ToySettings, seed: Optional[int] = None) -> ToyRnaseq:
    return make_toy_rnaseq(
        n_genes=settings.n_genes,
        groups=settings.groups,
        planted_blocks=[BlockPlan.from_settings(b) for b in settings.blocks],
        conditions=settings.conditions,
        timepoints=settings.timepoints,
        replicates=settings.replicates,
        noise_sigma=settings.noise_sigma,
        seed=settings.seed if seed is None else seed,
    )
