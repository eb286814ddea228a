"""Planted block-linear systems with known ground truth."""
import logging
from typing import Dict, Optional, Sequence

import numpy as np

from common.errors import DataError
from modules.data.augment import make_rng
from .models import BlockPlan, BlockSystemSpec, BlockTrajectory

logger = logging.getLogger(__name__)


def group_slices(group_dims: Dict[str, int]) -> Dict[str, slice]:
    slices, start = {}, 0
    for gid, dim in group_dims.items():
        slices[gid] = slice(start, start + dim)
        start += dim
    return slices


def planted_block(plan: BlockPlan, p: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """One p×q block drawn as described by ``plan``."""
    block = np.zeros((p, q))
    if plan.kind == "zero" or plan.gain == 0:
        return block
    n_rows = max(1, int(round(plan.row_fraction * p)))
    rows = np.sort(rng.choice(p, size=n_rows, replace=False))
    mask = rng.random((n_rows, q)) < plan.density
    forced = rng.integers(0, q, size=n_rows)
    mask[np.arange(n_rows), forced] |= ~mask.any(axis=1)
    signs = rng.choice([-1.0, 1.0], size=(n_rows, q))
    values = plan.gain * signs * rng.uniform(0.5, 1.0, size=(n_rows, q))
    block[rows] = np.where(mask, values, 0.0)
    return block


def assemble_increment(
    group_dims: Dict[str, int], plans: Sequence[BlockPlan], rng: np.random.Generator
) -> np.ndarray:
    """Full increment matrix B from planted blocks, drawn in declared order."""
    slices = group_slices(group_dims)
    d = sum(group_dims.values())
    increment = np.zeros((d, d))
    for plan in plans:
        rs, cs = slices[plan.rows], slices[plan.cols]
        increment[rs, cs] += planted_block(plan, rs.stop - rs.start, cs.stop - cs.start, rng)
    return increment


def split_blocks(matrix: np.ndarray, group_dims: Dict[str, int]) -> Dict[str, np.ndarray]:
    """Every (row group, col group) block of ``matrix``, keyed ``"<rows>-<cols>"``."""
    slices = group_slices(group_dims)
    return {
        f"{r}-{c}": matrix[rs, cs].copy()
        for r, rs in slices.items()
        for c, cs in slices.items()
    }


def block_system_operator(spec: BlockSystemSpec, rng: np.random.Generator) -> np.ndarray:
    """I + B, rescaled to the spectral-radius cap when it exceeds it."""
    operator = np.eye(sum(spec.group_dims.values())) + assemble_increment(
        spec.group_dims, spec.blocks, rng
    )
    radius = float(np.max(np.abs(np.linalg.eigvals(operator))))
    if radius > spec.spectral_radius_cap:
        logger.debug(f"Rescaling operator from spectral radius {radius:.4f}")
        operator *= spec.spectral_radius_cap / radius
    return operator


def simulate_block_system(
    spec: BlockSystemSpec,
    steps: int,
    x0: Optional[np.ndarray] = None,
) -> BlockTrajectory:
    """x_{t+1} = A x_t + w_t with w_t ~ N(0, noise_sigma²); random x0 when none is given.

    Draw order from the seeded stream: planted blocks, then x0, then noise.
    """
    if steps < 1:
        raise DataError(f"steps must be positive, got {steps}")
    rng = make_rng(spec.seed)
    operator = block_system_operator(spec, rng)
    d = operator.shape[0]

    if x0 is None:
        x0 = rng.standard_normal(d)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape[0] != d:
        raise DataError(f"x0 has length {x0.shape[0]}, system has {d} states")
    noise = spec.noise_sigma * rng.standard_normal((d, steps)) if spec.noise_sigma > 0 else None

    states = np.empty((d, steps + 1))
    states[:, 0] = x0
    for t in range(steps):
        states[:, t + 1] = operator @ states[:, t]
        if noise is not None:
            states[:, t + 1] += noise[:, t]

    return BlockTrajectory(
        states=states,
        labels=spec.labels,
        operator=operator,
        blocks=split_blocks(operator, spec.group_dims),
    )
