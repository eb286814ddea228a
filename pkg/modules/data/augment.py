"""Sparse-data augmentation: small-perturbation copies of snapshot pairs.

Random numbers come from ``numpy.random.Generator(numpy.random.Philox(seed))``.
Philox is counter-based, so a given seed yields the same stream on every platform.
Draw order is fixed: all past perturbations first, then all future perturbations,
each as an array of shape (count, columns, rows).
"""
import logging

import numpy as np

from .models import AugmentationConfig, ColumnProvenance, SnapshotPair, frozen_array

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _unit_draws(rng: np.random.Generator, cfg: AugmentationConfig, shape) -> np.ndarray:
    """Zero-mean, unit-variance draws; gaussian ones clamped at ``clamp_sigmas``."""
    if cfg.distribution == "gaussian":
        draws = rng.standard_normal(shape)
        clipped = np.abs(draws) > cfg.clamp_sigmas
        if clipped.any():
            logger.debug(f"Clamped {int(clipped.sum())} perturbation draws")
        return np.clip(draws, -cfg.clamp_sigmas, cfg.clamp_sigmas)
    # uniform on [-sqrt(3), sqrt(3)] has unit variance
    return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), shape)


def _perturb(columns: np.ndarray, draws: np.ndarray, magnitude: float) -> np.ndarray:
    """columns: d × m, draws: count × m × d → d × (count·m), grouped by source column."""
    d, m = columns.shape
    sigma = magnitude * np.linalg.norm(columns, axis=0) / np.sqrt(d)
    deltas = draws * sigma[np.newaxis, :, np.newaxis]
    copies = columns.T[np.newaxis, :, :] + deltas
    # order columns as (source column, copy)
    return copies.transpose(1, 0, 2).reshape(m * draws.shape[0], d).T


def augment_pairs(pair: SnapshotPair, cfg: AugmentationConfig) -> SnapshotPair:
    """Append ``cfg.count_per_pair`` perturbed copies of every original column.

    Past and future perturbations of one artificial pair are drawn independently.
    Augmented columns follow the originals, grouped by the column they perturb.
    """
    if cfg.count_per_pair == 0:
        return pair

    originals = [j for j, p in enumerate(pair.column_provenance) if not p.is_augmented] \
        if pair.column_provenance else list(range(pair.column_count))
    past = pair.past[:, originals]
    future = pair.future[:, originals]
    d, m = past.shape
    count = cfg.count_per_pair

    rng = make_rng(cfg.seed)
    past_draws = _unit_draws(rng, cfg, (count, m, d))
    future_draws = _unit_draws(rng, cfg, (count, m, d))

    new_past = _perturb(past, past_draws, cfg.magnitude)
    new_future = _perturb(future, future_draws, cfg.magnitude)

    provenance = list(pair.column_provenance) or [
        ColumnProvenance("", 0, (0, 1)) for _ in range(pair.column_count)
    ]
    for j in originals:
        source = provenance[j]
        provenance.extend(
            ColumnProvenance(source.condition, source.replicate, source.step, True, j)
            for _ in range(count)
        )

    logger.info(f"Augmented {m} pairs with {count} artificial copies each "
                f"({cfg.distribution}, magnitude={cfg.magnitude}, seed={cfg.seed})")
    return SnapshotPair(
        labels=pair.labels,
        past=frozen_array(np.hstack([pair.past, new_past])),
        future=frozen_array(np.hstack([pair.future, new_future])),
        column_provenance=tuple(provenance),
    )
