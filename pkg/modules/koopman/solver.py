"""
Tikhonov-regularised least squares via the thin SVD.

Solves  min_B ||F - B P||_F^2 + lam ||B||_F^2  as  B = F V diag(s / (s^2 + lam)) U^T
where P = U diag(s) V^T. At lam == 0 singular values below ``rank_tolerance * s_max``
are dropped, which gives the minimum-norm least-squares solution.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from common.config import settings
from common.errors import DataError, NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RidgeInfo:
    lambda_: float
    rank: int
    sigma_max: float
    rank_deficient: bool


def default_lambda(regressors: np.ndarray) -> float:
    """Scale-aware default: ``default_scale * sigma_max(P)^2``."""
    regressors = np.asarray(regressors, dtype=float)
    if regressors.size == 0:
        return 0.0
    sigma_max = np.linalg.norm(regressors, ord=2)
    return float(settings()["ridge"]["default_scale"] * sigma_max**2)


def ridge_solve(
    target: np.ndarray,
    regressors: np.ndarray,
    lam: Optional[float] = None,
) -> Tuple[np.ndarray, RidgeInfo]:
    """Return B (p × q) minimising ||target - B regressors||² + lam ||B||².

    target: p × m, regressors: q × m. ``lam=None`` applies :func:`default_lambda`.
    """
    target = np.asarray(target, dtype=float)
    regressors = np.asarray(regressors, dtype=float)
    if target.ndim != 2 or regressors.ndim != 2:
        raise DataError("Ridge inputs must be matrices")
    if target.shape[1] != regressors.shape[1]:
        raise DataError(
            f"Column mismatch: target has {target.shape[1]}, regressors have {regressors.shape[1]}"
        )
    if regressors.shape[0] == 0:
        raise DataError("No regressor rows to fit")
    if target.shape[1] == 0:
        raise DataError("Need at least one snapshot column")
    if not (np.all(np.isfinite(target)) and np.all(np.isfinite(regressors))):
        raise DataError("Ridge inputs contain non-finite entries")
    if lam is None:
        lam = default_lambda(regressors)
    if lam < 0:
        raise DataError(f"lambda must be >= 0, got {lam}")

    U, s, Vt = np.linalg.svd(regressors, full_matrices=False)
    sigma_max = float(s[0]) if s.size else 0.0

    keep = s > settings()["ridge"]["rank_tolerance"] * sigma_max
    if lam == 0:
        filt = np.zeros_like(s)
        filt[keep] = 1.0 / s[keep]
    else:
        filt = s / (s**2 + lam)

    rank = int(np.count_nonzero(keep))
    rank_deficient = rank < regressors.shape[0]

    solution = (target @ Vt.T) * filt[np.newaxis, :] @ U.T
    if not np.all(np.isfinite(solution)):
        raise NumericalError("Ridge solution is not finite")

    logger.debug(
        f"ridge_solve: {target.shape[0]}x{regressors.shape[0]} from {target.shape[1]} columns, "
        f"lambda={lam:.3e}, rank={rank}"
    )
    return solution, RidgeInfo(float(lam), rank, sigma_max, rank_deficient)
