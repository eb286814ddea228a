"""
Koopman fitting, forward prediction and spectral analysis.

The objective is the squared-Frobenius ridge form
    min_K ||Ψ(X_f) - K Ψ(X_p)||_F^2 + λ ||K||_F^2
solved in closed form by :func:`modules.koopman.solver.ridge_solve`.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from common.errors import DataError, NumericalError
from common.storage import ArtifactStore, LocalDirectoryStore
from modules.data.models import AugmentationConfig, SnapshotPair, frozen_array
from modules.observables import ObservableDictionary, lift, make_dictionary
from .models import FitMeta, KoopmanModel, SpectrumResult
from .solver import ridge_solve

logger = logging.getLogger(__name__)

MODEL_FILE = "model.csv"
META_FILE = "fit_meta.json"


def _lifted(pair: SnapshotPair, dictionary: ObservableDictionary):
    if pair.past.shape[0] != dictionary.input_dim:
        raise DataError(
            f"Snapshot pair has {pair.past.shape[0]} rows, "
            f"dictionary expects {dictionary.input_dim}"
        )
    return lift(dictionary, pair.past), lift(dictionary, pair.future)


def fit_koopman(
    pair: SnapshotPair,
    dictionary: ObservableDictionary,
    lambda_: Optional[float] = None,
    augmentation: Optional[AugmentationConfig] = None,
) -> KoopmanModel:
    """Fit K on Ψ(X_p) → Ψ(X_f).

    ``lambda_=None`` uses the scale-aware default. ``augmentation`` is only recorded;
    augment the pair beforehand.
    """
    if pair.column_count < 1:
        raise DataError("Need at least one snapshot column")
    P, F = _lifted(pair, dictionary)
    K, info = ridge_solve(F, P, lambda_)

    warnings = []
    if info.lambda_ == 0 and info.rank_deficient:
        message = (
            f"rank-deficient regressors (rank {info.rank} < {P.shape[0]}): "
            f"minimum-norm solution returned"
        )
        logger.warning(message)
        warnings.append(message)

    residual = float(np.linalg.norm(F - K @ P))
    meta = FitMeta(
        lambda_=info.lambda_,
        residual_fro=residual,
        column_count=pair.column_count,
        augmentation=augmentation,
        rank=info.rank,
        rank_deficient=info.rank_deficient,
        warnings=tuple(warnings),
    )
    logger.info(
        f"Fitted {K.shape[0]}x{K.shape[1]} Koopman matrix from {pair.column_count} columns "
        f"(lambda={info.lambda_:.3e}, residual={residual:.3e})"
    )
    return KoopmanModel(matrix=frozen_array(K), dictionary=dictionary, fit_meta=meta)


def predict(model: KoopmanModel, x0: np.ndarray, steps: int) -> np.ndarray:
    """Lifted trajectory: column 0 = ψ(x0), column t+1 = K · column t."""
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape[0] != model.dictionary.input_dim:
        raise DataError(
            f"x0 has length {x0.shape[0]}, dictionary expects {model.dictionary.input_dim}"
        )
    if steps < 1:
        raise DataError(f"steps must be positive, got {steps}")
    out = np.empty((model.dictionary.output_dim, steps + 1))
    out[:, 0] = lift(model.dictionary, x0)[:, 0]
    for t in range(steps):
        out[:, t + 1] = model.matrix @ out[:, t]
    return out


def spectrum(model: KoopmanModel, defect_tolerance: float = 1e10) -> SpectrumResult:
    """Eigen-decomposition sorted by descending modulus (ties: descending imaginary part).

    The result is flagged defective when the eigenvector matrix is numerically singular
    (condition number above ``defect_tolerance``); eigenvalues are returned regardless.
    """
    eigenvalues, modes = np.linalg.eig(model.matrix)
    order = np.lexsort((-eigenvalues.imag, -np.abs(eigenvalues)))
    eigenvalues, modes = eigenvalues[order], modes[:, order]

    defective = bool(np.linalg.cond(modes) > defect_tolerance)
    if defective:
        logger.warning("Koopman matrix is not diagonalizable within tolerance")
    return SpectrumResult(eigenvalues=eigenvalues, modes=modes, defective=defective)


def one_step_residual(model: KoopmanModel, pair: SnapshotPair) -> float:
    """||Ψ(X_f) - K Ψ(X_p)||_F / ||Ψ(X_f)||_F on the given pair."""
    P, F = _lifted(pair, model.dictionary)
    denominator = np.linalg.norm(F)
    if denominator == 0:
        raise NumericalError("Future snapshot matrix has zero norm")
    return float(np.linalg.norm(F - model.matrix @ P) / denominator)


def recovery_error(model: KoopmanModel, truth: np.ndarray) -> float:
    """||K - truth||_F / ||truth||_F."""
    truth = np.asarray(truth, dtype=float)
    if truth.shape != model.matrix.shape:
        raise DataError(f"Ground truth is {truth.shape}, model is {model.matrix.shape}")
    denominator = np.linalg.norm(truth)
    if denominator == 0:
        raise NumericalError("Ground-truth operator has zero norm")
    return float(np.linalg.norm(model.matrix - truth) / denominator)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def model_frame(model: KoopmanModel) -> pd.DataFrame:
    return pd.DataFrame(
        model.matrix,
        index=pd.Index(model.row_labels, name="observable"),
        columns=list(model.col_labels),
    )


def save_model(
    model: KoopmanModel, store: ArtifactStore, extra_meta: Optional[dict] = None
) -> None:
    """Matrix CSV plus sidecar JSON (fit meta, dictionary descriptor, input labels)."""
    store.write_frame(MODEL_FILE, model_frame(model))
    meta = {
        "fit_meta": model.fit_meta.to_dict(),
        "dictionary": model.dictionary.to_descriptor(),
        "input_labels": list(model.dictionary.input_labels),
    }
    meta.update(extra_meta or {})
    store.write_json(META_FILE, meta)


def load_model(directory: Path) -> KoopmanModel:
    store = LocalDirectoryStore(directory)
    meta = store.read_json(META_FILE)
    frame = store.read_frame(MODEL_FILE)
    try:
        return KoopmanModel(
            matrix=frozen_array(frame.to_numpy(dtype=float)),
            dictionary=make_dictionary(meta["dictionary"], meta["input_labels"]),
            fit_meta=FitMeta.from_dict(meta["fit_meta"]),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise DataError(f"Malformed model in {directory}: {e!r}") from e
