"""Koopman model and spectrum containers."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from common.errors import DataError
from modules.data.models import AugmentationConfig
from modules.observables import ObservableDictionary


@dataclass(frozen=True)
class FitMeta:
    """How a model was fitted."""
    lambda_: float
    residual_fro: float
    column_count: int
    augmentation: Optional[AugmentationConfig] = None
    rank: int = 0
    rank_deficient: bool = False
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lambda_,
            "residual_fro": self.residual_fro,
            "column_count": self.column_count,
            "augmentation": self.augmentation.to_dict() if self.augmentation else None,
            "rank": self.rank,
            "rank_deficient": self.rank_deficient,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "FitMeta":
        aug = data.get("augmentation")
        return cls(
            lambda_=float(data["lambda"]),
            residual_fro=float(data["residual_fro"]),
            column_count=int(data["column_count"]),
            augmentation=AugmentationConfig.from_dict(aug) if aug else None,
            rank=int(data.get("rank", 0)),
            rank_deficient=bool(data.get("rank_deficient", False)),
            warnings=tuple(data.get("warnings", ())),
        )


@dataclass(frozen=True)
class KoopmanModel:
    """Approximate Koopman matrix: rows = future observables, columns = past observables."""
    matrix: np.ndarray
    dictionary: ObservableDictionary
    fit_meta: FitMeta
    row_labels: Tuple[str, ...] = field(default=())
    col_labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        q = self.dictionary.output_dim
        if self.matrix.shape != (q, q):
            raise DataError(f"Koopman matrix is {self.matrix.shape}, dictionary needs {(q, q)}")
        # labels default to the dictionary's
        if not self.row_labels:
            object.__setattr__(self, "row_labels", self.dictionary.labels)
        if not self.col_labels:
            object.__setattr__(self, "col_labels", self.dictionary.labels)
        if self.row_labels != self.dictionary.labels or self.col_labels != self.dictionary.labels:
            raise DataError("Koopman labels must match the dictionary labels")


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues sorted by descending modulus, right eigenvectors as columns."""
    eigenvalues: np.ndarray
    modes: np.ndarray
    defective: bool = False

    def continuous_eigenvalues(self, dt: float) -> np.ndarray:
        """log(λ)/dt; zero eigenvalues map to -inf real part."""
        with np.errstate(divide="ignore"):
            return np.log(self.eigenvalues.astype(complex)) / dt

    def top(self, n: int = 5) -> np.ndarray:
        return self.eigenvalues[:n]
