"""
Data Models
===========
Snapshot ensembles, snapshot pairs and the augmentation config.

All arrays held by these objects are marked read-only after construction.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.errors import ConfigError, DataError


def frozen_array(values: Any) -> np.ndarray:
    """Float copy of values that refuses in-place writes."""
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SampleKey:
    """Where a sample sits in the experiment."""
    condition: str
    timepoint: int
    replicate: int

    @classmethod
    def from_dict(cls, data: Dict) -> "SampleKey":
        try:
            return cls(
                condition=str(data["condition"]),
                timepoint=int(data["timepoint"]),
                replicate=int(data["replicate"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Invalid manifest entry {data!r}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "condition": self.condition,
            "timepoint": self.timepoint,
            "replicate": self.replicate,
        }


@dataclass(frozen=True)
class ConditionManifest:
    """Sample name → (condition, timepoint, replicate)."""
    samples: Dict[str, SampleKey]

    @classmethod
    def from_dict(cls, data: Dict) -> "ConditionManifest":
        if not isinstance(data, dict):
            raise DataError("Manifest must be a JSON object keyed by sample name")
        return cls(samples={str(name): SampleKey.from_dict(entry) for name, entry in data.items()})

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        return {name: key.to_dict() for name, key in self.samples.items()}


@dataclass(frozen=True)
class Sample:
    """One measured state vector."""
    condition: str
    timepoint: int
    replicate: int
    values: np.ndarray

    @property
    def key(self) -> Tuple[str, int, int]:
        return (self.condition, self.timepoint, self.replicate)


@dataclass(frozen=True)
class SnapshotEnsemble:
    """Labelled variables × (condition, timepoint, replicate) measurements."""
    variable_ids: Tuple[str, ...]
    samples: Tuple[Sample, ...]

    def __post_init__(self):
        n = len(self.variable_ids)
        if len(set(self.variable_ids)) != n:
            seen, dupes = set(), []
            for v in self.variable_ids:
                if v in seen:
                    dupes.append(v)
                seen.add(v)
            raise DataError(f"Duplicate variable ids: {dupes}")

        keys = set()
        for s in self.samples:
            if s.values.shape != (n,):
                raise DataError(
                    f"Sample {s.key} has {s.values.shape[0]} values, expected {n}"
                )
            if not np.all(np.isfinite(s.values)):
                raise DataError(f"Sample {s.key} contains non-finite values")
            if s.key in keys:
                raise DataError(f"Duplicate sample {s.key}")
            keys.add(s.key)

        for condition in self.condition_ids:
            series = {}
            for s in self.samples:
                if s.condition == condition:
                    series.setdefault(s.timepoint, set()).add(s.replicate)
            reference = set.union(*series.values())
            for t, reps in sorted(series.items()):
                if reps != reference:
                    missing = sorted(reference - reps)
                    raise DataError(
                        f"Incomplete replicate series in condition '{condition}': "
                        f"timepoint {t} lacks replicates {missing}"
                    )

    @property
    def condition_ids(self) -> List[str]:
        return sorted({s.condition for s in self.samples})

    def timepoints(self, condition: str) -> List[int]:
        return sorted({s.timepoint for s in self.samples if s.condition == condition})

    def replicates(self, condition: str) -> List[int]:
        return sorted({s.replicate for s in self.samples if s.condition == condition})

    def sample(self, condition: str, timepoint: int, replicate: int) -> Sample:
        for s in self.samples:
            if s.key == (condition, timepoint, replicate):
                return s
        raise DataError(f"No sample {(condition, timepoint, replicate)}")

    def matrix(self) -> np.ndarray:
        """Variables × samples, in sample order."""
        if not self.samples:
            return np.zeros((len(self.variable_ids), 0))
        return np.column_stack([s.values for s in self.samples])


@dataclass(frozen=True)
class ColumnProvenance:
    """Origin of one snapshot-pair column."""
    condition: str
    replicate: int
    step: Tuple[int, int]
    is_augmented: bool = False
    source_column: Optional[int] = None


@dataclass(frozen=True)
class SnapshotPair:
    """Aligned past/future matrices; column j of future succeeds column j of past."""
    labels: Tuple[str, ...]
    past: np.ndarray
    future: np.ndarray
    column_provenance: Tuple[ColumnProvenance, ...] = field(default=())

    def __post_init__(self):
        if self.past.ndim != 2 or self.future.ndim != 2:
            raise DataError("Snapshot matrices must be two-dimensional")
        if self.past.shape[1] != self.future.shape[1]:
            raise DataError(
                f"Past has {self.past.shape[1]} columns, future has {self.future.shape[1]}"
            )
        if self.past.shape[0] != len(self.labels) or self.future.shape[0] != len(self.labels):
            raise DataError(
                f"Snapshot rows ({self.past.shape[0]}, {self.future.shape[0]}) "
                f"do not match {len(self.labels)} labels"
            )
        if self.column_provenance and len(self.column_provenance) != self.past.shape[1]:
            raise DataError("Column provenance must describe every column")
        for j, prov in enumerate(self.column_provenance):
            if prov.is_augmented and (prov.source_column is None or prov.source_column >= j):
                raise DataError(f"Augmented column {j} must reference an earlier original column")

    @property
    def column_count(self) -> int:
        return self.past.shape[1]

    @property
    def augmented_count(self) -> int:
        return sum(1 for p in self.column_provenance if p.is_augmented)

    def row_indices(self, labels: Sequence[str]) -> List[int]:
        index = {label: i for i, label in enumerate(self.labels)}
        missing = [label for label in labels if label not in index]
        if missing:
            raise DataError(f"Labels not present in snapshot pair: {missing}")
        return [index[label] for label in labels]

    def select_rows(self, labels: Sequence[str]) -> "SnapshotPair":
        rows = self.row_indices(labels)
        return SnapshotPair(
            labels=tuple(labels),
            past=frozen_array(self.past[rows]),
            future=frozen_array(self.future[rows]),
            column_provenance=self.column_provenance,
        )


DISTRIBUTIONS = ("gaussian", "uniform")


@dataclass(frozen=True)
class AugmentationConfig:
    """How many artificial pairs to add per original column, and how large they are.

    ``magnitude`` is relative: the per-entry perturbation std of a column x is
    ``magnitude * ||x||_2 / sqrt(d)``. Gaussian draws are clamped at ``clamp_sigmas``.
    """
    count_per_pair: int = 25
    magnitude: float = 1e-2
    distribution: str = "gaussian"
    seed: int = 0
    clamp_sigmas: float = 6.0

    def __post_init__(self):
        if self.count_per_pair < 0:
            raise ConfigError(f"count_per_pair must be >= 0, got {self.count_per_pair}")
        if self.count_per_pair > 0 and not self.magnitude > 0:
            raise ConfigError(f"magnitude must be > 0, got {self.magnitude}")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(
                f"Unknown distribution '{self.distribution}'. Available: {list(DISTRIBUTIONS)}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.clamp_sigmas > 0:
            raise ConfigError(f"clamp_sigmas must be > 0, got {self.clamp_sigmas}")

    @classmethod
    def from_dict(cls, data: Dict) -> "AugmentationConfig":
        return cls(
            count_per_pair=int(data.get("count", data.get("count_per_pair", 25))),
            magnitude=float(data.get("magnitude", 1e-2)),
            distribution=data.get("distribution", "gaussian"),
            seed=int(data.get("seed", 0)),
            clamp_sigmas=float(data.get("clamp_sigmas", 6.0)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "count": self.count_per_pair,
            "magnitude": self.magnitude,
            "distribution": self.distribution,
            "seed": self.seed,
            "clamp_sigmas": self.clamp_sigmas,
        }
