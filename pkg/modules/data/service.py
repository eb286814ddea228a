"""
Expression ingestion and snapshot-pair assembly.

Usage:
    from modules.data import load_manifest, load_expression_table, build_snapshot_pairs

    manifest = load_manifest(Path("manifest.json"))
    ensemble = load_expression_table(Path("expression.csv"), manifest)
    pair = build_snapshot_pairs(ensemble, "wt")
"""
import difflib
import json
import logging
from pathlib import Path
from typing import IO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from common.errors import ConfigError, DataError, UnknownVariableError
from .models import (
    ColumnProvenance,
    ConditionManifest,
    Sample,
    SampleKey,
    SnapshotEnsemble,
    SnapshotPair,
    frozen_array,
)

logger = logging.getLogger(__name__)

TableSource = Union[str, Path, IO[str]]


# ---------------------------------------------------------------------------
# 1) Loading
# ---------------------------------------------------------------------------

def load_manifest(path: Path) -> ConditionManifest:
    """Read a ConditionManifest JSON file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"Manifest {path} is not valid JSON: {e}") from e
    return ConditionManifest.from_dict(data)


def _parse_cell(cell: str, variable: str, sample: str) -> float:
    # float() takes "1_000"; the table format has no digit separators
    if "_" in cell:
        raise DataError(f"Non-numeric cell {cell!r} at variable '{variable}', sample '{sample}'")
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"Non-numeric cell {cell!r} at variable '{variable}', sample '{sample}'")
    if not np.isfinite(value):
        raise DataError(f"Non-finite cell {cell!r} at variable '{variable}', sample '{sample}'")
    return value


def load_expression_table(
    table_source: TableSource, manifest: ConditionManifest
) -> SnapshotEnsemble:
    """Parse an ``id,<sample>,...`` CSV into a SnapshotEnsemble.

    Samples are reordered lexicographically by (condition, timepoint, replicate).
    Cells are parsed with Python's correctly rounded ``float`` so values survive a
    write/read cycle unchanged.
    """
    if isinstance(table_source, (str, Path)) and not Path(table_source).is_file():
        raise ConfigError(f"Expression table not found: {table_source}")
    try:
        raw = pd.read_csv(table_source, header=None, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Cannot parse expression table: {e}") from e

    if raw.shape[0] < 2 or raw.shape[1] < 2:
        raise DataError("Expression table needs a header row, an id column and one sample column")

    header = [str(h).strip() for h in raw.iloc[0, 1:]]
    if len(set(header)) != len(header):
        raise DataError(f"Duplicate sample names in header: {header}")
    variable_ids = tuple(str(v).strip() for v in raw.iloc[1:, 0])

    unmapped = [name for name in header if name not in manifest.samples]
    if unmapped:
        raise DataError(f"Unmapped sample(s) not in manifest: {unmapped}")
    absent = sorted(set(manifest.samples) - set(header))
    if absent:
        raise DataError(f"Manifest sample(s) missing from table: {absent}")

    body = raw.iloc[1:, 1:].to_numpy()
    samples = []
    for j, name in enumerate(header):
        key = manifest.samples[name]
        values = [_parse_cell(body[i, j], variable_ids[i], name) for i in range(len(variable_ids))]
        samples.append(
            Sample(key.condition, key.timepoint, key.replicate, frozen_array(values))
        )
    samples.sort(key=lambda s: s.key)

    ensemble = SnapshotEnsemble(variable_ids=variable_ids, samples=tuple(samples))
    logger.info(
        f"Loaded {len(variable_ids)} variables x {len(samples)} samples "
        f"({len(ensemble.condition_ids)} conditions)"
    )
    return ensemble


def expression_frame(
    ensemble: SnapshotEnsemble,
    sample_names: Optional[Sequence[str]] = None,
) -> Tuple[pd.DataFrame, ConditionManifest]:
    """Table + manifest for an ensemble; default names are ``<condition>_t<t>_r<r>``."""
    if sample_names is None:
        sample_names = [f"{s.condition}_t{s.timepoint}_r{s.replicate}" for s in ensemble.samples]
    frame = pd.DataFrame(
        ensemble.matrix(),
        index=pd.Index(ensemble.variable_ids, name="id"),
        columns=list(sample_names),
    )
    manifest = ConditionManifest(
        samples={
            name: SampleKey(s.condition, s.timepoint, s.replicate)
            for name, s in zip(sample_names, ensemble.samples)
        }
    )
    return frame, manifest


def write_expression_table(ensemble: SnapshotEnsemble, path: Path) -> ConditionManifest:
    """Write the table CSV and return the manifest that maps its sample names."""
    frame, manifest = expression_frame(ensemble)
    Path(path).write_text(frame.to_csv(lineterminator="\n"), encoding="utf-8")
    return manifest


# ---------------------------------------------------------------------------
# 2) Restructuring
# ---------------------------------------------------------------------------

def select_variables(ensemble: SnapshotEnsemble, ids: Sequence[str]) -> SnapshotEnsemble:
    """Restrict to ``ids`` in the requested order."""
    index = {v: i for i, v in enumerate(ensemble.variable_ids)}
    missing = [v for v in ids if v not in index]
    if missing:
        suggestions = {
            m: difflib.get_close_matches(m, ensemble.variable_ids, n=3) for m in missing
        }
        raise UnknownVariableError(missing, suggestions)

    rows = [index[v] for v in ids]
    samples = tuple(
        Sample(s.condition, s.timepoint, s.replicate, frozen_array(s.values[rows]))
        for s in ensemble.samples
    )
    return SnapshotEnsemble(variable_ids=tuple(ids), samples=samples)


def log2_transform(ensemble: SnapshotEnsemble) -> SnapshotEnsemble:
    """log2(x + 1) of every value."""
    samples = []
    for s in ensemble.samples:
        if np.any(s.values <= -1):
            raise DataError(f"log2(x+1) undefined for values <= -1 in sample {s.key}")
        samples.append(
            Sample(s.condition, s.timepoint, s.replicate, frozen_array(np.log2(s.values + 1.0)))
        )
    return SnapshotEnsemble(variable_ids=ensemble.variable_ids, samples=tuple(samples))


def build_snapshot_pairs(ensemble: SnapshotEnsemble, condition: str) -> SnapshotPair:
    """One (past, future) column per replicate and consecutive timepoint pair.

    Columns are ordered by replicate, then timepoint.
    """
    if condition not in ensemble.condition_ids:
        raise DataError(
            f"Condition '{condition}' not found. Available: {ensemble.condition_ids}"
        )
    timepoints = ensemble.timepoints(condition)
    if len(timepoints) < 2:
        raise DataError(
            f"Condition '{condition}' has a single timepoint; pairs need at least two"
        )

    past, future, provenance = [], [], []
    for replicate in ensemble.replicates(condition):
        for t0, t1 in zip(timepoints[:-1], timepoints[1:]):
            past.append(ensemble.sample(condition, t0, replicate).values)
            future.append(ensemble.sample(condition, t1, replicate).values)
            provenance.append(ColumnProvenance(condition, replicate, (t0, t1)))

    logger.debug(f"Condition '{condition}': {len(past)} snapshot pairs")
    return SnapshotPair(
        labels=ensemble.variable_ids,
        past=frozen_array(np.column_stack(past)),
        future=frozen_array(np.column_stack(future)),
        column_provenance=tuple(provenance),
    )


def pair_from_trajectory(
    states: np.ndarray,
    labels: Sequence[str],
    condition: str = "trajectory",
    replicate: int = 1,
) -> SnapshotPair:
    """Consecutive columns of one trajectory (d × (N+1)) as N snapshot pairs."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] < 2:
        raise DataError("A trajectory needs at least two time columns")
    steps = states.shape[1] - 1
    return SnapshotPair(
        labels=tuple(labels),
        past=frozen_array(states[:, :-1]),
        future=frozen_array(states[:, 1:]),
        column_provenance=tuple(
            ColumnProvenance(condition, replicate, (t, t + 1)) for t in range(steps)
        ),
    )


def trajectory_ensemble(
    states: np.ndarray,
    labels: Sequence[str],
    condition: str = "trajectory",
    replicate: int = 1,
) -> SnapshotEnsemble:
    """A trajectory as a single-replicate ensemble (timepoints 0..N)."""
    states = np.asarray(states, dtype=float)
    samples = tuple(
        Sample(condition, t, replicate, frozen_array(states[:, t])) for t in range(states.shape[1])
    )
    return SnapshotEnsemble(variable_ids=tuple(labels), samples=samples)


# ---------------------------------------------------------------------------
# 3) Debug dump
# ---------------------------------------------------------------------------

def pair_dump_frame(pair: SnapshotPair) -> pd.DataFrame:
    """One row per column: provenance, then past and future values."""
    records: List[Dict] = []
    for j in range(pair.column_count):
        prov = pair.column_provenance[j] if pair.column_provenance else None
        record = {
            "column": j,
            "condition": prov.condition if prov else "",
            "replicate": prov.replicate if prov else 0,
            "step": f"{prov.step[0]}->{prov.step[1]}" if prov else "",
            "augmented": int(prov.is_augmented) if prov else 0,
            "source_column": prov.source_column if prov and prov.is_augmented else j,
        }
        record.update({f"past:{label}": pair.past[i, j] for i, label in enumerate(pair.labels)})
        record.update({f"future:{label}": pair.future[i, j] for i, label in enumerate(pair.labels)})
        records.append(record)
    return pd.DataFrame.from_records(records).set_index("column")


def write_pair_dump(pair: SnapshotPair, path: Path) -> Path:
    path = Path(path)
    path.write_text(pair_dump_frame(pair).to_csv(lineterminator="\n"), encoding="utf-8")
    return path
