"""
Hostimpact Test Configuration

Shared fixtures for all tests.
"""
import json
from pathlib import Path
from typing import Dict

import numpy as np
import pytest

from common.config import clear_cache
from modules.data.models import Sample, SnapshotEnsemble, SnapshotPair, frozen_array
from modules.data.service import pair_from_trajectory


@pytest.fixture(autouse=True)
def fresh_config_cache():
    """Config documents are cached by path; tmp_path files must not leak between tests."""
    clear_cache()
    yield
    clear_cache()


# =============================================================================
# FIXTURES: Sample Data
# =============================================================================

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_ensemble() -> SnapshotEnsemble:
    """Three genes, two conditions, two replicates, three timepoints."""
    samples = []
    for condition, offset in (("ctrl", 0.0), ("treated", 10.0)):
        for replicate in (1, 2):
            for t in range(3):
                values = [offset + replicate + t, 2.0 * (t + 1), 0.5 * replicate]
                samples.append(Sample(condition, t, replicate, frozen_array(values)))
    return SnapshotEnsemble(variable_ids=("g1", "g2", "g3"), samples=tuple(samples))


@pytest.fixture
def stable_map(rng) -> np.ndarray:
    """Random 5×5 map with spectral radius 0.9."""
    A = rng.standard_normal((5, 5))
    return 0.9 * A / np.max(np.abs(np.linalg.eigvals(A)))


@pytest.fixture
def linear_pair(rng, stable_map) -> SnapshotPair:
    """Twenty independent snapshots pushed through ``stable_map``."""
    past = rng.standard_normal((5, 20))
    return SnapshotPair(
        labels=tuple(f"x{i}" for i in range(5)),
        past=frozen_array(past),
        future=frozen_array(stable_map @ past),
    )


@pytest.fixture
def trajectory_pair(stable_map) -> SnapshotPair:
    states = np.empty((5, 21))
    states[:, 0] = 1.0
    for t in range(20):
        states[:, t + 1] = stable_map @ states[:, t]
    return pair_from_trajectory(states, [f"x{i}" for i in range(5)], "system")


# =============================================================================
# FIXTURES: Files on disk
# =============================================================================

@pytest.fixture
def table_files(tmp_path) -> Dict[str, Path]:
    """Expression CSV + manifest for two genes over two timepoints and two replicates."""
    table = tmp_path / "expression.csv"
    table.write_text(
        "id,s_t1_r2,s_t0_r1,s_t1_r1,s_t0_r2\n"
        "geneA,2.5,1.0,2.0,1.5\n"
        "geneB,0.25,0.5,0.125,1e-3\n",
        encoding="utf-8",
    )
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "s_t0_r1": {"condition": "wt", "timepoint": 0, "replicate": 1},
        "s_t1_r1": {"condition": "wt", "timepoint": 1, "replicate": 1},
        "s_t0_r2": {"condition": "wt", "timepoint": 0, "replicate": 2},
        "s_t1_r2": {"condition": "wt", "timepoint": 1, "replicate": 2},
    }))
    return {"table": table, "manifest": manifest}
