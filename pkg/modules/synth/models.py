"""Generator parameters and outputs."""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from common.config import BlockSystemSettings, OscillatorSettings, PlantedBlockSettings
from common.errors import ConfigError
from modules.data.models import SnapshotEnsemble
from modules.structured.models import Group, Partition


@dataclass(frozen=True)
class OscillatorParams:
    """Two masses between walls: wall springs k, coupling spring k_c.

    State order is (x1, v1, x2, v2).
    """
    m: float = 1.0
    k: float = 1.0
    k_c: float = 0.5
    dt: float = 0.1
    steps: int = 200
    x0: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if self.m <= 0 or self.k <= 0 or self.dt <= 0:
            raise ConfigError("Oscillator m, k and dt must be positive")
        if self.k_c < 0:
            raise ConfigError(f"Coupling k_c must be >= 0, got {self.k_c}")
        if self.steps < 1:
            raise ConfigError(f"steps must be positive, got {self.steps}")
        if len(self.x0) != 4:
            raise ConfigError(f"x0 must have 4 entries (x1, v1, x2, v2), got {len(self.x0)}")
        # the fastest mode must be resolved by the timestep
        if self.dt * math.sqrt((self.k + 2 * self.k_c) / self.m) >= math.pi:
            raise ConfigError("dt too large for the fastest oscillator mode")

    @classmethod
    def from_settings(cls, s: OscillatorSettings) -> "OscillatorParams":
        return cls(m=s.m, k=s.k, k_c=s.k_c, dt=s.dt, steps=s.steps, x0=tuple(s.x0))


@dataclass(frozen=True)
class BlockPlan:
    """Planted coupling from column group ``cols`` into row group ``rows``.

    A random block couples ``round(row_fraction * p)`` target rows; within them each
    entry is nonzero with probability ``density`` (at least one per coupled row), with
    magnitude ``gain * U(0.5, 1)`` and random sign.
    """
    rows: str
    cols: str
    kind: str = "random"
    gain: float = 0.0
    density: float = 1.0
    row_fraction: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "random"):
            raise ConfigError(f"Unknown block kind '{self.kind}'. Available: ['random', 'zero']")
        if not 0 < self.density <= 1:
            raise ConfigError(f"density must be in (0, 1], got {self.density}")
        if not 0 < self.row_fraction <= 1:
            raise ConfigError(f"row_fraction must be in (0, 1], got {self.row_fraction}")

    @property
    def key(self) -> str:
        return f"{self.rows}-{self.cols}"

    @classmethod
    def from_settings(cls, s: PlantedBlockSettings) -> "BlockPlan":
        return cls(s.rows, s.cols, s.kind, s.gain, s.density, s.row_fraction)


@dataclass(frozen=True)
class BlockSystemSpec:
    """Block-linear system x_{t+1} = (I + B) x_t + w_t over ordered variable groups."""
    group_dims: Dict[str, int]
    blocks: Tuple[BlockPlan, ...] = ()
    spectral_radius_cap: float = 0.98
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.group_dims:
            raise ConfigError("A block system needs at least one group")
        for gid, dim in self.group_dims.items():
            if dim < 1:
                raise ConfigError(f"Group '{gid}' must have a positive dimension, got {dim}")
        for plan in self.blocks:
            for gid in (plan.rows, plan.cols):
                if gid not in self.group_dims:
                    raise ConfigError(
                        f"Block {plan.key} names unknown group '{gid}'. "
                        f"Available: {list(self.group_dims)}"
                    )
        if not 0 < self.spectral_radius_cap <= 1:
            raise ConfigError(
                f"spectral_radius_cap must be in (0, 1], got {self.spectral_radius_cap}"
            )
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(f"{gid}{i}" for gid, dim in self.group_dims.items() for i in range(dim))

    @property
    def partition(self) -> Partition:
        groups = []
        for gid, dim in self.group_dims.items():
            groups.append(Group(gid, tuple(f"{gid}{i}" for i in range(dim))))
        return Partition(tuple(groups))

    @classmethod
    def from_settings(cls, s: BlockSystemSettings, seed: Optional[int] = None) -> "BlockSystemSpec":
        return cls(
            group_dims=dict(s.groups),
            blocks=tuple(BlockPlan.from_settings(b) for b in s.blocks),
            spectral_radius_cap=s.spectral_radius_cap,
            noise_sigma=s.noise_sigma,
            seed=s.seed if seed is None else seed,
        )


@dataclass(frozen=True)
class BlockTrajectory:
    """Simulated states (d × (steps+1)) with the operator that produced them."""
    states: np.ndarray
    labels: Tuple[str, ...]
    operator: np.ndarray
    blocks: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class ToyRnaseq:
    """Toy expression ensemble with its partition and planted increment blocks."""
    ensemble: SnapshotEnsemble
    partition: Partition
    ground_truth: Dict[str, np.ndarray]
