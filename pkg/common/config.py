"""
Configuration
=============
Repository defaults (``config/settings.yaml``) and the run configuration that drives
every subcommand.

A run config is a YAML, JSON or TOML file. Only fields that differ from the defaults
need to be given; command-line flags override config fields afterwards.

Usage:
    from common.config import load_run_config, settings

    config = load_run_config(Path("run.yaml"))
    print(config.fit.lambda_)
    print(settings()["augmentation"]["magnitude"])
"""

import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    tomllib = None


# Default config location
DEFAULT_SETTINGS = Path(__file__).resolve().parent.parent / "config" / "settings.yaml"

# Cache for loaded documents
_config_cache: Dict[str, Any] = {}


def load_document(path: Path) -> Dict[str, Any]:
    """Load a YAML/JSON/TOML mapping from disk (cached by path)."""
    path = Path(path)
    path_str = str(path.resolve())

    if path_str not in _config_cache:
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            if path.suffix == ".toml":
                if tomllib is None:
                    raise ConfigError(f"TOML configs need Python 3.11+: {path}")
                with open(path, "rb") as f:
                    data = tomllib.load(f)
            else:
                with open(path, encoding="utf-8") as f:
                    data = yaml.safe_load(f)
        except (yaml.YAMLError, ValueError) as e:
            raise ConfigError(f"Cannot parse config {path}: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must contain a mapping at top level")
        _config_cache[path_str] = data

    return _config_cache[path_str]


def clear_cache():
    """Forget every loaded document (settings included)."""
    _config_cache.clear()


def settings() -> Dict[str, Any]:
    """Repository defaults."""
    return load_document(DEFAULT_SETTINGS)


def _default(*keys: str):
    def factory():
        node = settings()
        for key in keys:
            node = node[key]
        return node
    return factory


# =============================================================================
# Run configuration
# =============================================================================

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class InputPaths(_Section):
    """Files a run reads."""
    table: Optional[Path] = None
    manifest: Optional[Path] = None
    hierarchy: Optional[Path] = None
    archive: Optional[Path] = None
    truth: Optional[Path] = None


class AugmentationSettings(_Section):
    count: int = Field(default_factory=_default("augmentation", "count"), ge=0)
    magnitude: float = Field(default_factory=_default("augmentation", "magnitude"), gt=0)
    distribution: Literal["gaussian", "uniform"] = Field(
        default_factory=_default("augmentation", "distribution")
    )
    seed: int = Field(default_factory=_default("augmentation", "seed"), ge=0, lt=2**64)
    clamp_sigmas: float = Field(default_factory=_default("augmentation", "clamp_sigmas"), gt=0)


class FitSettings(_Section):
    lambda_: Optional[float] = Field(default=None, alias="lambda", ge=0)
    dictionary: Union[str, Dict[str, int]] = "identity"
    augmentation: Optional[AugmentationSettings] = None


class RuleSettings(_Section):
    kind: Literal["absolute", "relative"] = Field(
        default_factory=_default("impact", "rule", "kind")
    )
    value: float = Field(default_factory=_default("impact", "rule", "value"))


class ImpactSettings(_Section):
    rule: RuleSettings = Field(default_factory=RuleSettings)
    blocks: Optional[List[str]] = None
    per_group: bool = False
    heatmap_bounds: Optional[float] = Field(default=None, gt=0)


class OscillatorSettings(_Section):
    m: float = Field(default_factory=_default("oscillator", "m"))
    k: float = Field(default_factory=_default("oscillator", "k"))
    k_c: float = Field(default_factory=_default("oscillator", "k_c"))
    dt: float = Field(default_factory=_default("oscillator", "dt"))
    steps: int = Field(default_factory=_default("oscillator", "steps"))
    x0: List[float] = Field(default_factory=_default("oscillator", "x0"))


class PlantedBlockSettings(_Section):
    rows: str
    cols: str
    kind: Literal["zero", "random"] = "random"
    gain: float = 0.0
    density: float = Field(default=1.0, gt=0, le=1)
    row_fraction: float = Field(default=1.0, gt=0, le=1)


class BlockSystemSettings(_Section):
    groups: Dict[str, int] = Field(default_factory=_default("block_system", "groups"))
    blocks: List[PlantedBlockSettings] = Field(
        default_factory=lambda: [
            PlantedBlockSettings(**b) for b in settings()["block_system"]["blocks"]
        ]
    )
    spectral_radius_cap: float = Field(
        default_factory=_default("block_system", "spectral_radius_cap"), gt=0, le=1
    )
    noise_sigma: float = Field(default_factory=_default("block_system", "noise_sigma"), ge=0)
    steps: int = Field(default_factory=_default("block_system", "steps"), gt=0)
    seed: int = Field(default_factory=_default("block_system", "seed"), ge=0)


class ToySettings(_Section):
    n_genes: int = Field(default_factory=_default("toy", "n_genes"), gt=0)
    groups: Dict[str, int] = Field(default_factory=_default("toy", "groups"))
    blocks: List[PlantedBlockSettings] = Field(
        default_factory=lambda: [PlantedBlockSettings(**b) for b in settings()["toy"]["blocks"]]
    )
    conditions: Optional[Dict[str, List[str]]] = None
    timepoints: int = Field(default_factory=_default("toy", "timepoints"), ge=2)
    replicates: int = Field(default_factory=_default("toy", "replicates"), ge=1)
    noise_sigma: float = Field(default_factory=_default("toy", "noise_sigma"), ge=0)
    seed: int = Field(default_factory=_default("toy", "seed"), ge=0)


class SynthSettings(_Section):
    system: Literal["oscillator", "blocks"] = "oscillator"
    oscillator: OscillatorSettings = Field(default_factory=OscillatorSettings)
    block_system: BlockSystemSettings = Field(default_factory=BlockSystemSettings)
    toy: ToySettings = Field(default_factory=ToySettings)


class RunConfig(_Section):
    """Everything one run needs; a single file drives a run."""
    inputs: InputPaths = Field(default_factory=InputPaths)
    condition: Optional[str] = None
    variables: Optional[List[str]] = None
    log2: bool = False
    fit: FitSettings = Field(default_factory=FitSettings)
    impact: ImpactSettings = Field(default_factory=ImpactSettings)
    synth: SynthSettings = Field(default_factory=SynthSettings)
    output_dir: Path = Path("out")
    log_level: str = "INFO"
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return level

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        """Validate a mapping; relative input paths resolve against ``base_dir``."""
        try:
            config = cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"])
            raise ConfigError(f"Invalid config field '{where}': {first['msg']}") from e
        if base_dir is not None:
            config = config.resolve_paths(base_dir)
        return config

    def to_dict(self) -> Dict[str, Any]:
        """JSON-compatible mapping that ``from_dict`` reads back unchanged."""
        return self.model_dump(mode="json", by_alias=True)

    def resolve_paths(self, base_dir: Path) -> "RunConfig":
        resolved = {}
        for name, value in self.inputs.model_dump().items():
            if value is not None and not Path(value).is_absolute():
                value = Path(base_dir) / value
            resolved[name] = value
        return self.model_copy(update={"inputs": InputPaths(**resolved)})

    def with_overrides(
        self,
        output_dir: Optional[Path] = None,
        lambda_: Optional[float] = None,
        seed: Optional[int] = None,
        log_level: Optional[str] = None,
    ) -> "RunConfig":
        """Apply command-line flags on top of the file values."""
        data = self.to_dict()
        if output_dir is not None:
            data["output_dir"] = str(output_dir)
        if lambda_ is not None:
            data["fit"]["lambda"] = lambda_
        if seed is not None:
            data["seed"] = seed
        if log_level is not None:
            data["log_level"] = log_level
        return RunConfig.from_dict(data)

    @property
    def augmentation_seed(self) -> Optional[int]:
        if self.fit.augmentation is None:
            return None
        return self.seed if self.seed is not None else self.fit.augmentation.seed

    def fingerprint(self) -> str:
        """Config hash: fit-defining fields plus digests of the input files."""
        data = self.to_dict()
        data.pop("output_dir")
        data.pop("log_level")
        data.pop("impact")
        inputs = data.pop("inputs")
        digests = {}
        for name in ("table", "manifest", "hierarchy"):
            path = inputs.get(name)
            if path is not None and Path(path).is_file():
                digests[name] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        data["input_digests"] = digests
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_run_config(path: Optional[Path] = None) -> RunConfig:
    """Load a run config file; without a path the repository defaults apply."""
    if path is None:
        return RunConfig()
    path = Path(path)
    return RunConfig.from_dict(load_document(path), base_dir=path.resolve().parent)
