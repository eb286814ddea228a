"""Threshold rules and the impact report."""

from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from common.errors import ConfigError

RULE_KINDS = ("absolute", "relative")


@dataclass(frozen=True)
class ThresholdRule:
    """When a target row counts as impacted.

    absolute(τ): row max |entry| ≥ τ.
    relative(ρ): row max |entry| ≥ ρ × (max |entry| over the whole block).
    Rows that are entirely zero never count.
    """
    kind: str = "relative"
    value: float = 0.01

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigError(
                f"Unknown threshold rule '{self.kind}'. Available: {list(RULE_KINDS)}"
            )
        if self.kind == "absolute" and not self.value >= 0:
            raise ConfigError(f"absolute threshold must be >= 0, got {self.value}")
        if self.kind == "relative" and not 0 < self.value <= 1:
            raise ConfigError(f"relative threshold must be in (0, 1], got {self.value}")

    @classmethod
    def absolute(cls, tau: float) -> "ThresholdRule":
        return cls("absolute", float(tau))

    @classmethod
    def relative(cls, rho: float) -> "ThresholdRule":
        return cls("relative", float(rho))

    @classmethod
    def from_dict(cls, data: Dict) -> "ThresholdRule":
        return cls(kind=data.get("kind", "relative"), value=float(data.get("value", 0.01)))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "value": self.value}

    def __str__(self) -> str:
        return f"{self.kind}({self.value:g})"


class ImpactEntry(BaseModel):
    """Score and impacted targets of one block."""
    block_id: str
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    fro_norm: float = Field(ge=0)
    score: float = Field(ge=0, description="fro_norm / (rows * cols)")
    impacted_targets: List[str] = []
    impacted_count: int = 0
    stage_id: Optional[str] = None

    @model_validator(mode="after")
    def _count_matches(self):
        if self.impacted_count != len(self.impacted_targets):
            raise ValueError("impacted_count must equal len(impacted_targets)")
        return self


class ImpactReport(BaseModel):
    """Per-block impact entries, the rule used and the score ranking."""
    entries: List[ImpactEntry]
    threshold_rule: Dict[str, Any]
    ranking: List[str]
    # "all" learned blocks, or the "selected" subset; per_group adds composite group slices
    block_source: Literal["all", "selected"] = "all"
    per_group: bool = False
    tool_version: str = ""
    config_hash: str = ""

    def entry(self, block_id: str) -> ImpactEntry:
        for e in self.entries:
            if e.block_id == block_id:
                return e
        raise KeyError(block_id)
