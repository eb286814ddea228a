"""Exception hierarchy and CLI exit codes."""
from typing import Iterable, List, Sequence


class HostImpactError(Exception):
    """Base class for all errors raised by hostimpact."""

    exit_code = 1


class ConfigError(HostImpactError):
    """Invalid configuration, unreadable inputs or unwritable outputs."""

    exit_code = 2


class HierarchyError(ConfigError):
    """Design hierarchy cannot be executed (unresolved reference, cycle, ordering)."""


class DataError(HostImpactError):
    """Input data violates a structural invariant."""

    exit_code = 3


class UnknownVariableError(DataError, KeyError):
    """Requested variable ids are not present in an ensemble."""

    def __init__(self, missing: Sequence[str], suggestions: dict):
        self.missing = list(missing)
        self.suggestions = dict(suggestions)
        hints = [
            f"{m} (did you mean {', '.join(suggestions[m])}?)" if suggestions.get(m) else m
            for m in self.missing
        ]
        super().__init__(f"Unknown variable ids: {hints}")

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return self.args[0]


class NumericalError(HostImpactError):
    """A computation produced an undefined or non-finite result."""

    exit_code = 4


def not_found(kind: str, name: str, available: Iterable[str]) -> str:
    """Format the standard "not found" message."""
    available_list: List[str] = sorted(available)
    return f"{kind} '{name}' not found. Available: {available_list}"
