"""
Observable dictionaries ψ used to lift state snapshots before fitting.

Monomials of the polynomial dictionary are enumerated in graded lexicographic order:
all degree-1 terms in variable order, then degree 2 (x1^2, x1*x2, ..., x2^2, ...), and so on.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations_with_replacement
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from common.errors import ConfigError, DataError

CONSTANT_LABEL = "1"

KindDescriptor = Union[str, Dict[str, Any]]


class DictionaryKind(Enum):
    IDENTITY = "identity"
    POLYNOMIAL = "polynomial"
    STATE_PLUS_CONSTANT = "state_plus_constant"


@dataclass(frozen=True)
class ObservableDictionary:
    """A finite basis of observables over labelled state variables."""
    kind: DictionaryKind
    input_labels: Tuple[str, ...]
    labels: Tuple[str, ...]
    degree: int = 1
    include_constant: bool = False
    # exponent index tuples for the polynomial kind, e.g. (0, 1) = x1*x2; () = constant
    terms: Tuple[Tuple[int, ...], ...] = ()

    @property
    def input_dim(self) -> int:
        return len(self.input_labels)

    @property
    def output_dim(self) -> int:
        return len(self.labels)

    def to_descriptor(self) -> KindDescriptor:
        if self.kind is DictionaryKind.POLYNOMIAL:
            if self.include_constant:
                return {"polynomial": self.degree, "include_constant": True}
            return {"polynomial": self.degree}
        return self.kind.value


def parse_dictionary_kind(descriptor: KindDescriptor) -> Tuple[DictionaryKind, int, bool]:
    """Read ``"identity"``, ``"state_plus_constant"`` or ``{"polynomial": d}``."""
    if isinstance(descriptor, str):
        try:
            kind = DictionaryKind(descriptor)
        except ValueError:
            raise ConfigError(
                f"Unknown dictionary '{descriptor}'. "
                f"Available: {[k.value for k in DictionaryKind]}"
            )
        if kind is DictionaryKind.POLYNOMIAL:
            raise ConfigError("Polynomial dictionary needs a degree: {\"polynomial\": d}")
        return kind, 1, False
    if isinstance(descriptor, dict) and "polynomial" in descriptor:
        degree = descriptor["polynomial"]
        if not isinstance(degree, int) or degree < 2:
            raise ConfigError(f"Polynomial degree must be an integer >= 2, got {degree!r}")
        return DictionaryKind.POLYNOMIAL, degree, bool(descriptor.get("include_constant", False))
    raise ConfigError(f"Malformed dictionary descriptor {descriptor!r}")


def _monomial_label(term: Tuple[int, ...], names: Sequence[str]) -> str:
    if not term:
        return CONSTANT_LABEL
    parts = []
    for index in sorted(set(term)):
        power = term.count(index)
        parts.append(names[index] if power == 1 else f"{names[index]}^{power}")
    return "*".join(parts)


def make_dictionary(kind: KindDescriptor, variable_ids: Sequence[str]) -> ObservableDictionary:
    """Build a dictionary over ``variable_ids``."""
    parsed, degree, include_constant = parse_dictionary_kind(kind)
    ids = tuple(variable_ids)
    if not ids:
        raise ConfigError("A dictionary needs at least one variable id")

    if parsed is DictionaryKind.IDENTITY:
        return ObservableDictionary(parsed, ids, ids)

    if parsed is DictionaryKind.STATE_PLUS_CONSTANT:
        return ObservableDictionary(parsed, ids, ids + (CONSTANT_LABEL,))

    terms = [()] if include_constant else []
    for d in range(1, degree + 1):
        terms.extend(combinations_with_replacement(range(len(ids)), d))
    labels = tuple(_monomial_label(t, ids) for t in terms)
    return ObservableDictionary(
        parsed, ids, labels, degree=degree, include_constant=include_constant, terms=tuple(terms)
    )


def lift(dictionary: ObservableDictionary, states: np.ndarray) -> np.ndarray:
    """Apply ψ column by column: (input_dim × m) → (output_dim × m)."""
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, np.newaxis]
    if states.shape[0] != dictionary.input_dim:
        raise DataError(
            f"States have {states.shape[0]} rows, dictionary expects {dictionary.input_dim}"
        )
    if not np.all(np.isfinite(states)):
        raise DataError("Cannot lift non-finite states")

    if dictionary.kind is DictionaryKind.IDENTITY:
        return states.copy()
    if dictionary.kind is DictionaryKind.STATE_PLUS_CONSTANT:
        return np.vstack([states, np.ones((1, states.shape[1]))])

    rows = [np.prod(states[list(term)], axis=0) for term in dictionary.terms]
    return np.vstack(rows)
