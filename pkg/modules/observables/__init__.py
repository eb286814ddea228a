"""Observable dictionaries (identity, polynomial, state plus constant)."""

from .dictionary import (
    CONSTANT_LABEL,
    DictionaryKind,
    ObservableDictionary,
    lift,
    make_dictionary,
    parse_dictionary_kind,
)

__all__ = [
    "CONSTANT_LABEL",
    "DictionaryKind",
    "ObservableDictionary",
    "lift",
    "make_dictionary",
    "parse_dictionary_kind",
]
