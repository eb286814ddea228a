"""Common utilities shared across all modules."""

__version__ = "0.1.0"
