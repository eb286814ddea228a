"""Storage abstraction for run artifacts."""

from .backend import ArtifactStore, read_matrix_csv
from .local import LocalDirectoryStore

__all__ = ['ArtifactStore', 'LocalDirectoryStore', 'read_matrix_csv']
