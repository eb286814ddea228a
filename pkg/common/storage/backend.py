"""Abstract artifact store."""
import io
import json
from abc import ABC, abstractmethod
from typing import List

import pandas as pd

from ..errors import DataError


def read_matrix_csv(source, name: str) -> pd.DataFrame:
    """Labelled numeric matrix CSV (labels in header row and first column)."""
    try:
        frame = pd.read_csv(source, index_col=0, float_precision="round_trip")
        frame.to_numpy(dtype=float)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, ValueError) as e:
        raise DataError(f"Cannot parse matrix {name}: {e}") from e
    frame.index = frame.index.astype(str)
    frame.columns = frame.columns.astype(str)
    return frame


class ArtifactStore(ABC):
    """Base class for places run artifacts are written to and read from.

    Paths are relative names such as ``blocks/K_HA.csv``.
    """

    @abstractmethod
    def write_bytes(self, name: str, data: bytes) -> str:
        """Store data under name, return its location."""
        pass

    @abstractmethod
    def read_bytes(self, name: str) -> bytes:
        pass

    @abstractmethod
    def list(self, prefix: str = '') -> List[str]:
        """List stored names with optional prefix."""
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        pass

    def write_text(self, name: str, text: str) -> str:
        return self.write_bytes(name, text.encode("utf-8"))

    def read_text(self, name: str) -> str:
        return self.read_bytes(name).decode("utf-8")

    def write_json(self, name: str, payload: dict) -> str:
        """Deterministic JSON (sorted keys, indent 2, trailing newline)."""
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def read_json(self, name: str) -> dict:
        try:
            return json.loads(self.read_text(name))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise DataError(f"Artifact {name} is not valid JSON: {e}") from e

    def write_frame(self, name: str, frame: pd.DataFrame) -> str:
        """Labelled matrix as CSV; floats are emitted with full round-trip precision."""
        return self.write_text(name, frame.to_csv(lineterminator="\n"))

    def read_frame(self, name: str) -> pd.DataFrame:
        try:
            text = self.read_text(name)
        except UnicodeDecodeError as e:
            raise DataError(f"Artifact {name} is not UTF-8: {e}") from e
        return read_matrix_csv(io.StringIO(text), name)
