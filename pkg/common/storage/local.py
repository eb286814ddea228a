"""Local directory artifact store."""
import logging
from pathlib import Path
from typing import List

from ..errors import ConfigError, DataError
from .backend import ArtifactStore

logger = logging.getLogger(__name__)


class LocalDirectoryStore(ArtifactStore):
    """Artifacts as plain files below one root directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def _path(self, name: str) -> Path:
        return self.root / name

    def write_bytes(self, name: str, data: bytes) -> str:
        path = self._path(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as e:
            raise ConfigError(f"Cannot write artifact {path}: {e}") from e
        logger.debug(f"Wrote {path} ({len(data)} bytes)")
        return str(path)

    def read_bytes(self, name: str) -> bytes:
        path = self._path(name)
        if not path.is_file():
            raise DataError(f"Artifact not found: {path}")
        return path.read_bytes()

    def list(self, prefix: str = '') -> List[str]:
        if not self.root.exists():
            return []
        names = (p.relative_to(self.root).as_posix() for p in self.root.rglob("*") if p.is_file())
        return sorted(n for n in names if n.startswith(prefix))

    def exists(self, name: str) -> bool:
        return self._path(name).is_file()
