"""Signed heatmaps of learned blocks as standalone SVG documents.

Colour scale is diverging and symmetric about zero (auto bounds ±max|entry|,
±1 for an all-zero matrix). Output is byte-stable: fixed ``svg.hashsalt`` and no
date metadata. The config hash of the run goes into ``<dc:description>``. Blocks
with more than ``heatmap.raster_cells`` cells have their mesh embedded as a PNG
image.
"""
import io
import logging
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from common.config import settings  # noqa: E402
from common.errors import ConfigError, DataError  # noqa: E402

logger = logging.getLogger(__name__)

MAX_TICK_LABELS = 40


def color_bounds(matrix: np.ndarray, bounds: Optional[float] = None) -> float:
    if bounds is not None:
        if not bounds > 0:
            raise ConfigError(f"Heatmap bounds must be > 0, got {bounds}")
        return float(bounds)
    peak = float(np.max(np.abs(matrix)))
    return peak if peak > 0 else 1.0


def color_norm(matrix: np.ndarray, bounds: Optional[float] = None) -> Normalize:
    limit = color_bounds(matrix, bounds)
    return Normalize(vmin=-limit, vmax=limit)


def cell_colors(matrix: np.ndarray, bounds: Optional[float] = None) -> np.ndarray:
    """RGBA colour of every cell, as drawn."""
    matrix = np.asarray(matrix, dtype=float)
    cmap = matplotlib.colormaps[settings()["heatmap"]["colormap"]]
    return cmap(color_norm(matrix, bounds)(matrix))


def _ticks(labels: Sequence[str]):
    step = max(1, int(np.ceil(len(labels) / MAX_TICK_LABELS)))
    positions = np.arange(0, len(labels), step)
    return positions + 0.5, [labels[i] for i in positions]


def render_svg(
    matrix: np.ndarray,
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    bounds: Optional[float] = None,
    title: Optional[str] = None,
    config_hash: Optional[str] = None,
) -> bytes:
    """SVG document for a labelled matrix (rows top to bottom)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.size == 0:
        raise DataError(f"Heatmap needs a non-empty matrix, got shape {matrix.shape}")
    if matrix.shape != (len(row_labels), len(col_labels)):
        raise DataError(
            f"Matrix is {matrix.shape}, labels give {(len(row_labels), len(col_labels))}"
        )

    options = settings()["heatmap"]
    p, q = matrix.shape
    width = min(12.0, 2.5 + 0.25 * q)
    height = min(12.0, 1.5 + 0.25 * p)

    with matplotlib.rc_context({"svg.hashsalt": options["hashsalt"], "svg.fonttype": "none"}):
        fig = Figure(figsize=(width, height))
        ax = fig.add_subplot()
        mesh = ax.pcolormesh(
            matrix,
            cmap=options["colormap"],
            norm=color_norm(matrix, bounds),
            rasterized=matrix.size > options["raster_cells"],
        )
        ax.invert_yaxis()
        xpos, xlabels = _ticks(list(col_labels))
        ypos, ylabels = _ticks(list(row_labels))
        ax.set_xticks(xpos, xlabels, rotation=90, fontsize=6)
        ax.set_yticks(ypos, ylabels, fontsize=6)
        if title:
            ax.set_title(title)
        fig.colorbar(mesh, ax=ax)
        fig.tight_layout()

        buffer = io.BytesIO()
        metadata = {"Date": None}
        if config_hash:
            metadata["Description"] = f"config_hash={config_hash}"
        fig.savefig(buffer, format="svg", metadata=metadata)
    return buffer.getvalue()


def render_heatmap(
    matrix: np.ndarray,
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    path: Path,
    bounds: Optional[float] = None,
    title: Optional[str] = None,
    config_hash: Optional[str] = None,
) -> Path:
    """Write the heatmap SVG to ``path``."""
    document = render_svg(matrix, row_labels, col_labels, bounds, title, config_hash)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(document)
    except OSError as e:
        raise ConfigError(f"Cannot write heatmap {path}: {e}") from e
    logger.debug(f"Heatmap written to {path}")
    return path
