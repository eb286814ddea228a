"""
Impact Module
=============
Circuit-to-host impact from learned blocks: normalised Frobenius scores,
impacted-target counts, rankings and heatmaps.

Usage:
    from modules.impact import ThresholdRule, impact_report, render_heatmap

    report = impact_report(model, ThresholdRule.relative(0.01))
    print(report.ranking)
"""

from .models import ImpactEntry, ImpactReport, ThresholdRule
from .service import (
    BlockView,
    impact_report,
    impact_score,
    impacted_targets,
    rank_entries,
    read_report,
    selected_blocks,
    write_report,
)
from .heatmap import cell_colors, render_heatmap, render_svg

__all__ = [
    # Models
    "ImpactEntry",
    "ImpactReport",
    "ThresholdRule",
    # Service
    "BlockView",
    "impact_report",
    "impact_score",
    "impacted_targets",
    "rank_entries",
    "read_report",
    "selected_blocks",
    "write_report",
    # Heatmaps
    "cell_colors",
    "render_heatmap",
    "render_svg",
]
