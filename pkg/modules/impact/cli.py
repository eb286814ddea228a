"""Impact CLI: the ``impact`` and ``heatmap`` subcommands."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional


from common.errors import ConfigError
from common.runtime import add_common_arguments, configure_logging, resolve_config, run_command
from common.storage import LocalDirectoryStore, read_matrix_csv
from modules.structured.archive import load_archive
from .heatmap import render_heatmap
from .models import ThresholdRule
from .service import impact_report, selected_blocks, write_report

logger = logging.getLogger(__name__)


def cmd_impact(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    configure_logging(config.log_level)

    archive = args.archive or config.inputs.archive or config.output_dir
    model, record = load_archive(archive)

    expected = config.fingerprint()
    if record.get("config_hash") != expected:
        if not args.force:
            raise ConfigError(
                f"Archive {archive} was built from a different config "
                f"({record.get('config_hash')} != {expected}); pass --force to use it anyway"
            )
        logger.warning("Config hash mismatch ignored (--force)")

    settings = config.impact
    rule = ThresholdRule(settings.rule.kind, settings.rule.value)
    report = impact_report(
        model,
        rule,
        blocks=settings.blocks,
        per_group=settings.per_group,
        config_hash=record.get("config_hash", ""),
    )

    store = LocalDirectoryStore(config.output_dir)
    write_report(report, store)
    for view in selected_blocks(model, settings.blocks, settings.per_group):
        render_heatmap(
            view.matrix,
            view.row_labels,
            view.col_labels,
            Path(config.output_dir) / "heatmaps" / f"{view.block_id}.svg",
            bounds=settings.heatmap_bounds,
            title=view.block_id,
            config_hash=record.get("config_hash"),
        )
    logger.info(f"Report and {len(report.entries)} heatmaps written to {config.output_dir}")

    print(f"rule: {rule}")
    entries = {e.block_id: e for e in report.entries}
    for rank, block_id in enumerate(report.ranking, start=1):
        e = entries[block_id]
        print(f"{rank}. {block_id:<16} score={e.score:.6e}  impacted={e.impacted_count}")
    return 0


def cmd_heatmap(args: argparse.Namespace) -> int:
    configure_logging(args.log_level or "INFO")
    if not args.matrix.is_file():
        raise ConfigError(f"Matrix not found: {args.matrix}")
    frame = read_matrix_csv(args.matrix, str(args.matrix))
    output = args.output or args.matrix.with_suffix(".svg")
    render_heatmap(
        frame.to_numpy(dtype=float),
        list(frame.index),
        list(frame.columns),
        output,
        bounds=args.bounds,
        title=args.title,
    )
    print(output)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact impact",
        description="Score learned blocks and render their heatmaps",
    )
    add_common_arguments(parser)
    parser.add_argument("--archive", type=Path, help="Archive directory (default: inputs.archive)")
    parser.add_argument(
        "--force",
        action="store_true",
        help="Use the archive even if its config hash differs",
    )
    args = parser.parse_args(argv)
    return run_command(cmd_impact, args)


def heatmap_main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hostimpact heatmap",
        description="Render a labelled matrix CSV as an SVG heatmap",
    )
    parser.add_argument("matrix", type=Path, help="CSV with row labels in the first column")
    parser.add_argument("--output", type=Path, help="SVG path (default: next to the CSV)")
    parser.add_argument("--bounds", type=float, help="Symmetric colour bound (default: auto)")
    parser.add_argument("--title", help="Figure title")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    args = parser.parse_args(argv)
    return run_command(cmd_heatmap, args)


if __name__ == "__main__":
    sys.exit(main())
