#!/usr/bin/env python3
"""Unified CLI for hostimpact.

Usage:
    python cli.py fit --help
    python cli.py staged-fit --help
    python cli.py impact --help
    python cli.py simulate --help
    python cli.py synth --help
    python cli.py heatmap --help
"""
import argparse
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description='hostimpact - Koopman models of host-circuit interaction',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Commands:
  fit         Fit a Koopman matrix on one condition
  staged-fit  Run a design hierarchy of structured DMD stages
  impact      Score learned blocks, write report and heatmaps
  simulate    Simulate coupled oscillators or a planted block system
  synth       Generate the toy host + circuit transcriptome
  heatmap     Render a labelled matrix CSV as SVG

Examples:
  python cli.py synth --out runs/toy
  python cli.py staged-fit --config runs/toy/run.yaml --out runs/toy/archive
  python cli.py impact --config runs/toy/run.yaml --out runs/toy/archive
  python cli.py simulate --out runs/osc
  python cli.py fit --config runs/osc/run.yaml --out runs/osc/model --lambda 1e-12
"""
    )

    parser.add_argument(
        'command',
        choices=['fit', 'staged-fit', 'impact', 'simulate', 'synth', 'heatmap'],
        help='Command to run'
    )

    # Parse just the command, pass rest to the module CLI
    args, remaining = parser.parse_known_args(argv)

    if args.command == 'fit':
        from modules.koopman.cli import main as command_main
    elif args.command == 'staged-fit':
        from modules.structured.cli import main as command_main
    elif args.command == 'impact':
        from modules.impact.cli import main as command_main
    elif args.command == 'heatmap':
        from modules.impact.cli import heatmap_main as command_main
    elif args.command == 'simulate':
        from modules.synth.cli import simulate_main as command_main
    else:
        from modules.synth.cli import main as command_main

    return command_main(remaining)


if __name__ == '__main__':
    sys.exit(main())
