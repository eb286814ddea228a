"""
Synth Module
============
Ground-truth generators: coupled oscillators, planted block-linear systems and a
toy host + circuit transcriptome.

Usage:
    from modules.synth import OscillatorParams, simulate_oscillators, make_toy_rnaseq

    states = simulate_oscillators(OscillatorParams(k_c=0.5))
    toy = make_toy_rnaseq(429, {"I": 1, "A": 1}, planted_blocks=[])
"""

from .models import (
    BlockPlan,
    BlockSystemSpec,
    BlockTrajectory,
    OscillatorParams,
    ToyRnaseq,
)
from .oscillators import (
    OSCILLATOR_LABELS,
    oscillator_energy,
    oscillator_matrix,
    propagator,
    simulate_original_oscillator,
    simulate_oscillators,
)
from .blocks import (
    assemble_increment,
    block_system_operator,
    planted_block,
    simulate_block_system,
    split_blocks,
)
from .rnaseq import NAND_CONDITIONS, make_toy_rnaseq, toy_from_settings, toy_partition

__all__ = [
    # Models
    "BlockPlan",
    "BlockSystemSpec",
    "BlockTrajectory",
    "OscillatorParams",
    "ToyRnaseq",
    # Oscillators
    "OSCILLATOR_LABELS",
    "oscillator_energy",
    "oscillator_matrix",
    "propagator",
    "simulate_original_oscillator",
    "simulate_oscillators",
    # Block systems
    "assemble_increment",
    "block_system_operator",
    "planted_block",
    "simulate_block_system",
    "split_blocks",
    # Toy transcriptome
    "NAND_CONDITIONS",
    "make_toy_rnaseq",
    "toy_from_settings",
    "toy_partition",
]
