"""Bias-current sweep analysis and regime diagnostics."""

from .sweep_analysis import (
    SweepConfig,
    SweepPoint,
    SweepResult,
    analyze_sweep,
    boundary_spacings,
    crossover_table,
    dominant_order,
    regime_boundaries,
    regime_crossover,
)

__all__ = [
    "SweepConfig",
    "SweepPoint",
    "SweepResult",
    "analyze_sweep",
    "boundary_spacings",
    "crossover_table",
    "dominant_order",
    "regime_boundaries",
    "regime_crossover",
]
