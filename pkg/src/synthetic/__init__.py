"""Synthetic test bench: seeded datasets from a known detector model."""

from .bench import (
    SyntheticScenario,
    brute_force_click_probability,
    complement_form_click_probability,
    generate_dataset,
    read_scenarios,
    required_cutoff,
    write_scenarios,
)

__all__ = [
    "SyntheticScenario",
    "brute_force_click_probability",
    "complement_form_click_probability",
    "generate_dataset",
    "read_scenarios",
    "required_cutoff",
    "write_scenarios",
]
