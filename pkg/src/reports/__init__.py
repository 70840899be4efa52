"""Structured reports and plot-ready curve files."""

from .report_factory import build_report, emit_report, load_model, load_models, load_report, write_curves

__all__ = ["build_report", "emit_report", "load_model", "load_models", "load_report", "write_curves"]
