"""Model selection over the ladder of truncation orders."""

from .model_ladder import RuleTraceEntry, SelectionConfig, SelectionReport, select_model

__all__ = ["RuleTraceEntry", "SelectionConfig", "SelectionReport", "select_model"]
