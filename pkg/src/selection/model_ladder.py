"""
Candidate ladder over truncation orders and parsimonious model choice.
Fits every i_max in a range and keeps the smallest one that explains the data.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..estimation import CandidateFit, ClickStatistics, FitConfig, fit_candidate
from ..utils.exceptions import ArityError, ConfigurationError, ConvergenceError, SelectionError
from ..utils.helpers import dataclass_from_dict, ordered_map

logger = logging.getLogger(__name__)

RULES = ("chi2", "aic", "bic")
NESTING_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SelectionConfig:
    """Settings read from the ``selection`` section of the config file."""

    i_max_min: int = 1
    i_max_max: int = 6
    absolute_cap: float = 3.0
    relative_factor: float = 1.2
    rule: str = "chi2"
    pin_p0: bool = False

    def __post_init__(self):
        if int(self.i_max_min) < 0 or int(self.i_max_max) < int(self.i_max_min):
            raise ConfigurationError(
                f"selection i_max range [{self.i_max_min}, {self.i_max_max}] is empty or negative"
            )
        if self.rule not in RULES:
            raise ConfigurationError(f"selection.rule must be one of {RULES}, got {self.rule!r}")
        if float(self.absolute_cap) < 0.0 or float(self.relative_factor) < 1.0:
            raise ConfigurationError("selection needs absolute_cap >= 0 and relative_factor >= 1")

    @property
    def i_max_range(self) -> Tuple[int, int]:
        return int(self.i_max_min), int(self.i_max_max)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SelectionConfig":
        return dataclass_from_dict(cls, data, "selection")


@dataclass(frozen=True)
class RuleTraceEntry:
    i_max: int
    chi2_reduced: float
    accepted: bool
    reason: str


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """All candidates of one ladder together with the decision taken on each."""

    candidates: List[CandidateFit]
    selected_i_max: Optional[int]
    rule_trace: List[RuleTraceEntry] = field(default_factory=list)
    rule: str = "chi2"

    @property
    def selected(self) -> CandidateFit:
        for fit in self.candidates:
            if fit.i_max == self.selected_i_max and fit.converged:
                return fit
        raise SelectionError("report has no selected candidate", report=self)

    def candidate(self, i_max: int) -> Optional[CandidateFit]:
        return next((fit for fit in self.candidates if fit.i_max == i_max), None)


def _fit_order(data, i_max, fit_config):
    try:
        return fit_candidate(data, i_max, fit_config), None
    except ConvergenceError as e:
        logger.warning("i_max=%d excluded: %s", i_max, e)
        return e.best_fit, f"excluded: not converged ({e})"
    except ArityError as e:
        logger.warning("i_max=%d excluded: %s", i_max, e)
        return None, f"excluded: {e}"


def _enforce_nesting(data, orders, outcomes, fit_config):
    """
    Re-fit any candidate that ends above its smaller neighbour, starting
    from that neighbour's optimum, so the ladder chi-square never rises.
    """
    previous = None
    for index, i_max in enumerate(orders):
        fit, reason = outcomes[index]
        if previous is not None and (
            fit is None and reason and "not converged" in reason
            or fit is not None and (
                not fit.converged
                or fit.chi2 > previous.chi2 * (1.0 + NESTING_TOLERANCE) + 1e-12
            )
        ):
            try:
                warm = fit_candidate(data, i_max, fit_config, extra_starts=[previous.model])
            except ConvergenceError:
                warm = None
            if warm is not None and (fit is None or not fit.converged or warm.chi2 < fit.chi2):
                logger.debug("i_max=%d improved by warm start from i_max=%d", i_max, previous.i_max)
                outcomes[index] = (warm, None)
                fit, reason = warm, None
        if fit is not None and fit.converged:
            previous = fit
    return outcomes


def _scores(fits: Sequence[CandidateFit], rule: str) -> Dict[int, float]:
    if rule == "aic":
        return {f.i_max: f.chi2 + 2.0 * f.n_free for f in fits}
    return {f.i_max: f.chi2 + f.n_free * math.log(f.n_points) for f in fits}


def select_model(
    data: Sequence[ClickStatistics],
    i_max_range: Optional[Tuple[int, int]] = None,
    config: Optional[SelectionConfig] = None,
    fit_config: Optional[FitConfig] = None,
    threads: Optional[int] = None,
) -> SelectionReport:
    """
    Run the candidate ladder and pick the minimal adequate truncation order.

    Under the default ``chi2`` rule a candidate is accepted when its reduced
    chi-square is at most ``max(absolute_cap, relative_factor * best)``;
    the smallest accepted i_max is selected.

    Args:
        data: Click statistics for one bias current
        i_max_range: Inclusive ``(low, high)``; defaults to the config range
        config: Selection settings
        fit_config: Settings forwarded to every candidate fit
        threads: Concurrent candidate fits (None means all cores)

    Returns:
        SelectionReport with every candidate and its rule-trace entry

    Raises:
        SelectionError: If no candidate is accepted; carries the full ladder
    """
    if config is None:
        config = SelectionConfig()
    if fit_config is None:
        fit_config = FitConfig()
    if config.pin_p0 and not fit_config.pin_p0:
        fit_config = replace(fit_config, pin_p0=True)
    low, high = config.i_max_range if i_max_range is None else (int(i_max_range[0]), int(i_max_range[1]))
    if low < 0 or high < low:
        raise ConfigurationError(f"i_max range [{low}, {high}] is empty or negative")
    if threads is None:
        threads = fit_config.threads

    orders = list(range(low, high + 1))
    outcomes = ordered_map(lambda k: _fit_order(data, k, fit_config), orders, threads)
    outcomes = _enforce_nesting(data, orders, outcomes, fit_config)

    candidates = [fit for fit, _ in outcomes if fit is not None]
    converged = [fit for fit in candidates if fit.converged]

    accepted = set()
    verdicts: Dict[int, str] = {}
    if converged:
        if config.rule == "chi2":
            best = min(f.chi2_reduced for f in converged)
            threshold = max(config.absolute_cap, config.relative_factor * best)
            for f in converged:
                ok = f.chi2_reduced <= threshold
                if ok:
                    accepted.add(f.i_max)
                verdicts[f.i_max] = (
                    f"chi2_reduced {f.chi2_reduced:.6g} {'<=' if ok else '>'} threshold {threshold:.6g}"
                )
        else:
            scores = _scores(converged, config.rule)
            lowest = min(scores.values())
            for f in converged:
                ok = scores[f.i_max] <= lowest
                if ok:
                    accepted.add(f.i_max)
                verdicts[f.i_max] = (
                    f"{config.rule.upper()} {scores[f.i_max]:.6g} "
                    f"{'is' if ok else 'exceeds'} minimum {lowest:.6g}"
                )

    selected = min(accepted) if accepted else None
    trace = []
    for i_max, (fit, reason) in zip(orders, outcomes):
        chi2_reduced = fit.chi2_reduced if fit is not None else math.nan
        if fit is None or not fit.converged:
            trace.append(RuleTraceEntry(i_max, chi2_reduced, False, reason or "excluded"))
        elif i_max == selected:
            trace.append(RuleTraceEntry(i_max, chi2_reduced, True, f"selected: {verdicts[i_max]}"))
        elif i_max in accepted:
            trace.append(RuleTraceEntry(
                i_max, chi2_reduced, True,
                f"accepted but superfluous (i_max={selected} is smaller): {verdicts[i_max]}",
            ))
        else:
            trace.append(RuleTraceEntry(i_max, chi2_reduced, False, f"rejected: {verdicts[i_max]}"))

    report = SelectionReport(
        candidates=candidates, selected_i_max=selected, rule_trace=trace, rule=config.rule
    )
    if selected is None:
        raise SelectionError(
            f"no candidate in i_max range [{low}, {high}] satisfies the {config.rule} rule",
            report=report,
        )
    logger.info("selected i_max=%d from ladder [%d, %d]", selected, low, high)
    return report
