"""
Bias-current sweeps: one model selection per current, assembled into the
parameters-versus-bias table, plus regime diagnostics on the result.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import gammaln

from ..estimation import CandidateFit, ClickStatistics, FitConfig
from ..photon_statistics import EpdcModel
from ..selection import SelectionConfig, SelectionReport, select_model
from ..utils.exceptions import (
    ArityError,
    ConfigurationError,
    EpdcError,
    NoCrossoverError,
    SelectionError,
    ValidationError,
)
from ..utils.helpers import dataclass_from_dict, ordered_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    """Settings read from the ``sweep`` section of the config file."""

    dominance_threshold: float = 0.01

    def __post_init__(self):
        if not 0.0 < float(self.dominance_threshold) <= 1.0:
            raise ConfigurationError(
                f"sweep.dominance_threshold must lie in (0, 1], got {self.dominance_threshold!r}"
            )

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SweepConfig":
        return dataclass_from_dict(cls, data, "sweep")


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """Outcome of the ladder at one bias current (microamperes)."""

    bias_current: float
    report: Optional[SelectionReport]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.report is not None

    @property
    def selected(self) -> Optional[CandidateFit]:
        return self.report.selected if self.ok else None


@dataclass(frozen=True, eq=False)
class SweepResult:
    points: List[SweepPoint]
    config: SweepConfig = field(default_factory=SweepConfig)

    @property
    def bias_currents(self) -> List[float]:
        return [pt.bias_current for pt in self.points]

    @property
    def max_i_max(self) -> int:
        orders = [pt.selected.i_max for pt in self.points if pt.ok]
        return max(orders) if orders else 0

    def table(self) -> pd.DataFrame:
        """
        One row per bias current with eta, every p_i and their standard errors.

        p_i above the selected i_max is exactly 1 with zero error. Failed
        currents keep their row with NaN parameters and the error message.
        """
        width = self.max_i_max + 1
        rows = []
        for pt in self.points:
            row: Dict[str, Any] = {"bias_current_uA": pt.bias_current}
            if not pt.ok:
                row.update({"i_max": math.nan, "chi2_reduced": math.nan, "eta": math.nan, "eta_err": math.nan})
                for i in range(width):
                    row[f"p_{i}"] = math.nan
                    row[f"p_{i}_err"] = math.nan
                row["error"] = pt.error
                rows.append(row)
                continue
            fit = pt.selected
            errors = fit.standard_error_map()
            row.update({
                "i_max": fit.i_max,
                "chi2_reduced": fit.chi2_reduced,
                "eta": fit.model.eta,
                "eta_err": errors.get("eta", math.nan),
            })
            p = fit.model.padded_p(width)
            for i in range(width):
                name = f"p_{i}"
                row[name] = float(p[i])
                # pinned or absent entries are exact
                row[f"{name}_err"] = errors.get(name, 0.0)
            row["error"] = ""
            rows.append(row)
        return pd.DataFrame(rows)

    def dominant_orders(self, threshold: Optional[float] = None) -> List[Optional[int]]:
        threshold = self.config.dominance_threshold if threshold is None else threshold
        return [dominant_order(pt.selected.model, threshold) if pt.ok else None for pt in self.points]


def analyze_sweep(
    datasets: Mapping[float, Sequence[ClickStatistics]],
    selection_config: Optional[SelectionConfig] = None,
    fit_config: Optional[FitConfig] = None,
    sweep_config: Optional[SweepConfig] = None,
    threads: Optional[int] = None,
) -> SweepResult:
    """
    Run model selection independently at every bias current.

    Currents are analysed concurrently and merged in ascending order. A
    failure at one current is recorded on that point and does not stop the
    sweep.

    Args:
        datasets: Bias current (uA) to click statistics
        selection_config: Ladder settings
        fit_config: Candidate fit settings
        sweep_config: Regime diagnostic settings
        threads: Concurrent currents (None means all cores)

    Returns:
        SweepResult sorted by bias current

    Raises:
        ArityError: If no bias current is given
    """
    if not datasets:
        raise ArityError("sweep needs at least one bias current")
    currents = sorted(datasets, key=float)
    inner_threads = 1 if len(currents) > 1 else threads

    def analyze(current) -> SweepPoint:
        try:
            report = select_model(
                datasets[current], config=selection_config, fit_config=fit_config, threads=inner_threads
            )
        except SelectionError as e:
            logger.warning("bias current %g uA: %s", float(current), e)
            return SweepPoint(float(current), e.report, str(e))
        except EpdcError as e:
            logger.warning("bias current %g uA failed: %s", float(current), e)
            return SweepPoint(float(current), None, str(e))
        logger.info("bias current %g uA: i_max=%d", float(current), report.selected_i_max)
        return SweepPoint(float(current), report)

    points = ordered_map(analyze, currents, threads)
    return SweepResult(points=points, config=sweep_config or SweepConfig())


def regime_crossover(model: EpdcModel, i: int, j: int) -> float:
    """
    Effective mean photon number where ``p_i c_i(mu) = p_j c_j(mu)``.

    Solved in closed form, ``mu = (p_i j! / (p_j i!)) ** (1 / (j - i))``,
    in log space.

    Raises:
        ValidationError: Unless ``0 <= i < j <= i_max``
        NoCrossoverError: If ``p_i`` or ``p_j`` is zero
    """
    if not 0 <= i < j <= model.i_max:
        raise ValidationError(f"need 0 <= i < j <= i_max={model.i_max}, got i={i}, j={j}")
    p_i, p_j = model.p[i], model.p[j]
    if p_i <= 0.0 or p_j <= 0.0:
        raise NoCrossoverError(f"no crossover between orders {i} and {j}: p_{i}={p_i}, p_{j}={p_j}")
    log_mu = (math.log(p_i) - math.log(p_j) + gammaln(j + 1) - gammaln(i + 1)) / (j - i)
    return math.exp(log_mu)


def crossover_table(model: EpdcModel) -> List[Dict[str, float]]:
    """Crossover mu and incident N between consecutive nonzero click probabilities."""
    orders = [i for i, value in enumerate(model.p) if value > 0.0]
    table = []
    for i, j in zip(orders, orders[1:]):
        mu = regime_crossover(model, i, j)
        table.append({"i": i, "j": j, "mu": mu, "mean_photons": mu / model.eta})
    return table


def dominant_order(model: EpdcModel, threshold: float = 0.01) -> int:
    """Smallest ``i >= 1`` whose click probability reaches ``threshold``."""
    p = model.padded_p(model.i_max + 2)
    return next(i for i in range(1, p.size) if p[i] >= threshold)


def regime_boundaries(sweep: SweepResult, threshold: Optional[float] = None) -> List[float]:
    """
    Bias currents where the dominant low-power order changes.

    Each boundary is the midpoint between the two adjacent successful sweep
    points on either side of the change.

    Raises:
        ValidationError: With fewer than three sweep points
    """
    if len(sweep.points) < 3:
        raise ValidationError(f"regime boundaries need at least 3 sweep points, got {len(sweep.points)}")
    pairs = [
        (pt.bias_current, order)
        for pt, order in zip(sweep.points, sweep.dominant_orders(threshold))
        if order is not None
    ]
    return [
        0.5 * (a + b)
        for (a, order_a), (b, order_b) in zip(pairs, pairs[1:])
        if order_a != order_b
    ]


def boundary_spacings(boundaries: Sequence[float]) -> List[float]:
    """Gaps between consecutive regime boundaries; a diagnostic only."""
    return [float(d) for d in np.diff(np.asarray(boundaries, dtype=float))]
