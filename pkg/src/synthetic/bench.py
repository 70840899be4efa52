"""
Ground-truth detector simulator and independent reference evaluators.

Datasets are drawn per probe point from child streams of one
``numpy.random.SeedSequence``, so output depends only on the scenario and
not on how many workers produced it.
"""

import logging
import math
from dataclasses import dataclass
from numbers import Integral
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import mpmath
import numpy as np
import yaml
from scipy.special import gammaln

from ..estimation import ClickStatistics
from ..estimation.click_statistics import WEIGHT_SCHEMES
from ..photon_statistics import EpdcModel, click_probability, poisson_tail
from ..utils.exceptions import DomainError, TailMassError, ValidationError
from ..utils.helpers import ordered_map

logger = logging.getLogger(__name__)

SCENARIO_SCHEMA_VERSION = 1
DEFAULT_TAIL_MASS = 1e-14


@dataclass(frozen=True)
class SyntheticScenario:
    """Ground truth plus the measurement plan that probes it."""

    truth: EpdcModel
    probe_grid: tuple
    trials_per_point: int
    seed: int = 0
    bias_current: Optional[float] = None
    power_jitter: float = 0.0
    noiseless: bool = False
    weight_scheme: str = "poisson"

    def __post_init__(self):
        if not isinstance(self.truth, EpdcModel):
            raise ValidationError("scenario truth must be an EpdcModel")
        grid = tuple(float(n) for n in np.atleast_1d(np.asarray(self.probe_grid, dtype=float)))
        if not grid or any(not (math.isfinite(n) and n > 0.0) for n in grid):
            raise ValidationError("probe_grid must be a non-empty list of positive numbers")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("probe_grid must be strictly increasing")
        object.__setattr__(self, "probe_grid", grid)
        if isinstance(self.trials_per_point, bool) or int(self.trials_per_point) != self.trials_per_point \
                or int(self.trials_per_point) < 1:
            raise ValidationError(f"trials_per_point must be an integer >= 1, got {self.trials_per_point!r}")
        object.__setattr__(self, "trials_per_point", int(self.trials_per_point))
        if not isinstance(self.seed, Integral) or not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if not (math.isfinite(self.power_jitter) and self.power_jitter >= 0.0):
            raise ValidationError("power_jitter must be a nonnegative fraction")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ValidationError(f"weight_scheme must be one of {WEIGHT_SCHEMES}")

    @staticmethod
    def log_grid(start: float, stop: float, num: int) -> tuple:
        """Log-spaced probe grid from ``start`` to ``stop`` inclusive."""
        return tuple(float(n) for n in np.geomspace(start, stop, int(num)))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "truth": self.truth.to_dict(),
            "probe_grid": list(self.probe_grid),
            "trials_per_point": self.trials_per_point,
            "seed": self.seed,
            "power_jitter": self.power_jitter,
            "noiseless": self.noiseless,
            "weight_scheme": self.weight_scheme,
        }
        if self.bias_current is not None:
            data["bias_current_uA"] = self.bias_current
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SyntheticScenario":
        """
        Build a scenario from its mapping form.

        ``probe_grid`` may be an explicit list or ``{start, stop, num}``.
        """
        try:
            grid = data["probe_grid"]
            if isinstance(grid, dict):
                grid = cls.log_grid(grid["start"], grid["stop"], grid["num"])
            return cls(
                truth=EpdcModel.from_dict(data["truth"]),
                probe_grid=tuple(grid),
                trials_per_point=data["trials_per_point"],
                seed=data.get("seed", 0),
                bias_current=data.get("bias_current_uA"),
                power_jitter=float(data.get("power_jitter", 0.0)),
                noiseless=bool(data.get("noiseless", False)),
                weight_scheme=data.get("weight_scheme", "poisson"),
            )
        except KeyError as e:
            raise ValidationError(f"scenario definition is missing {e.args[0]!r}")


def generate_dataset(scenario: SyntheticScenario, threads: Optional[int] = None) -> List[ClickStatistics]:
    """
    Simulate click statistics for every probe point of a scenario.

    Clicks are ``Binomial(trials, R(N))`` with ``R`` from the ground truth;
    a noiseless scenario rounds the expectation instead. With power jitter
    the probe mean is scaled by ``1 + jitter * z`` per point before drawing,
    while the reported mean stays nominal.

    Args:
        scenario: Validated scenario
        threads: Workers for per-point generation

    Returns:
        Click statistics ordered like ``probe_grid``
    """
    if not isinstance(scenario, SyntheticScenario):
        raise ValidationError("expected a SyntheticScenario")
    grid = np.asarray(scenario.probe_grid)
    rates = click_probability(scenario.truth, grid)
    streams = np.random.SeedSequence(scenario.seed).spawn(grid.size)
    trials = scenario.trials_per_point

    def draw(index: int) -> ClickStatistics:
        rate = float(rates[index])
        if scenario.noiseless:
            clicks = int(np.rint(rate * trials))
        else:
            rng = np.random.default_rng(streams[index])
            if scenario.power_jitter > 0.0:
                factor = max(0.0, 1.0 + scenario.power_jitter * rng.standard_normal())
                rate = click_probability(scenario.truth, grid[index] * factor)
            clicks = int(rng.binomial(trials, rate))
        return ClickStatistics.from_counts(float(grid[index]), clicks, trials, scenario.weight_scheme)

    dataset = ordered_map(draw, range(grid.size), threads)
    logger.debug("generated %d points from seed %d", len(dataset), scenario.seed)
    return dataset


def required_cutoff(mu: float, tail_mass: float = DEFAULT_TAIL_MASS) -> int:
    """Smallest photon number whose upper Poisson tail is below ``tail_mass``."""
    cutoff = int(math.ceil(mu + 12.0 * math.sqrt(mu) + 40.0))
    while poisson_tail(cutoff, mu) > tail_mass:
        cutoff += 10
    return cutoff


def brute_force_click_probability(
    truth: EpdcModel,
    mean_photons: float,
    photon_cutoff: int,
    tail_mass: float = DEFAULT_TAIL_MASS,
) -> float:
    """
    Direct term-by-term evaluation of ``sum_i p_i c_i(eta N)``.

    Terms run over ``0 .. photon_cutoff`` with the unit tail written out
    explicitly and are accumulated with exactly rounded summation. Meant as
    an oracle for the stable evaluator, not for production use.

    Args:
        truth: Detector model
        mean_photons: Incident mean photon number
        photon_cutoff: Largest photon number summed

    Returns:
        Click probability

    Raises:
        TailMassError: If the neglected Poisson tail exceeds ``tail_mass``
    """
    if not isinstance(photon_cutoff, Integral) or photon_cutoff < 0:
        raise DomainError(f"photon_cutoff must be a nonnegative integer, got {photon_cutoff!r}")
    if not (math.isfinite(mean_photons) and mean_photons >= 0.0):
        raise DomainError(f"mean_photons must be finite and nonnegative, got {mean_photons!r}")
    mu = truth.eta * float(mean_photons)
    neglected = poisson_tail(int(photon_cutoff), mu)
    if neglected > tail_mass:
        raise TailMassError(
            f"cutoff {photon_cutoff} leaves Poisson tail {neglected:.3g} > {tail_mass:g} at mu={mu:.6g}"
        )
    if mu == 0.0:
        return truth.p[0]
    ks = np.arange(photon_cutoff + 1, dtype=float)
    terms = np.exp(ks * math.log(mu) - mu - gammaln(ks + 1.0)) * truth.padded_p(ks.size)
    return math.fsum(terms.tolist())


def complement_form_click_probability(model: EpdcModel, mean_photons: float, dps: int = 50) -> float:
    """
    ``1 - exp(-mu) sum_{i<=i_max} (1 - p_i) mu^i / i!`` in ``dps``-digit arithmetic.

    The textbook one-minus-a-sum form; only trustworthy with extra precision.
    """
    with mpmath.workdps(dps):
        mu = mpmath.mpf(model.eta) * mpmath.mpf(mean_photons)
        miss = mpmath.fsum(
            (1 - mpmath.mpf(p)) * mu ** i / mpmath.factorial(i) for i, p in enumerate(model.p)
        )
        return float(1 - mpmath.exp(-mu) * miss)


def write_scenarios(scenarios: Sequence[SyntheticScenario], path: Union[str, Path]) -> Path:
    """Write scenarios to a versioned YAML file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "kind": "epdc-scenarios",
        "scenarios": [s.to_dict() for s in scenarios],
    }
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(document, f, sort_keys=False)
    return path


def read_scenarios(path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> List[SyntheticScenario]:
    """
    Read a scenario file written by :func:`write_scenarios` or by hand.

    A single scenario mapping at top level is accepted too. Keys missing
    from a scenario are taken from ``defaults`` (the ``synthesis`` config
    section).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        document = yaml.safe_load(f)
    if not isinstance(document, dict):
        raise ValidationError(f"{path}: scenario file must contain a mapping")
    version = document.get("schema_version", SCENARIO_SCHEMA_VERSION)
    if version != SCENARIO_SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported scenario schema_version {version!r}")
    entries = document.get("scenarios", [document] if "truth" in document else [])
    if not entries:
        raise ValidationError(f"{path}: no scenarios defined")
    defaults = dict(defaults or {})
    return [SyntheticScenario.from_dict({**defaults, **entry}) for entry in entries]
