"""Tests for the synthetic bench: simulator, oracles and scenario files."""

import math

import numpy as np
import pytest
import yaml
from scipy.optimize import brentq

from src.estimation import chi_square
from src.photon_statistics import EpdcModel, click_probability
from src.synthetic import (
    SyntheticScenario,
    brute_force_click_probability,
    generate_dataset,
    read_scenarios,
    required_cutoff,
    write_scenarios,
)
from src.utils.exceptions import DomainError, TailMassError, ValidationError

from conftest import REFERENCE_GRID


def test_always_clicking_detector():
    truth = EpdcModel(eta=0.5, p=(1.0,))
    data = generate_dataset(SyntheticScenario(truth, (0.1, 1.0, 10.0), 10 ** 6, seed=1))
    assert all(point.clicks == point.trials for point in data)


def test_single_photon_threshold_detector_rate():
    """R = 1 - 1/e at one photon, within five standard deviations."""
    truth = EpdcModel(eta=1.0, p=(0.0, 1.0))
    trials = 10 ** 6
    (point,) = generate_dataset(SyntheticScenario(truth, (1.0,), trials, seed=42))
    expected = 1.0 - math.exp(-1.0)
    sigma = math.sqrt(expected * (1 - expected) / trials)
    assert abs(point.rate - expected) <= 5 * sigma


def test_noiseless_counts_round_expectation(reference_model):
    data = generate_dataset(SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 9, noiseless=True))
    for point in data:
        assert point.clicks == round(click_probability(reference_model, point.mean_photons) * 10 ** 9)


def test_same_seed_same_dataset(reference_model):
    scenario = SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 6, seed=7)
    assert generate_dataset(scenario) == generate_dataset(scenario)
    other = SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 6, seed=8)
    assert generate_dataset(scenario) != generate_dataset(other)


def test_dataset_does_not_depend_on_threads(reference_model):
    scenario = SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 6, seed=7)
    assert generate_dataset(scenario, threads=1) == generate_dataset(scenario, threads=4)


def test_reported_means_follow_grid(reference_model):
    data = generate_dataset(SyntheticScenario(reference_model, REFERENCE_GRID, 1000, seed=1))
    assert [point.mean_photons for point in data] == list(REFERENCE_GRID)
    assert all(point.trials == 1000 for point in data)


def test_low_rate_point(reference_model):
    """A probe tuned to R = 1e-6 yields about a thousand clicks in 1e9 pulses."""
    n = brentq(lambda x: click_probability(reference_model, x) - 1e-6, 1e-3, 1e3, xtol=1e-14)
    (point,) = generate_dataset(SyntheticScenario(reference_model, (n,), 10 ** 9, seed=5))
    assert abs(point.clicks - 1000) <= 5 * math.sqrt(1000)


def test_power_jitter_inflates_scatter(reference_model):
    steady = generate_dataset(SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 7, seed=11))
    jittered = generate_dataset(
        SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 7, seed=11, power_jitter=0.1)
    )
    assert [p.mean_photons for p in jittered] == list(REFERENCE_GRID)
    assert chi_square(jittered, reference_model) > 10 * chi_square(steady, reference_model)


@pytest.mark.slow
def test_truth_chi_square_matches_point_count():
    """Averaged over 2000 seeds the truth scores one unit of chi-square per point."""
    truth = EpdcModel(eta=1.0, p=(0.0, 1.0))
    # R from 0.01 to 0.9
    grid = np.geomspace(-math.log(0.99), -math.log(0.1), 10)
    scores = [
        chi_square(
            generate_dataset(SyntheticScenario(truth, grid, 10 ** 6, seed=seed, weight_scheme="binomial")),
            truth,
        )
        for seed in range(2000)
    ]
    assert np.mean(scores) / grid.size == pytest.approx(1.0, abs=0.05)


@pytest.mark.slow
def test_standardized_residuals_per_probe_point():
    """Binomial weights: each point's (rate - R)/sigma has mean ~0 and variance ~1."""
    truth = EpdcModel(eta=1.0, p=(0.0, 1.0))
    grid = np.geomspace(-math.log(0.99), -math.log(0.1), 10)
    expected = click_probability(truth, grid)
    residuals = np.array([
        [
            (point.rate - r) / point.sigma
            for point, r in zip(
                generate_dataset(SyntheticScenario(truth, grid, 10 ** 6, seed=seed, weight_scheme="binomial")),
                expected,
            )
        ]
        for seed in range(2000)
    ])
    assert np.all(np.abs(residuals.mean(axis=0)) <= 0.1)
    variance = residuals.var(axis=0, ddof=1)
    assert np.all((variance >= 0.8) & (variance <= 1.2))


def test_brute_force_examples(reference_model):
    one_photon = EpdcModel(eta=1.0, p=(0.0, 1.0))
    assert brute_force_click_probability(one_photon, math.log(2.0), 60) == pytest.approx(0.5, rel=1e-13)
    assert brute_force_click_probability(reference_model, 0.0, 10) == 0.0
    dark = EpdcModel(eta=0.5, p=(0.25, 0.5))
    assert brute_force_click_probability(dark, 0.0, 5) == 0.25


def test_stable_evaluator_agrees_with_brute_force():
    """200 random models at 30 probe points each."""
    rng = np.random.default_rng(2024)
    for _ in range(200):
        k = int(rng.integers(0, 8))
        truth = EpdcModel(eta=float(10 ** rng.uniform(-3.0, 0.0)), p=tuple(np.sort(rng.uniform(0.0, 1.0, k + 1))))
        mu = np.geomspace(1e-9, 1e3, 30)
        for n in mu / truth.eta:
            cutoff = required_cutoff(truth.eta * n)
            expected = brute_force_click_probability(truth, n, cutoff)
            assert click_probability(truth, n) == pytest.approx(expected, rel=1e-10)


def test_low_rate_evaluation_keeps_eight_digits(reference_model):
    n = brentq(
        lambda x: brute_force_click_probability(reference_model, x, required_cutoff(reference_model.eta * x)) - 1e-6,
        1e-3,
        1e3,
        xtol=1e-14,
    )
    expected = brute_force_click_probability(reference_model, n, required_cutoff(reference_model.eta * n))
    assert expected == pytest.approx(1e-6, rel=1e-9)
    assert click_probability(reference_model, n) == pytest.approx(expected, rel=1e-8)


def test_required_cutoff_bounds_tail():
    for mu in (0.0, 0.5, 12.0, 300.0):
        cutoff = required_cutoff(mu)
        assert cutoff >= mu
        truth = EpdcModel(eta=1.0, p=(0.0, 0.5))
        brute_force_click_probability(truth, mu, cutoff)


def test_tail_mass_guard(reference_model):
    with pytest.raises(TailMassError):
        brute_force_click_probability(reference_model, 1e5, 5)
    with pytest.raises(DomainError):
        brute_force_click_probability(reference_model, -1.0, 5)


def test_scenario_round_trip(tmp_path, reference_model):
    scenarios = [
        SyntheticScenario(reference_model, REFERENCE_GRID, 10 ** 7, seed=3, bias_current=17.5),
        SyntheticScenario(EpdcModel(eta=1e-3, p=(0.0, 1.0)), (1.0, 10.0, 100.0), 1000, noiseless=True),
    ]
    path = write_scenarios(scenarios, tmp_path / "scenarios.yaml")
    assert read_scenarios(path) == scenarios
    document = yaml.safe_load(path.read_text())
    assert document["schema_version"] == 1
    assert document["scenarios"][0]["bias_current_uA"] == 17.5


def test_scenario_file_with_grid_spec_and_defaults(tmp_path):
    path = tmp_path / "single.yaml"
    path.write_text(
        "truth:\n"
        "  eta: 1.2e-4\n"
        "  p: [0.0, 0.06, 0.37]\n"
        "probe_grid: {start: 0.14, stop: 1.0e+5, num: 25}\n"
    )
    (scenario,) = read_scenarios(path, defaults={"trials_per_point": 5000, "seed": 9})
    assert scenario.trials_per_point == 5000
    assert scenario.seed == 9
    assert len(scenario.probe_grid) == 25
    assert scenario.probe_grid[0] == pytest.approx(0.14)
    assert scenario.probe_grid[-1] == pytest.approx(1e5)


def test_scenario_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_scenarios(tmp_path / "missing.yaml")
    wrong_version = tmp_path / "v2.yaml"
    wrong_version.write_text("schema_version: 2\nscenarios: []\n")
    with pytest.raises(ValidationError):
        read_scenarios(wrong_version)
    incomplete = tmp_path / "incomplete.yaml"
    incomplete.write_text("scenarios:\n  - probe_grid: [1.0, 2.0]\n    trials_per_point: 10\n")
    with pytest.raises(ValidationError, match="truth"):
        read_scenarios(incomplete)


@pytest.mark.parametrize(
    "changes",
    [
        {"probe_grid": (10.0, 1.0)},
        {"probe_grid": (0.0, 1.0)},
        {"probe_grid": ()},
        {"trials_per_point": 0},
        {"trials_per_point": 2.5},
        {"seed": -1},
        {"power_jitter": -0.1},
        {"weight_scheme": "gaussian"},
        {"truth": {"eta": 0.1, "p": [0.0]}},
    ],
)
def test_scenario_validation(reference_model, changes):
    arguments = {"truth": reference_model, "probe_grid": (1.0, 10.0), "trials_per_point": 100}
    arguments.update(changes)
    with pytest.raises(ValidationError):
        SyntheticScenario(**arguments)
