"""Shared fixtures: the few-photon reference detector and datasets drawn from it."""

import numpy as np
import pytest

from src.estimation import FitConfig
from src.photon_statistics import EpdcModel
from src.synthetic import SyntheticScenario, generate_dataset

# eta inside the measured 9.6e-5 .. 14.7e-5 band, p_1 and p_2 as quoted for a
# two-photon-dominant bias point
REFERENCE_ETA = 1.2e-4
REFERENCE_P = (0.0, 0.06, 0.37)

# R from about 1e-6 up to 0.9996 for the reference model
REFERENCE_GRID = tuple(float(n) for n in np.geomspace(0.14, 1.0e5, 25))


@pytest.fixture
def reference_model():
    return EpdcModel(eta=REFERENCE_ETA, p=REFERENCE_P)


@pytest.fixture
def noiseless_data(reference_model):
    scenario = SyntheticScenario(
        truth=reference_model,
        probe_grid=REFERENCE_GRID,
        trials_per_point=10 ** 15,
        noiseless=True,
    )
    return generate_dataset(scenario)


@pytest.fixture
def sampled_data(reference_model):
    scenario = SyntheticScenario(
        truth=reference_model,
        probe_grid=REFERENCE_GRID,
        trials_per_point=10 ** 7,
        seed=2024,
    )
    return generate_dataset(scenario)


@pytest.fixture
def quick_fit_config():
    return FitConfig(n_starts=4)


@pytest.fixture
def three_photon_model():
    return EpdcModel(eta=1.0e-4, p=(0.0, 1e-4, 2e-3, 0.5))
