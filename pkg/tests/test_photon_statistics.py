"""Tests for the Poisson click model and photon-number distributions."""

import math

import mpmath
import numpy as np
import pytest

from src.photon_statistics import (
    EpdcModel,
    PhotonNumberDistribution,
    click_probability,
    click_probability_jacobian,
    no_click_probability,
    poisson_tail,
    poisson_weight,
    poisson_weights,
    predict_response,
)
from src.utils.exceptions import DomainError, ValidationError


def test_poisson_weight_examples():
    """Vacuum, e^-1 and a two-photon weight."""
    assert poisson_weight(0, 0.0) == 1.0
    assert poisson_weight(3, 0.0) == 0.0
    assert poisson_weight(1, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert poisson_weight(2, 0.324) == pytest.approx(0.0379619587, rel=1e-9)


@pytest.mark.parametrize("mu", [1e-9, 1e-3, 0.5, 3.0, 30.0])
@pytest.mark.parametrize("i, rel", [(0, 1e-13), (1, 1e-13), (2, 1e-13), (7, 1e-13), (50, 1e-11), (200, 1e-11)])
def test_poisson_weight_matches_mpmath(i, rel, mu):
    """Log-space weights agree with 50-digit arithmetic."""
    with mpmath.workdps(50):
        reference = mpmath.exp(-mpmath.mpf(mu)) * mpmath.mpf(mu) ** i / mpmath.factorial(i)
    expected = float(reference)
    if expected == 0.0:
        assert poisson_weight(i, mu) == 0.0
    else:
        assert poisson_weight(i, mu) == pytest.approx(expected, rel=rel)


@pytest.mark.parametrize("i, mu", [(150, 1e3), (200, 1e4), (10, 1e6)])
def test_poisson_weight_large_mean(i, mu):
    """Large means stay finite and close to the exact value."""
    with mpmath.workdps(60):
        expected = float(mpmath.exp(-mpmath.mpf(mu)) * mpmath.mpf(mu) ** i / mpmath.factorial(i))
    value = poisson_weight(i, mu)
    assert math.isfinite(value)
    if expected > 0.0:
        assert value == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("bad", [(-1, 1.0), (1.5, 1.0), (1, -0.1), (1, math.nan)])
def test_poisson_weight_domain_errors(bad):
    with pytest.raises(DomainError):
        poisson_weight(*bad)


def test_normalization_weights_plus_tail():
    """Weights up to K plus the tail above K sum to one."""
    for mu in np.geomspace(1e-9, 1e3, 30):
        for k in (0, 1, 2, 5, 20, 50):
            total = math.fsum(poisson_weights(np.arange(k + 1), mu).tolist()) + poisson_tail(k, mu)
            assert total == pytest.approx(1.0, abs=1e-12)


def test_click_probability_examples():
    """Closed-form threshold detectors and the vacuum limit."""
    one_photon = EpdcModel(eta=1.0, p=(0.0, 1.0))
    assert click_probability(one_photon, math.log(2.0)) == pytest.approx(0.5, rel=1e-14)

    dark = EpdcModel(eta=0.3, p=(0.2,))
    assert click_probability(dark, 0.0) == 0.2

    two_photon = EpdcModel(eta=1.0, p=(0.0, 0.0, 1.0))
    assert click_probability(two_photon, 1.0) == pytest.approx(1.0 - 2.0 * math.exp(-1.0), rel=1e-14)


def test_vacuum_returns_exact_p0(reference_model):
    assert click_probability(reference_model, 0.0) == reference_model.p[0]
    assert click_probability(EpdcModel(eta=0.5, p=(0.123, 0.4)), 0.0) == 0.123


def test_one_and_two_photon_contributions_cross_at_equality_point(reference_model):
    """p_1 c_1 = p_2 c_2 at mu = 2 p_1 / p_2."""
    mu = 2.0 * 0.06 / 0.37
    assert mu == pytest.approx(0.3243, abs=1e-4)
    assert 0.06 * poisson_weight(1, mu) == pytest.approx(0.37 * poisson_weight(2, mu), rel=1e-14)


def test_click_probability_vectorized(reference_model):
    grid = np.geomspace(1.0, 1e6, 11)
    values = click_probability(reference_model, grid)
    assert values.shape == grid.shape
    assert values == pytest.approx([click_probability(reference_model, n) for n in grid], rel=1e-14)


def test_no_overflow_at_large_mean():
    model = EpdcModel(eta=1.0, p=(0.0, 0.3, 0.5))
    assert click_probability(model, 1e6) == 1.0
    assert np.all(np.isfinite(click_probability(model, np.array([1e5, 1e6]))))


def test_no_click_is_complement(reference_model):
    grid = np.geomspace(1.0, 1e5, 20)
    total = click_probability(reference_model, grid) + no_click_probability(reference_model, grid)
    assert total == pytest.approx(np.ones_like(grid), abs=1e-14)


def test_saturation():
    model = EpdcModel(eta=1e-3, p=(0.0, 0.01, 0.2, 0.6))
    assert click_probability(model, 1e6 / model.eta) > 1.0 - 1e-6


def test_monotone_and_bounded_for_nondecreasing_models():
    """1000 random nondecreasing models are monotone and stay in [p_0, 1]."""
    rng = np.random.default_rng(7)
    mu = np.geomspace(1e-9, 1e3, 60)
    violations = 0
    for _ in range(1000):
        k = int(rng.integers(0, 7))
        p = np.sort(rng.uniform(0.0, 1.0, k + 1))
        eta = float(10.0 ** rng.uniform(-6.0, 0.0))
        model = EpdcModel(eta=eta, p=tuple(p))
        rates = click_probability(model, mu / eta)
        violations += int(np.any(np.diff(rates) < -1e-13))
        violations += int(np.any(rates < model.p[0] - 1e-15) or np.any(rates > 1.0))
    assert violations == 0


def test_complement_form_equivalence():
    """Textbook one-minus form in extended precision agrees for mu <= 30."""
    from src.synthetic import complement_form_click_probability

    rng = np.random.default_rng(11)
    for _ in range(20):
        model = EpdcModel(eta=1.0, p=tuple(rng.uniform(0.0, 1.0, int(rng.integers(1, 6)))))
        for mu in np.geomspace(1e-6, 30.0, 15):
            stable = click_probability(model, mu)
            assert stable == pytest.approx(complement_form_click_probability(model, mu), rel=1e-9)


def test_jacobian_matches_finite_differences(reference_model):
    grid = np.geomspace(0.5, 1e5, 12)
    jac = click_probability_jacobian(reference_model, grid)
    base = reference_model.parameter_vector()
    for column in range(base.size):
        h = 1e-6 * (1.0 + abs(base[column]))
        if column == 0:
            h = 1e-6 * base[0]
        up, down = base.copy(), base.copy()
        up[column] += h
        down[column] -= h
        down[column] = max(down[column], 0.0)
        step = up[column] - down[column]
        numeric = (
            click_probability(EpdcModel.from_vector(up), grid)
            - click_probability(EpdcModel.from_vector(down), grid)
        ) / step
        assert jac[:, column] == pytest.approx(numeric, rel=1e-4, abs=1e-12)


def test_model_validation_lists_every_violation():
    with pytest.raises(ValidationError) as excinfo:
        EpdcModel(eta=0.0, p=(1.5, -0.1))
    message = str(excinfo.value)
    assert "eta" in message and "p_0" in message and "p_1" in message


def test_model_round_trip_and_extension(reference_model):
    assert EpdcModel.from_dict(reference_model.to_dict()) == reference_model
    extended = reference_model.extended(4)
    assert extended.p == (0.0, 0.06, 0.37, 1.0, 1.0)
    grid = np.geomspace(1.0, 1e5, 9)
    assert click_probability(extended, grid) == pytest.approx(click_probability(reference_model, grid), rel=1e-14)
    with pytest.raises(ValidationError):
        EpdcModel.from_dict({"eta": 0.1, "p": [0.0, 1.0], "i_max": 3})


def test_predict_response_fock_examples():
    assert predict_response(EpdcModel(eta=1.0, p=(0.0, 1.0)), PhotonNumberDistribution.fock(1)) == 1.0
    assert predict_response(EpdcModel(eta=0.5, p=(0.0, 1.0)), PhotonNumberDistribution.fock(1)) == pytest.approx(0.5)
    assert predict_response(
        EpdcModel(eta=0.5, p=(0.0, 0.0, 1.0)), PhotonNumberDistribution.fock(2)
    ) == pytest.approx(0.25)


@pytest.mark.parametrize(
    "mean, eta",
    [(0.0, 0.35), (0.3, 0.35), (4.0, 0.35), (60.0, 0.35), (1e4, 1.2e-4), (2e5, 1.2e-4), (2e6, 1.2e-6)],
)
def test_predict_response_matches_coherent_click_probability(mean, eta):
    """Binomial thinning of Poisson input reproduces the coherent formula."""
    model = EpdcModel(eta=eta, p=(0.01, 0.2, 0.55, 0.9))
    dist = PhotonNumberDistribution.coherent(mean)
    assert predict_response(model, dist) == pytest.approx(click_probability(model, mean), abs=1e-10)


@pytest.mark.parametrize("mean", [4e3, 1e4, 1e5])
def test_large_mean_distributions_are_normalized(mean):
    for dist in (PhotonNumberDistribution.coherent(mean), PhotonNumberDistribution.thermal(mean)):
        assert math.fsum(dist.weights) == pytest.approx(1.0, abs=1e-12)
        assert dist.mean == pytest.approx(mean, rel=1e-6)


def test_thermal_distribution_response_exceeds_zero_and_normalizes():
    dist = PhotonNumberDistribution.thermal(2.0)
    assert math.fsum(dist.weights) == pytest.approx(1.0, abs=1e-12)
    assert dist.mean == pytest.approx(2.0, rel=1e-9)
    model = EpdcModel(eta=0.5, p=(0.0, 0.5))
    assert 0.0 < predict_response(model, dist) < 1.0


def test_povm_diagonal_at_large_cutoff():
    """One-photon threshold detector: q_n = 1 - (1 - eta)^n, up to 5e4 photons."""
    diagonal = EpdcModel(eta=1e-4, p=(0.0, 1.0)).povm_diagonal(50_000)
    n = np.arange(50_001)
    assert diagonal.shape == (50_001,)
    assert diagonal == pytest.approx(-np.expm1(n * np.log1p(-1e-4)), rel=1e-9, abs=1e-15)


def test_distribution_validation():
    with pytest.raises(ValidationError):
        PhotonNumberDistribution([0.5, 0.4])
    with pytest.raises(ValidationError):
        PhotonNumberDistribution([1.2, -0.2])
    weights = PhotonNumberDistribution([0.25, 0.75]).weights
    with pytest.raises(ValueError):
        weights[0] = 1.0


def test_povm_diagonal_is_fock_response(reference_model):
    diagonal = reference_model.povm_diagonal(5)
    assert diagonal[0] == reference_model.p[0]
    for n in range(6):
        assert diagonal[n] == pytest.approx(predict_response(reference_model, PhotonNumberDistribution.fock(n)))
