import math

import numpy as np
import pytest

from core.detector_model import discretized_gaussian, gaussian_bin_masses, pmf_counts_given_state, pmf_mean_markov, sample_readout
from core.exceptions import DomainError
from core.random_streams import make_generator
from models.params import CascadeParams, DetectorParams, HyperfineState


def test_f1_without_background_is_point_mass(silent_detector):
    pmf = pmf_counts_given_state(HyperfineState.F1, silent_detector)
    assert pmf.masses.tolist() == [1.0]
    assert pmf.tail_mass == 0.0


def test_f1_is_poisson_background(detector):
    pmf = pmf_counts_given_state("F1", detector)
    assert pmf.mean() == pytest.approx(1.146, abs=1e-10)
    assert pmf.variance() == pytest.approx(1.146, abs=1e-9)


def test_f2_markov_mean(detector):
    pmf = pmf_counts_given_state(HyperfineState.F2, detector)
    assert pmf.mean() == pytest.approx(pmf_mean_markov(detector), abs=1e-8)
    assert pmf_mean_markov(detector) == pytest.approx(5.9, abs=0.01)


def test_gaussian_heuristic_discretization_keeps_the_mean(gaussian_detector):
    pmf = pmf_counts_given_state(HyperfineState.F2, gaussian_detector)
    assert pmf.masses.sum() + pmf.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert abs(pmf.diagnostics["discretization_shift"]) < 0.1
    # clipping at n >= 0 pushes the mean up
    assert pmf.diagnostics["clipping_shift"] > 0.0
    assert pmf.mean() == pytest.approx(5.9 + pmf.diagnostics["discretization_shift"] + pmf.diagnostics["clipping_shift"], abs=1e-8)


def test_gaussian_bin_masses_match_pmf():
    pmf = discretized_gaussian(5.9, 17.6)
    n = np.arange(pmf.masses.size)
    assert np.allclose(gaussian_bin_masses(n, 5.9, 17.6), pmf.masses, rtol=1e-12, atol=1e-15)


def test_gaussian_convolved_with_background_shifts_mean():
    plain = DetectorParams(f2_model="gaussian_heuristic")
    convolved = DetectorParams(f2_model="gaussian_heuristic", gauss_convolve_background=True)
    shifted = pmf_counts_given_state(HyperfineState.F2, convolved)
    base = pmf_counts_given_state(HyperfineState.F2, plain)
    assert shifted.mean() == pytest.approx(base.mean() + 1.146, abs=1e-8)
    assert shifted.diagnostics["convolved_background"] == 1.146


def test_invalid_gaussian_is_rejected():
    with pytest.raises(DomainError):
        discretized_gaussian(5.9, 0.0)
    with pytest.raises(DomainError):
        discretized_gaussian(-200.0, 1.0)
    with pytest.raises(DomainError):
        DetectorParams(f2_model="lorentzian")


def test_f1_without_background_never_counts(silent_detector, rng):
    assert not np.any(sample_readout(HyperfineState.F1, silent_detector, rng, 1000))
    assert sample_readout(HyperfineState.F1, silent_detector, rng) == 0


def test_sampling_is_reproducible(gaussian_detector):
    first = sample_readout("F2", gaussian_detector, make_generator(9, label="readout"), 500)
    second = sample_readout("F2", gaussian_detector, make_generator(9, label="readout"), 500)
    assert np.array_equal(first, second)
    assert first.min() >= 0


@pytest.mark.statistical
def test_markov_sample_mean_matches_pmf(detector, rng):
    draws = sample_readout(HyperfineState.F2, detector, rng, 1_000_000)
    pmf = pmf_counts_given_state(HyperfineState.F2, detector)
    std_error = math.sqrt(pmf.variance() / draws.size)
    assert abs(draws.mean() - pmf.mean()) < 3.0 * std_error


@pytest.mark.statistical
@pytest.mark.parametrize("state", [HyperfineState.F1, HyperfineState.F2])
def test_markov_sampler_matches_pmf_in_total_variation(detector, state):
    draws = sample_readout(state, detector, make_generator(11, label="tvd"), 2_000_000)
    pmf = pmf_counts_given_state(state, detector)
    length = max(int(draws.max()) + 1, pmf.masses.size)
    empirical = np.bincount(draws, minlength=length) / draws.size
    tvd = 0.5 * (np.abs(empirical - pmf.padded(length)).sum() + pmf.tail_mass)
    assert tvd < 0.005


@pytest.mark.statistical
def test_gaussian_sampler_goodness_of_fit(gaussian_detector, rng, chi_square_pvalue):
    draws = sample_readout(HyperfineState.F2, gaussian_detector, rng, 200_000)
    pmf = pmf_counts_given_state(HyperfineState.F2, gaussian_detector)
    assert chi_square_pvalue(draws, pmf.masses) > 1e-3


def test_cascade_params_domain():
    with pytest.raises(DomainError):
        CascadeParams(scatter_survival=1.0)
    with pytest.raises(DomainError):
        CascadeParams(det_efficiency=0.0)
    with pytest.raises(DomainError):
        CascadeParams(bg_mean=-1.0)
