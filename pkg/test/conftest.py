import logging

import numpy as np
import pytest
from scipy.stats import chisquare

from core.random_streams import make_generator
from models.params import CascadeParams, DetectorParams, ExposureParams


@pytest.fixture
def rng():
    return make_generator(20240601, label="test")


@pytest.fixture
def detector():
    return DetectorParams()


@pytest.fixture
def gaussian_detector():
    return DetectorParams(f2_model="gaussian_heuristic")


@pytest.fixture
def silent_detector():
    """Detector with no background, so F=1 atoms never give counts."""
    return DetectorParams(cascade=CascadeParams(bg_mean=0.0))


@pytest.fixture
def quiet_exposure():
    """Exposure in which nothing can make the atom jump or leave."""
    return ExposureParams(eta_qj=0.0, mean_probe_photons=100.0, dark_jump_rate=0.0, atom_loss_rate=0.0)


@pytest.fixture
def chi_square_pvalue():
    """Return a goodness-of-fit helper pooling bins with small expected counts."""

    def pvalue(samples, masses, min_expected=5.0):
        samples = np.asarray(samples)
        masses = np.asarray(masses, dtype=float).copy()
        masses[-1] += max(0.0, 1.0 - masses.sum())
        k = masses.size
        observed = np.bincount(samples, minlength=k).astype(float)
        observed[k - 1] += observed[k:].sum()
        observed = observed[:k]
        expected = samples.size * masses / masses.sum()

        keep = expected >= min_expected
        obs = list(observed[keep])
        exp = list(expected[keep])
        rest_obs, rest_exp = observed[~keep].sum(), expected[~keep].sum()
        if rest_exp >= min_expected:
            obs.append(rest_obs)
            exp.append(rest_exp)
        else:
            obs[-1] += rest_obs
            exp[-1] += rest_exp
        return chisquare(obs, exp).pvalue

    return pvalue


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)
