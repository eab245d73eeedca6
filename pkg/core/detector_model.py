"""Readout measurement model: hyperfine state to count distribution."""

import functools
import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.stats import norm

from models.params import DetectorParams, HyperfineState
from models.pmf import Pmf

from .constants import DEFAULT_TAIL_CUTOFF, MAX_PMF_TERMS
from .distributions import (
    counts_f2_distribution,
    poisson_distribution,
    sample_poisson,
    sample_readout_count_f2,
)
from .exceptions import DomainError

logger = logging.getLogger(__name__)

StateLike = Union[HyperfineState, str]


def _bin_masses(n: np.ndarray, mean: float, std: float) -> np.ndarray:
    """Return Gaussian mass on [n - 1/2, n + 1/2), using whichever tail is accurate."""
    lo = (n - 0.5 - mean) / std
    hi = (n + 0.5 - mean) / std
    return np.where(lo > 0.0, norm.sf(lo) - norm.sf(hi), norm.cdf(hi) - norm.cdf(lo))


def discretized_gaussian(mean: float, var: float, cutoff: float = DEFAULT_TAIL_CUTOFF) -> Pmf:
    """Return a Gaussian integrated over unit bins, clipped at n >= 0 and renormalized.

    Args:
        mean: Gaussian mean
        var: Gaussian variance
        cutoff: Largest tail mass left beyond n_max

    Returns:
        Pmf whose diagnostics carry "discretization_shift" (mean of the
        unclipped bins minus the Gaussian mean) and "clipping_shift"
        (change of mean caused by clipping and renormalizing)

    Raises:
        DomainError: If var <= 0 or no mass lies at n >= 0
    """
    if not (math.isfinite(var) and var > 0.0 and math.isfinite(mean)):
        raise DomainError(f"Gaussian variance must be positive, got {var!r}")
    std = math.sqrt(var)
    kept = float(norm.sf((-0.5 - mean) / std))
    if kept <= cutoff:
        raise DomainError(f"Gaussian({mean}, {var}) has no mass at n >= 0")

    n_max = max(0, math.ceil(mean + std * norm.isf(cutoff * kept) - 0.5))
    n_max = min(n_max, MAX_PMF_TERMS - 1)
    n = np.arange(n_max + 1)
    raw = _bin_masses(n, mean, std)
    masses = raw / kept
    tail = float(norm.sf((n_max + 0.5 - mean) / std)) / kept

    n_low = min(0, math.floor(mean - std * norm.isf(cutoff)))
    full_n = np.arange(n_low, n_max + 1)
    unclipped_mean = float(np.dot(full_n, _bin_masses(full_n, mean, std)))
    clipped_mean = float(np.dot(n, masses))
    diagnostics = {
        "model": "gaussian_heuristic",
        "gauss_mean": mean,
        "gauss_var": var,
        "clipped_mass": 1.0 - kept,
        "discretization_shift": unclipped_mean - mean,
        "clipping_shift": clipped_mean - unclipped_mean,
    }
    return Pmf(masses, tail, diagnostics)


def gaussian_bin_masses(n: np.ndarray, mean: float, var: float) -> np.ndarray:
    """Return the clipped, renormalized Gaussian heuristic masses at counts n (any n >= 0)."""
    if not (math.isfinite(var) and var > 0.0):
        raise DomainError(f"Gaussian variance must be positive, got {var!r}")
    std = math.sqrt(var)
    kept = float(norm.sf((-0.5 - mean) / std))
    return _bin_masses(np.asarray(n, dtype=float), mean, std) / kept


def _as_state(state: StateLike) -> HyperfineState:
    return state if isinstance(state, HyperfineState) else HyperfineState(state)


@functools.lru_cache(maxsize=256)
def _cached_pmf(state: HyperfineState, params: DetectorParams, cutoff: float) -> Pmf:
    logger.debug("building %s count pmf for %s model, mu=%g", state.value, params.f2_model, params.bg_mean)
    if state == HyperfineState.F1:
        return poisson_distribution(params.bg_mean, cutoff)
    if params.is_markov:
        return counts_f2_distribution(params.cascade, cutoff)

    gauss = discretized_gaussian(params.gauss_mean, params.gauss_var, cutoff)
    if not params.gauss_convolve_background or params.bg_mean == 0.0:
        return gauss
    bg = poisson_distribution(params.bg_mean, cutoff)
    masses = np.convolve(gauss.masses, bg.masses)
    diagnostics = dict(gauss.diagnostics, convolved_background=params.bg_mean)
    return Pmf(masses, max(0.0, 1.0 - float(masses.sum())), diagnostics)


def pmf_counts_given_state(state: StateLike, params: DetectorParams, cutoff: float = DEFAULT_TAIL_CUTOFF) -> Pmf:
    """Return P(n_c | F) for the configured readout model.

    F1 gives Poisson(mu). F2 gives the corrected cascade convolution for the
    markov model, or the discretized Gaussian heuristic (a total-count model,
    convolved with the background only when configured).

    Args:
        state: Hyperfine state at the start of the readout
        params: Detector parameters
        cutoff: Tail mass left beyond the returned support

    Returns:
        Pmf; callers must not modify its arrays (results are cached)
    """
    return _cached_pmf(_as_state(state), params, cutoff)


@functools.lru_cache(maxsize=256)
def _cached_cdf(params: DetectorParams) -> np.ndarray:
    return pmf_counts_given_state(HyperfineState.F2, params).cdf()


def sample_readout(state: StateLike, params: DetectorParams, rng: np.random.Generator, size: Optional[int] = None):
    """Draw n_c given the hyperfine state at the start of the readout.

    Args:
        state: Hyperfine state
        params: Detector parameters
        rng: Generator owned by the caller's stream
        size: Number of draws, or None for a scalar

    Returns:
        Count (int) or array of counts
    """
    state = _as_state(state)
    if state == HyperfineState.F1:
        return sample_poisson(params.bg_mean, rng, size)
    if params.is_markov:
        return sample_readout_count_f2(params.cascade, rng, size)
    cdf = _cached_cdf(params)
    draws = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), cdf.size - 1)
    return int(draws) if size is None else draws


def pmf_mean_markov(params: DetectorParams) -> float:
    """Return E[n_c | F2] = mu + eta / (1 - p) for the markov model."""
    return params.bg_mean + params.cascade.mean_detected