"""Stochastic primitives and exact pmfs of the minimal F=2 readout model.

An F=2 atom scatters s >= 1 photons (geometric, survival p) before it
falls dark, each scattered photon is detected with probability eta, and
the detector adds Poisson(mu) background counts.
"""

import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import gammaln, xlogy
from scipy.stats import poisson

from models.params import CascadeParams
from models.pmf import Pmf

from .constants import (
    CLOSED_FORM_ABS_TOLERANCE,
    DEFAULT_TAIL_CUTOFF,
    MAX_PMF_TERMS,
    METHOD_CLOSED_FORM,
    METHOD_DIRECT_SUM,
    VARIANT_CORRECTED,
    VARIANT_LITERAL,
    VARIANTS,
)
from .exceptions import DomainError
from .special import log_exp_integral_neg_order

logger = logging.getLogger(__name__)

IntOrArray = Union[int, np.ndarray]


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _check_count(name: str, n: int):
    if int(n) != n or n < 0:
        raise DomainError(f"{name} must be a nonnegative integer, got {n!r}")


def poisson_pmf(n: int, mu: float) -> float:
    """Return exp(-mu) mu^n / n!, evaluated in log space.

    Args:
        n: Nonnegative count
        mu: Nonnegative mean

    Returns:
        Poisson probability of n

    Raises:
        DomainError: If mu < 0 or n is not a nonnegative integer
    """
    if not (math.isfinite(mu) and mu >= 0.0):
        raise DomainError(f"Poisson mean must be nonnegative, got {mu!r}")
    _check_count("n", n)
    return float(np.exp(xlogy(n, mu) - mu - gammaln(n + 1)))


def poisson_masses(mu: float, n_max: int) -> np.ndarray:
    """Return Poisson(mu) masses for n = 0..n_max."""
    if not (math.isfinite(mu) and mu >= 0.0):
        raise DomainError(f"Poisson mean must be nonnegative, got {mu!r}")
    n = np.arange(n_max + 1)
    return np.exp(xlogy(n, mu) - mu - gammaln(n + 1))


def poisson_distribution(mu: float, cutoff: float = DEFAULT_TAIL_CUTOFF) -> Pmf:
    """Return Poisson(mu) as a Pmf truncated where the tail drops below cutoff."""
    if not (math.isfinite(mu) and mu >= 0.0):
        raise DomainError(f"Poisson mean must be nonnegative, got {mu!r}")
    if mu == 0.0:
        return Pmf(np.array([1.0]), 0.0, {"model": "poisson", "mu": 0.0})
    n_max = max(int(poisson.isf(cutoff, mu)), 0)
    while poisson.sf(n_max, mu) >= cutoff and n_max < MAX_PMF_TERMS - 1:
        n_max += 1
    return Pmf(poisson_masses(mu, n_max), float(poisson.sf(n_max, mu)), {"model": "poisson", "mu": mu})


def pmf_scatter_count(s: int, p: float) -> float:
    """Return P(n_scat = s) = p^(s-1) (1 - p) for s >= 1, and 0 for s = 0.

    Args:
        s: Number of scattered photons
        p: Probability of staying in F=2 after a scatter

    Returns:
        Geometric probability of s

    Raises:
        DomainError: If p is not in (0, 1)
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"scatter survival must lie in (0, 1), got {p!r}")
    _check_count("s", s)
    if s == 0:
        return 0.0
    return float(np.exp((s - 1) * math.log(p) + math.log1p(-p)))


def _log_literal_detected(d: np.ndarray, params: CascadeParams) -> np.ndarray:
    """Return log of p^(d-1) (1-p) eta^d / (1 - p + eta p)^(d+1)."""
    p = params.scatter_survival
    eta = params.det_efficiency
    c = 1.0 - p + eta * p
    return (d - 1) * math.log(p) + math.log1p(-p) + d * math.log(eta) - (d + 1) * math.log(c)


def corrected_zero_mass(params: CascadeParams) -> float:
    """Return P(n_det = 0) = (1 - p)(1 - eta) / (1 - p + eta p)."""
    p = params.scatter_survival
    eta = params.det_efficiency
    return (1.0 - p) * (1.0 - eta) / (1.0 - p + eta * p)


def pmf_detected_photons(d: int, params: CascadeParams, variant: str = VARIANT_CORRECTED) -> float:
    """Return P(n_det = d) for the geometric cascade thinned by the detection efficiency.

    The printed formula p^(d-1)(1-p) eta^d / (1-p+eta p)^(d+1) holds for d >= 1.
    "literal" also applies it at d = 0, where it can exceed 1;
    "corrected" uses (1-p)(1-eta)/(1-p+eta p) there.

    Args:
        d: Number of detected fluorescence photons
        params: Cascade parameters
        variant: "corrected" or "literal"

    Returns:
        Mass at d (not a probability for literal at d = 0)
    """
    _check_variant(variant)
    _check_count("d", d)
    if d == 0 and variant == VARIANT_CORRECTED:
        return corrected_zero_mass(params)
    return float(np.exp(_log_literal_detected(np.asarray(d, dtype=float), params)))


def detected_photon_masses(params: CascadeParams, n_max: int, variant: str = VARIANT_CORRECTED) -> np.ndarray:
    """Return P(n_det = d) for d = 0..n_max."""
    _check_variant(variant)
    masses = np.exp(_log_literal_detected(np.arange(n_max + 1, dtype=float), params))
    if variant == VARIANT_CORRECTED:
        masses[0] = corrected_zero_mass(params)
    return masses


@dataclass(frozen=True)
class ClosedFormEvaluation:
    """Value of P(n_c | F=2) together with how it was obtained.

    Attributes:
        value: The mass
        method: "closed_form" or "direct_sum"
        error_estimate: Estimated absolute rounding error of the closed form (0 for direct sums)
        fallback: True when the closed form was attempted and abandoned
    """

    value: float
    method: str
    error_estimate: float = 0.0
    fallback: bool = False


def _direct_sum(n_c: int, params: CascadeParams, variant: str) -> float:
    d_masses = detected_photon_masses(params, n_c, variant)
    bg = poisson_masses(params.bg_mean, n_c)
    return float(np.dot(d_masses, bg[::-1]))


def evaluate_counts_f2(n_c: int, params: CascadeParams, variant: str = VARIANT_CORRECTED) -> ClosedFormEvaluation:
    """Evaluate P(n_c | F=2) and report the evaluation route.

    literal uses the exponential-integral closed form
    mu^n / (n! p) x e^x E_{-n}(x + mu) in log space; corrected sums the
    convolution term by term with the corrected d = 0 mass.

    Args:
        n_c: Observed count
        params: Cascade parameters
        variant: "corrected" or "literal"

    Returns:
        ClosedFormEvaluation
    """
    _check_variant(variant)
    _check_count("n_c", n_c)
    n_c = int(n_c)
    if variant == VARIANT_CORRECTED:
        return ClosedFormEvaluation(_direct_sum(n_c, params, variant), METHOD_DIRECT_SUM)

    mu = params.bg_mean
    x = params.x
    if mu == 0.0 or x <= 0.0:
        logger.debug("no background: closed form degenerate, summing directly for n_c=%d", n_c)
        return ClosedFormEvaluation(_direct_sum(n_c, params, variant), METHOD_DIRECT_SUM, fallback=True)

    z = x + mu
    log_e = log_exp_integral_neg_order(n_c, z)
    parts = [
        n_c * math.log(mu),
        -float(gammaln(n_c + 1)),
        -math.log(params.scatter_survival),
        math.log(x),
        x,
        log_e,
    ]
    log_value = math.fsum(parts)
    value = math.exp(log_value)
    # rounding in each log term propagates to a relative error of roughly eps * sum |term|
    magnitude = sum(abs(t) for t in parts) + z + math.log(n_c + 1)
    error = 4.0 * sys.float_info.epsilon * magnitude * value
    if not math.isfinite(value) or error > CLOSED_FORM_ABS_TOLERANCE:
        logger.warning("closed form lost accuracy (error %.2e) at n_c=%d, using direct summation", error, n_c)
        return ClosedFormEvaluation(_direct_sum(n_c, params, variant), METHOD_DIRECT_SUM, error, fallback=True)
    return ClosedFormEvaluation(value, METHOD_CLOSED_FORM, error)


def pmf_counts_f2_closed_form(n_c: int, params: CascadeParams, variant: str = VARIANT_CORRECTED) -> float:
    """Return P(n_c | F=2) for the Markov cascade plus Poisson background.

    Args:
        n_c: Observed count
        params: Cascade parameters
        variant: "corrected" or "literal"

    Returns:
        Mass at n_c
    """
    return evaluate_counts_f2(n_c, params, variant).value


def counts_f2_masses(params: CascadeParams, n_max: int, variant: str = VARIANT_CORRECTED) -> np.ndarray:
    """Return P(n_c | F=2) for n_c = 0..n_max by convolution."""
    d_masses = detected_photon_masses(params, n_max, variant)
    bg = poisson_masses(params.bg_mean, n_max)
    return np.convolve(d_masses, bg)[: n_max + 1]


def _f2_support(params: CascadeParams, cutoff: float) -> int:
    """Return n_max such that P(n_c > n_max | F=2) <= cutoff."""
    p = params.scatter_survival
    eta = params.det_efficiency
    c = 1.0 - p + eta * p
    ratio = eta * p / c
    amplitude = (1.0 - p) / (p * c)
    # P(n_det > D) = amplitude ratio^(D+1) / (1 - ratio)
    if ratio <= 0.0 or amplitude * ratio / (1.0 - ratio) <= cutoff / 2.0:
        d_max = 0
    else:
        d_max = math.ceil(math.log(cutoff * (1.0 - ratio) / (2.0 * amplitude)) / math.log(ratio))
    bg_max = 0 if params.bg_mean == 0.0 else int(poisson.isf(cutoff / 2.0, params.bg_mean)) + 1
    return d_max + bg_max + 1


def counts_f2_distribution(params: CascadeParams, cutoff: float = DEFAULT_TAIL_CUTOFF) -> Pmf:
    """Return the corrected P(n_c | F=2) as a Pmf with tail mass below cutoff."""
    n_max = _f2_support(params, cutoff)
    capped = n_max > MAX_PMF_TERMS - 1
    if capped:
        logger.warning("F=2 pmf support %d exceeds the cap, truncating at %d terms", n_max, MAX_PMF_TERMS)
        n_max = MAX_PMF_TERMS - 1
    masses = counts_f2_masses(params, n_max, VARIANT_CORRECTED)
    tail = max(0.0, 1.0 - float(masses.sum()))
    return Pmf(masses, tail, {"model": "markov", "variant": VARIANT_CORRECTED, "capped": capped})


def sample_poisson(mu: float, rng: np.random.Generator, size: Optional[int] = None) -> IntOrArray:
    """Draw Poisson(mu) counts from rng."""
    if not (math.isfinite(mu) and mu >= 0.0):
        raise DomainError(f"Poisson mean must be nonnegative, got {mu!r}")
    draws = rng.poisson(mu, size)
    return int(draws) if size is None else draws


def sample_cascade(params: CascadeParams, rng: np.random.Generator, size: Optional[int] = None) -> Tuple[IntOrArray, IntOrArray]:
    """Draw (n_scat, n_det): geometric scatters (s >= 1) then per-photon Bernoulli(eta) thinning.

    Args:
        params: Cascade parameters
        rng: Generator owned by the caller's stream
        size: Number of draws, or None for scalars

    Returns:
        Tuple of (scattered, detected)
    """
    scattered = rng.geometric(1.0 - params.scatter_survival, size)
    detected = rng.binomial(scattered, params.det_efficiency)
    if size is None:
        return int(scattered), int(detected)
    return scattered, detected


def sample_readout_count_f2(params: CascadeParams, rng: np.random.Generator, size: Optional[int] = None) -> IntOrArray:
    """Draw n_c = n_det + n_bg for an atom that starts the readout in F=2."""
    _, detected = sample_cascade(params, rng, size)
    return detected + sample_poisson(params.bg_mean, rng, size)
