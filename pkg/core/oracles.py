"""Independent brute-force and high-precision oracles for the appendix model."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import mpmath
import numpy as np
from scipy.stats import binom, poisson

from models.params import CascadeParams

from .constants import (
    APPENDIX_GRID_ETA,
    APPENDIX_GRID_MU,
    APPENDIX_GRID_P,
    APPENDIX_MAX_COUNT,
    APPENDIX_TOLERANCE,
    EXPINT_CHECK_MAX_ORDER,
    EXPINT_CHECK_Z,
    EXPINT_INCOMPLETE_GAMMA,
    EXPINT_QUADRATURE_ORDERS,
    EXPINT_RELATIVE_TOLERANCE,
    ORACLE_TAIL_CUTOFF,
    VARIANT_CORRECTED,
    VARIANT_LITERAL,
    VARIANTS,
)
from .distributions import detected_photon_masses, evaluate_counts_f2, pmf_detected_photons
from .special import exp_integral_neg_order, exp_integral_recurrence

logger = logging.getLogger(__name__)

APPENDIX_COLUMNS = ["variant", "p", "eta", "mu", "n_c", "closed_form", "brute_force", "abs_diff", "method"]


def brute_force_detected_photons(params: CascadeParams, d_max: int, cutoff: float = ORACLE_TAIL_CUTOFF) -> np.ndarray:
    """Return P(n_det = d), d = 0..d_max, by summing geometric x binomial over s.

    Args:
        params: Cascade parameters
        d_max: Largest d to return
        cutoff: Scatter counts are summed until p^s drops below this

    Returns:
        Array of masses
    """
    p = params.scatter_survival
    s_max = max(d_max, math.ceil(math.log(cutoff) / math.log(p)))
    s = np.arange(1, s_max + 1)
    d = np.arange(d_max + 1)
    scatter = (1.0 - p) * p ** (s - 1)
    thinning = binom.pmf(d[:, None], s[None, :], params.det_efficiency)
    return thinning @ scatter


def brute_force_counts_f2(params: CascadeParams, n_max: int, variant: str = VARIANT_CORRECTED) -> np.ndarray:
    """Return P(n_c | F=2), n_c = 0..n_max, by explicit convolution.

    corrected uses the scatter-sum masses above; literal uses the
    printed formula for every d, including d = 0.
    """
    if variant == VARIANT_CORRECTED:
        d_masses = brute_force_detected_photons(params, n_max)
    else:
        d_masses = np.array([pmf_detected_photons(d, params, VARIANT_LITERAL) for d in range(n_max + 1)])
    bg = poisson.pmf(np.arange(n_max + 1), params.bg_mean)
    out = np.zeros(n_max + 1)
    for n_c in range(n_max + 1):
        out[n_c] = math.fsum(d_masses[d] * bg[n_c - d] for d in range(n_c + 1))
    return out


def mp_poisson_pmf(n: int, mu: float, dps: int = 50) -> float:
    """Return the Poisson mass summed as a 50-digit series, exp(-mu) from its Taylor expansion."""
    with mpmath.workdps(dps):
        mu_mp = mpmath.mpf(mu)
        floor = mpmath.mpf(10) ** (-(dps + 5))
        decay = mpmath.mpf(0)
        term = mpmath.mpf(1)
        k = 0
        while k <= mu or abs(term) > floor:
            decay += term
            k += 1
            term = term * (-mu_mp) / k
        return float(decay * mu_mp**n / mpmath.factorial(n))


def quad_exp_integral(n: int, z: float, dps: int = 30) -> float:
    """Return integral_1^inf t^n exp(-z t) dt by adaptive quadrature."""
    with mpmath.workdps(dps):
        z_mp = mpmath.mpf(z)
        # split at the integrand peak n / z and a few widths beyond it
        peak = max(1.0, n / z)
        width = (math.sqrt(n + 1) + 1.0) / z
        points = [1] if peak == 1.0 else [1, peak]
        points += [peak + 5.0 * width, peak + 20.0 * width, mpmath.inf]
        value = mpmath.quad(lambda t: t**n * mpmath.exp(-z_mp * t), points)
        return float(value)


@dataclass
class AppendixCheck:
    """Outcome of the closed-form versus brute-force grid.

    Attributes:
        rows: One row per (variant, p, eta, mu, n_c), see APPENDIX_COLUMNS
        max_abs_diff: Largest |closed_form - brute_force| per variant
        tolerance: Pass threshold on the absolute difference
        literal_zero_masses: (p, eta, P_literal(n_det=0)) per (p, eta) pair
    """

    rows: List[Tuple] = field(default_factory=list)
    max_abs_diff: dict = field(default_factory=dict)
    tolerance: float = APPENDIX_TOLERANCE
    literal_zero_masses: List[Tuple[float, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Return True when every checked variant is within tolerance."""
        return all(diff < self.tolerance for diff in self.max_abs_diff.values())

    @property
    def literal_anomaly(self) -> bool:
        """Return True when the printed formula exceeds 1 at d = 0 somewhere on the grid."""
        return any(value > 1.0 for _, _, value in self.literal_zero_masses)


def validate_appendix(
    variants: Sequence[str] = tuple(VARIANTS),
    grid_p: Sequence[float] = tuple(APPENDIX_GRID_P),
    grid_eta: Sequence[float] = tuple(APPENDIX_GRID_ETA),
    grid_mu: Sequence[float] = tuple(APPENDIX_GRID_MU),
    max_count: int = APPENDIX_MAX_COUNT,
    tolerance: float = APPENDIX_TOLERANCE,
) -> AppendixCheck:
    """Compare the closed form with brute-force convolution over a parameter grid.

    Args:
        variants: Variants to check
        grid_p: Scatter survival values
        grid_eta: Detection efficiencies
        grid_mu: Background means
        max_count: Largest n_c compared
        tolerance: Absolute tolerance

    Returns:
        AppendixCheck with every comparison row
    """
    check = AppendixCheck(tolerance=tolerance)
    for p, eta in itertools.product(grid_p, grid_eta):
        params = CascadeParams(p, eta, 0.0)
        check.literal_zero_masses.append((p, eta, pmf_detected_photons(0, params, VARIANT_LITERAL)))

    for variant in variants:
        worst = 0.0
        for p, eta, mu in itertools.product(grid_p, grid_eta, grid_mu):
            params = CascadeParams(p, eta, mu)
            oracle = brute_force_counts_f2(params, max_count, variant)
            for n_c in range(max_count + 1):
                evaluation = evaluate_counts_f2(n_c, params, variant)
                diff = abs(evaluation.value - oracle[n_c])
                worst = max(worst, diff)
                check.rows.append((variant, p, eta, mu, n_c, evaluation.value, float(oracle[n_c]), diff, evaluation.method))
        check.max_abs_diff[variant] = worst
        logger.info("appendix grid %s: max |closed form - brute force| = %.3e", variant, worst)
    return check


def detected_masses_match_oracle(params: CascadeParams, d_max: int) -> float:
    """Return max |corrected formula - scatter-sum oracle| over d = 0..d_max."""
    return float(np.max(np.abs(detected_photon_masses(params, d_max) - brute_force_detected_photons(params, d_max))))


@dataclass
class ExpIntegralCheck:
    """Worst relative differences between E_{-n}(z) routes and their oracles."""

    recurrence: float
    quadrature: float
    incomplete_gamma: float
    tolerance: float = EXPINT_RELATIVE_TOLERANCE

    @property
    def passed(self) -> bool:
        """Return True when every route agrees within tolerance."""
        return max(self.recurrence, self.quadrature, self.incomplete_gamma) < self.tolerance


def check_exp_integral(
    n_max: int = EXPINT_CHECK_MAX_ORDER,
    z_values: Sequence[float] = tuple(EXPINT_CHECK_Z),
    quadrature_orders: Sequence[int] = tuple(EXPINT_QUADRATURE_ORDERS),
    tolerance: float = EXPINT_RELATIVE_TOLERANCE,
) -> ExpIntegralCheck:
    """Cross-check the finite-sum E_{-n}(z) against the upward recurrence, quadrature and Gamma(n+1, z).

    Args:
        n_max: Largest order checked against the recurrence
        z_values: Arguments
        quadrature_orders: Orders also checked by adaptive quadrature
        tolerance: Relative tolerance

    Returns:
        ExpIntegralCheck
    """
    worst_rec = worst_quad = worst_gamma = 0.0
    for z in z_values:
        chained = math.exp(-z) / z
        for n in range(n_max + 1):
            if n > 0:
                chained = exp_integral_recurrence(n, z, chained)
            value = exp_integral_neg_order(n, z)
            worst_rec = max(worst_rec, abs(chained / value - 1.0))
            gamma_route = exp_integral_neg_order(n, z, EXPINT_INCOMPLETE_GAMMA)
            worst_gamma = max(worst_gamma, abs(gamma_route / value - 1.0))
        for n in quadrature_orders:
            worst_quad = max(worst_quad, abs(quad_exp_integral(n, z) / exp_integral_neg_order(n, z) - 1.0))
    logger.info("E_-n checks: recurrence %.2e, quadrature %.2e, incomplete gamma %.2e", worst_rec, worst_quad, worst_gamma)
    return ExpIntegralCheck(worst_rec, worst_quad, worst_gamma, tolerance)
