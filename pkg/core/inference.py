"""Statistical analysis chain: decision rules, jump-probability inference and fits."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, least_squares, minimize
from scipy.special import gammaln, xlogy
from scipy.stats import chi2

from models.outcomes import SettingResult
from models.params import DetectorParams, HyperfineState
from models.pmf import CountHistogram, Pmf
from models.reports import (
    DecisionRule,
    FitReport,
    PqjEstimate,
    QeAnalysis,
    QeSettingEstimate,
    RatePoint,
    SaturationPoint,
)

from .constants import (
    ESTIMATOR_MIXTURE,
    ESTIMATOR_THRESHOLD,
    ESTIMATORS,
    GAUSS_FIT_MLE,
    GAUSS_FIT_MOMENTS,
    MIXTURE_LEAST_SQUARES,
    MIXTURE_MLE,
    PROVENANCE_EMPIRICAL,
    PROVENANCE_MODEL,
    ZERO_RATE_SIGMAS,
)
from .detector_model import gaussian_bin_masses, pmf_counts_given_state
from .exceptions import (
    DegenerateDesignError,
    DomainError,
    EmptyHistogramError,
    ModelMismatchError,
    UninformativeRuleError,
)

logger = logging.getLogger(__name__)

# Offset from the ends of [0, 1] used when the mixture score is infinite there
MIXTURE_EDGE = 1e-12
SATURATION_TOLERANCE = 1e-14
SATURATION_MAX_NFEV = 1000


def _support_length(*pmfs: Pmf) -> int:
    """Return one past the largest count carrying nonzero mass in any pmf."""
    last = 0
    for pmf in pmfs:
        nonzero = np.flatnonzero(pmf.masses)
        if nonzero.size:
            last = max(last, int(nonzero[-1]))
    return last + 1


def _error_curves(pmf1: Pmf, pmf2: Pmf, length: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (eps_fp, eps_fn) for thresholds 0..length-1."""
    m1 = pmf1.padded(length)[:length]
    m2 = pmf2.padded(length)[:length]
    tail1 = pmf1.tail_mass + float(pmf1.masses[length:].sum())
    eps_fp = np.concatenate([np.cumsum(m1[::-1])[::-1][1:], [0.0]]) + tail1
    eps_fn = np.cumsum(m2)
    return np.clip(eps_fp, 0.0, 1.0), np.clip(eps_fn, 0.0, 1.0)


def decision_rule(pmf1: Pmf, pmf2: Pmf, threshold: int, provenance: str = PROVENANCE_MODEL) -> DecisionRule:
    """Return the rule D = (n_c > threshold) with its error probabilities.

    Args:
        pmf1: P(n_c | F=1)
        pmf2: P(n_c | F=2)
        threshold: n_thr >= 0
        provenance: What the pmfs were computed from

    Returns:
        DecisionRule
    """
    if threshold < 0:
        raise DomainError(f"threshold must be nonnegative, got {threshold!r}")
    length = max(_support_length(pmf1, pmf2), threshold + 1)
    eps_fp, eps_fn = _error_curves(pmf1, pmf2, length)
    return DecisionRule(threshold, float(eps_fp[threshold]), float(eps_fn[threshold]), provenance)


def choose_threshold(pmf1: Pmf, pmf2: Pmf, provenance: str = PROVENANCE_MODEL) -> DecisionRule:
    """Return the fidelity-maximizing threshold rule.

    Every n_thr up to the last count with nonzero mass is tried; ties go
    to the smallest threshold.

    Args:
        pmf1: P(n_c | F=1)
        pmf2: P(n_c | F=2)
        provenance: What the pmfs were computed from

    Returns:
        DecisionRule at the best threshold
    """
    length = _support_length(pmf1, pmf2)
    eps_fp, eps_fn = _error_curves(pmf1, pmf2, length)
    fidelity = 1.0 - (eps_fp + eps_fn) / 2.0
    best = int(np.argmax(fidelity))
    logger.debug("best threshold %d of %d, fidelity %.6f", best, length, fidelity[best])
    return DecisionRule(best, float(eps_fp[best]), float(eps_fn[best]), provenance)


def model_decision_rule(detector: DetectorParams, threshold: Optional[int] = None) -> DecisionRule:
    """Return the rule computed from the detector's model pmfs.

    Args:
        detector: Detector parameters
        threshold: Fixed n_thr, or None to maximize fidelity

    Returns:
        DecisionRule with "model" provenance
    """
    pmf1 = pmf_counts_given_state(HyperfineState.F1, detector)
    pmf2 = pmf_counts_given_state(HyperfineState.F2, detector)
    if threshold is None:
        return choose_threshold(pmf1, pmf2, PROVENANCE_MODEL)
    return decision_rule(pmf1, pmf2, threshold, PROVENANCE_MODEL)


def empirical_decision_rule(hist1: CountHistogram, hist2: CountHistogram, threshold: Optional[int] = None) -> DecisionRule:
    """Return the rule computed from measured conditional histograms.

    Raises:
        EmptyHistogramError: If either histogram has no runs
    """
    if hist1.is_empty() or hist2.is_empty():
        raise EmptyHistogramError("conditional histograms must not be empty")
    pmf1, pmf2 = hist1.to_pmf(), hist2.to_pmf()
    if threshold is None:
        return choose_threshold(pmf1, pmf2, PROVENANCE_EMPIRICAL)
    return decision_rule(pmf1, pmf2, threshold, PROVENANCE_EMPIRICAL)


def _check_informative(rule: DecisionRule) -> float:
    contrast = rule.contrast
    if contrast <= 0.0:
        raise UninformativeRuleError(f"1 - eps_fp - eps_fn = {contrast:.6g} must be positive")
    return contrast


def _check_probability(p_d: float):
    if not (math.isfinite(p_d) and 0.0 <= p_d <= 1.0):
        raise DomainError(f"P(D) must be a probability, got {p_d!r}")


def infer_pqj(p_d: float, rule: DecisionRule) -> PqjEstimate:
    """Return P(QJ) = (P(D) - eps_fp) / (1 - eps_fp - eps_fn), clamped to [0, 1].

    Args:
        p_d: Observed detection fraction
        rule: Decision rule used to classify the runs

    Returns:
        PqjEstimate carrying the clamped and unclamped values

    Raises:
        UninformativeRuleError: If the rule cannot separate the states
    """
    _check_probability(p_d)
    contrast = _check_informative(rule)
    raw = (p_d - rule.eps_fp) / contrast
    estimate = min(1.0, max(0.0, raw))
    clamped = estimate != raw
    if clamped:
        logger.debug("P(QJ) %.6g clamped to %.6g", raw, estimate)
    return PqjEstimate(estimate, raw, clamped)


def mse_pqj(p_d: float, rule: DecisionRule, n_runs: int, eps_variances: Optional[Tuple[float, float]] = None) -> float:
    """Return the mean-squared error of infer_pqj.

    The binomial term is P(D)(1 - P(D)) / [N (1 - eps_fp - eps_fn)^2]. When
    eps_variances is given, the first-order contributions of uncertain
    error rates are added.

    Args:
        p_d: Detection fraction
        rule: Decision rule
        n_runs: Number of runs behind p_d
        eps_variances: Optional (var(eps_fp), var(eps_fn))

    Returns:
        Nonnegative MSE
    """
    _check_probability(p_d)
    if n_runs < 1:
        raise DomainError(f"n_runs must be at least 1, got {n_runs!r}")
    contrast = _check_informative(rule)
    mse = p_d * (1.0 - p_d) / (n_runs * contrast**2)
    if eps_variances is not None:
        var_fp, var_fn = eps_variances
        mse += ((p_d - 1.0 + rule.eps_fn) ** 2 * var_fp + (p_d - rule.eps_fp) ** 2 * var_fn) / contrast**4
    return mse


def bootstrap_rule_variances(
    hist1: CountHistogram, hist2: CountHistogram, threshold: int, rng: np.random.Generator, n_boot: int = 1000
) -> Tuple[float, float]:
    """Return bootstrap variances of (eps_fp, eps_fn) from calibration histograms.

    Args:
        hist1: F=1 calibration histogram
        hist2: F=2 calibration histogram
        threshold: Decision threshold
        rng: Generator for the resampling
        n_boot: Number of bootstrap replicates

    Returns:
        Tuple of (var(eps_fp), var(eps_fn))
    """
    if hist1.is_empty() or hist2.is_empty():
        raise EmptyHistogramError("calibration histograms must not be empty")
    if n_boot < 2:
        raise DomainError(f"n_boot must be at least 2, got {n_boot!r}")
    resampled1 = rng.multinomial(hist1.total, hist1.frequencies(), size=n_boot)
    resampled2 = rng.multinomial(hist2.total, hist2.frequencies(), size=n_boot)
    eps_fp = resampled1[:, threshold + 1 :].sum(axis=1) / hist1.total
    eps_fn = resampled2[:, : threshold + 1].sum(axis=1) / hist2.total
    return float(np.var(eps_fp, ddof=1)), float(np.var(eps_fn, ddof=1))


def _mixture_arrays(hist: CountHistogram, pmf1: Pmf, pmf2: Pmf) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (h, p1, p2) on the observed bins, checking the model covers them."""
    if hist.is_empty():
        raise EmptyHistogramError("cannot fit a mixture to an empty histogram")
    length = max(hist.counts.size, pmf1.masses.size, pmf2.masses.size)
    h = hist.padded(length).astype(float)
    p1 = pmf1.padded(length)
    p2 = pmf2.padded(length)
    observed = h > 0
    uncovered = observed & (p1 <= 0.0) & (p2 <= 0.0)
    if np.any(uncovered):
        bins = np.flatnonzero(uncovered).tolist()
        raise ModelMismatchError(f"counts observed where both pmfs vanish: n_c in {bins}")
    return h[observed], p1[observed], p2[observed]


def mixture_log_likelihood(w: float, hist: CountHistogram, pmf1: Pmf, pmf2: Pmf) -> float:
    """Return sum_n h(n) log[(1 - w) P(n|F1) + w P(n|F2)] (multinomial constant dropped)."""
    h, p1, p2 = _mixture_arrays(hist, pmf1, pmf2)
    with np.errstate(divide="ignore"):
        return float(np.sum(h * np.log((1.0 - w) * p1 + w * p2)))


def _mixture_score(w: float, h: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> float:
    mixed = (1.0 - w) * p1 + w * p2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = h * (p2 - p1) / mixed
    return float(np.sum(terms))


def fit_mixture(hist: CountHistogram, pmf1: Pmf, pmf2: Pmf, criterion: str = MIXTURE_MLE) -> FitReport:
    """Fit the weight w of P(n_c) = (1 - w) P(n_c|F1) + w P(n_c|F2) to a histogram.

    The log-likelihood is concave in w, so its maximizer on [0, 1] is the
    root of the score when the score changes sign, and an endpoint otherwise.

    Args:
        hist: Observed histogram
        pmf1: P(n_c | F=1)
        pmf2: P(n_c | F=2)
        criterion: "mle" (default) or "least_squares"

    Returns:
        FitReport with estimate w and diagnostics["boundary"]

    Raises:
        EmptyHistogramError: If the histogram has no runs
        ModelMismatchError: If counts fall where both pmfs vanish
    """
    if criterion == MIXTURE_LEAST_SQUARES:
        return _fit_mixture_least_squares(hist, pmf1, pmf2)
    if criterion != MIXTURE_MLE:
        raise DomainError(f"criterion must be {MIXTURE_MLE!r} or {MIXTURE_LEAST_SQUARES!r}, got {criterion!r}")

    h, p1, p2 = _mixture_arrays(hist, pmf1, pmf2)
    lo = 0.0 if np.all(p1 > 0.0) else MIXTURE_EDGE
    hi = 1.0 if np.all(p2 > 0.0) else 1.0 - MIXTURE_EDGE
    score_lo = _mixture_score(lo, h, p1, p2)
    score_hi = _mixture_score(hi, h, p1, p2)

    converged = True
    if score_lo <= 0.0:
        w, boundary = lo, True
    elif score_hi >= 0.0:
        w, boundary = hi, True
    else:
        w, result = brentq(_mixture_score, lo, hi, args=(h, p1, p2), xtol=1e-15, rtol=4 * np.finfo(float).eps, full_output=True)
        converged, boundary = bool(result.converged), False

    mixed = (1.0 - w) * p1 + w * p2
    information = float(np.sum(h * (p2 - p1) ** 2 / mixed**2))
    std_error = 1.0 / math.sqrt(information) if information > 0.0 else math.inf
    log_likelihood = float(np.sum(h * np.log(mixed)))
    if boundary:
        logger.debug("mixture weight on the boundary: w=%g", w)
    return FitReport(
        estimate=float(w),
        std_error=std_error,
        n=int(h.sum()),
        objective=log_likelihood,
        converged=converged,
        diagnostics={"criterion": MIXTURE_MLE, "boundary": boundary, "fisher_information": information},
    )


def _fit_mixture_least_squares(hist: CountHistogram, pmf1: Pmf, pmf2: Pmf) -> FitReport:
    """Fit w by binned least squares on relative frequencies (closed form)."""
    if hist.is_empty():
        raise EmptyHistogramError("cannot fit a mixture to an empty histogram")
    length = max(hist.counts.size, pmf1.masses.size, pmf2.masses.size)
    n_total = hist.total
    f = hist.padded(length) / n_total
    p1 = pmf1.padded(length)
    p2 = pmf2.padded(length)
    diff = p2 - p1
    norm_sq = float(np.dot(diff, diff))
    if norm_sq == 0.0:
        raise ModelMismatchError("pmf1 and pmf2 are identical; the mixture weight is unidentifiable")

    unclipped = float(np.dot(f - p1, diff)) / norm_sq
    w = min(1.0, max(0.0, unclipped))
    mixed = (1.0 - w) * p1 + w * p2
    # w is linear in the frequencies; propagate the multinomial covariance at the fit
    c = diff / norm_sq
    variance = (float(np.dot(c**2, mixed)) - float(np.dot(c, mixed)) ** 2) / n_total
    residuals = f - mixed
    return FitReport(
        estimate=w,
        std_error=math.sqrt(max(variance, 0.0)),
        n=n_total,
        objective=float(np.dot(residuals, residuals)),
        converged=True,
        diagnostics={"criterion": MIXTURE_LEAST_SQUARES, "boundary": w != unclipped or w in (0.0, 1.0), "unclipped": unclipped},
    )


def saturation_curve(eta: float, nbar) -> np.ndarray:
    """Return 1 - exp(-eta * nbar)."""
    return -np.expm1(-eta * np.asarray(nbar, dtype=float))


def _initial_eta(x: np.ndarray, y: np.ndarray) -> float:
    usable = (y > 0.0) & (y < 1.0) & (x > 0.0)
    if np.any(usable):
        return float(np.median(-np.log1p(-y[usable]) / x[usable]))
    return 1.0 / float(np.mean(x[x > 0.0])) if np.any(x > 0.0) else 1.0


def fit_saturation(points: Sequence[SaturationPoint]) -> FitReport:
    """Fit eta_QJ of P(QJ) = 1 - exp(-eta_QJ * n_pr) by weighted least squares.

    The first pass weights by the y-uncertainties; the second adds each
    x-uncertainty through the local slope at the first-pass estimate.

    Args:
        points: At least two points with positive y-uncertainties

    Returns:
        FitReport with the fitted eta_QJ; diagnostics carry chi-square,
        p-value, residuals and the boundary flag

    Raises:
        DomainError: If fewer than two points or a nonpositive y-uncertainty is given
    """
    if len(points) < 2:
        raise DomainError(f"need at least 2 points, got {len(points)}")
    x = np.array([p.nbar for p in points], dtype=float)
    y = np.array([p.pqj for p in points], dtype=float)
    sigma_x = np.array([p.nbar_err for p in points], dtype=float)
    sigma_y = np.array([p.pqj_err for p in points], dtype=float)
    if np.any(~(sigma_y > 0.0)):
        raise DomainError("P(QJ) uncertainties must be positive")
    if np.any(sigma_x < 0.0):
        raise DomainError("photon-number uncertainties must be nonnegative")

    sigma = sigma_y
    eta = _initial_eta(x, y)
    converged = True
    boundary = False
    for _ in range(2):
        # gradient of chi^2 at eta = 0 is -2 sum(x y / sigma^2)
        if float(np.sum(x * y / sigma**2)) <= 0.0:
            eta, boundary = 0.0, True
            break
        result = least_squares(
            lambda e, s=sigma: (y - saturation_curve(e[0], x)) / s,
            x0=[max(eta, 0.0)],
            bounds=(0.0, np.inf),
            xtol=SATURATION_TOLERANCE,
            ftol=SATURATION_TOLERANCE,
            gtol=SATURATION_TOLERANCE,
            max_nfev=SATURATION_MAX_NFEV,
        )
        eta = float(result.x[0])
        converged = bool(result.status > 0)
        slope = eta * np.exp(-eta * x)
        sigma = np.sqrt(sigma_y**2 + (slope * sigma_x) ** 2)

    jacobian = x * np.exp(-eta * x) / sigma
    curvature = float(np.dot(jacobian, jacobian))
    std_error = 1.0 / math.sqrt(curvature) if curvature > 0.0 else math.inf
    residuals = (y - saturation_curve(eta, x)) / sigma
    chi_square = float(np.dot(residuals, residuals))
    dof = len(points) - 1
    if not converged:
        logger.warning("saturation fit did not converge (eta=%g)", eta)
    return FitReport(
        estimate=eta,
        std_error=std_error,
        n=len(points),
        objective=chi_square,
        converged=converged,
        diagnostics={
            "boundary": boundary,
            "dof": dof,
            "p_value": float(chi2.sf(chi_square, dof)) if dof > 0 else 1.0,
            "residuals": residuals.tolist(),
        },
    )


def _rate_variances(p_d: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Return binomial variances with P(D) kept at least 1/(2N) from 0 and 1."""
    floor = 0.5 / n
    p = np.clip(p_d, floor, 1.0 - floor)
    return p * (1.0 - p) / n


def fit_rate(points: Sequence[RatePoint], rule: Optional[DecisionRule] = None) -> FitReport:
    """Regress detection probability on duration and return the slope as a rate.

    Without a rule the slope is the detection rate (readout noise per
    second of readout). With a rule each P(D) is first converted to P(QJ)
    by the threshold estimator and weighted by its predicted MSE, so the slope is a jump rate
    (dark current per second of exposure).

    Args:
        points: Observations at two or more distinct durations
        rule: Optional decision rule for the P(D) to P(QJ) conversion

    Returns:
        FitReport with the slope; diagnostics carry the intercept and
        whether the slope is consistent with zero

    Raises:
        DegenerateDesignError: If fewer than two distinct durations are given
    """
    if len({p.duration for p in points}) < 2:
        raise DegenerateDesignError("rate regression needs at least two distinct durations")
    if any(p.n_runs < 1 for p in points):
        raise DomainError("every rate point needs at least one run")
    t = np.array([p.duration for p in points], dtype=float)
    n = np.array([p.n_runs for p in points], dtype=float)
    p_d = np.array([p.detections for p in points], dtype=float) / n

    if rule is None:
        offset, scale = 0.0, 1.0
    else:
        offset, scale = rule.eps_fp, _check_informative(rule)
    y = (p_d - offset) / scale

    variance = _rate_variances(p_d, n) / scale**2
    for _ in range(2):
        coef, cov = np.polyfit(t, y, 1, w=1.0 / np.sqrt(variance), cov="unscaled")
        fitted_p = offset + scale * np.polyval(coef, t)
        variance = _rate_variances(fitted_p, n) / scale**2

    slope, intercept = float(coef[0]), float(coef[1])
    slope_se, intercept_se = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    residuals = (y - np.polyval(coef, t)) / np.sqrt(variance)
    consistent = abs(slope) <= ZERO_RATE_SIGMAS * slope_se
    logger.info("rate fit: slope %.6g +- %.3g /s%s", slope, slope_se, " (consistent with zero)" if consistent else "")
    return FitReport(
        estimate=slope,
        std_error=slope_se,
        n=len(points),
        objective=float(np.dot(residuals, residuals)),
        converged=True,
        diagnostics={
            "intercept": intercept,
            "intercept_std_error": intercept_se,
            "consistent_with_zero": consistent,
            "quantity": "jump" if rule is not None else "detection",
        },
    )


def _gaussian_nll(theta: np.ndarray, n: np.ndarray, h: np.ndarray) -> float:
    mean, var = theta
    if not var > 0.0:
        return math.inf
    masses = gaussian_bin_masses(n, mean, var)
    return -float(np.sum(h * np.log(np.maximum(masses, np.finfo(float).tiny))))


def _hessian(func, theta: np.ndarray) -> np.ndarray:
    """Return the central-difference Hessian of func at theta."""
    step = 1e-4 * np.maximum(1.0, np.abs(theta))
    dim = theta.size
    hess = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            ei = np.zeros(dim)
            ej = np.zeros(dim)
            ei[i] = step[i]
            ej[j] = step[j]
            value = (func(theta + ei + ej) - func(theta + ei - ej) - func(theta - ei + ej) + func(theta - ei - ej)) / (4.0 * step[i] * step[j])
            hess[i, j] = hess[j, i] = value
    return hess


def _fit_gaussian_mle(hist: CountHistogram) -> FitReport:
    observed = hist.counts > 0
    n = np.flatnonzero(observed)
    h = hist.counts[observed].astype(float)
    start_var = max(hist.variance(), 0.25)

    result = minimize(
        lambda z: _gaussian_nll(np.array([z[0], math.exp(z[1])]), n, h),
        x0=[hist.mean(), math.log(start_var)],
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 4000},
    )
    theta = np.array([result.x[0], math.exp(result.x[1])])
    hess = _hessian(lambda th: _gaussian_nll(th, n, h), theta)
    converged = bool(result.success)
    try:
        cov = np.linalg.inv(hess)
        mean_se, var_se = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    except (np.linalg.LinAlgError, ValueError):
        mean_se = var_se = math.inf
        converged = False
    if not (math.isfinite(mean_se) and math.isfinite(var_se)):
        mean_se = var_se = math.inf
        converged = False
    return FitReport(
        estimate=float(theta[0]),
        std_error=mean_se,
        n=hist.total,
        objective=-float(result.fun),
        converged=converged,
        diagnostics={"method": GAUSS_FIT_MLE, "var": float(theta[1]), "var_std_error": var_se},
    )


def _fit_gaussian_moments(hist: CountHistogram) -> FitReport:
    total = hist.total
    mean = hist.mean()
    var = hist.variance(ddof=1)
    return FitReport(
        estimate=mean,
        std_error=math.sqrt(var / total),
        n=total,
        objective=0.0,
        converged=True,
        diagnostics={"method": GAUSS_FIT_MOMENTS, "var": var, "var_std_error": var * math.sqrt(2.0 / (total - 1)) if total > 1 else math.inf},
    )


def fit_histogram_models(hist: CountHistogram, gauss_method: str = GAUSS_FIT_MLE) -> Tuple[FitReport, FitReport]:
    """Fit a Poisson and a discretized Gaussian to a count histogram.

    Args:
        hist: Nonempty histogram
        gauss_method: "mle" (binned likelihood with the clipped discretization) or "moments"

    Returns:
        Tuple of (Poisson report with estimate mu, Gaussian report with
        estimate mean and diagnostics["var"])

    Raises:
        EmptyHistogramError: If the histogram has no runs
    """
    if hist.is_empty():
        raise EmptyHistogramError("cannot fit models to an empty histogram")
    if gauss_method not in (GAUSS_FIT_MLE, GAUSS_FIT_MOMENTS):
        raise DomainError(f"gauss_method must be {GAUSS_FIT_MLE!r} or {GAUSS_FIT_MOMENTS!r}, got {gauss_method!r}")

    total = hist.total
    mu = hist.mean()
    counts = np.arange(hist.counts.size)
    log_likelihood = float(np.sum(hist.counts * (xlogy(counts, mu) - mu - gammaln(counts + 1))))
    poisson_report = FitReport(mu, math.sqrt(mu / total), total, log_likelihood, True, {"model": "poisson"})

    if hist.variance() == 0.0:
        gauss_report = FitReport(mu, 0.0, total, 0.0, False, {"method": gauss_method, "var": 0.0, "var_std_error": math.inf, "note": "zero sample variance"})
    elif gauss_method == GAUSS_FIT_MOMENTS:
        gauss_report = _fit_gaussian_moments(hist)
    else:
        gauss_report = _fit_gaussian_mle(hist)
    return poisson_report, gauss_report


def analyze_qe_campaign(
    results: Sequence[SettingResult],
    detector: DetectorParams,
    rule: Optional[DecisionRule] = None,
    nbar_rel_uncertainty: float = 0.07,
    estimator: str = ESTIMATOR_THRESHOLD,
) -> QeAnalysis:
    """Estimate P(QJ) at every setting and fit the saturation curve.

    Args:
        results: QE campaign settings
        detector: Detector whose model pmfs feed the mixture fits and default rule
        rule: Decision rule, defaulting to the fidelity-maximizing model rule
        nbar_rel_uncertainty: Relative x-uncertainty declared for each photon number
        estimator: "threshold" or "mixture", which estimates feed the fit

    Returns:
        QeAnalysis
    """
    if estimator not in ESTIMATORS:
        raise DomainError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    rule = rule or model_decision_rule(detector)
    pmf1 = pmf_counts_given_state(HyperfineState.F1, detector)
    pmf2 = pmf_counts_given_state(HyperfineState.F2, detector)

    settings: List[QeSettingEstimate] = []
    points: List[SaturationPoint] = []
    for result in results:
        n_runs = result.retained_runs
        if n_runs == 0:
            settings.append(QeSettingEstimate(result.setting_value, 0, 0, None, math.inf, None))
            continue
        hist = result.histogram
        detections = hist.detections(rule.threshold)
        p_d = detections / n_runs
        estimate = infer_pqj(p_d, rule)
        floor = 0.5 / n_runs
        std_error = math.sqrt(mse_pqj(min(max(p_d, floor), 1.0 - floor), rule, n_runs))
        mixture = fit_mixture(hist, pmf1, pmf2)
        settings.append(QeSettingEstimate(result.setting_value, n_runs, detections, estimate, std_error, mixture))

        if estimator == ESTIMATOR_MIXTURE:
            pqj, pqj_err = mixture.estimate, mixture.std_error
        else:
            pqj, pqj_err = estimate.estimate, std_error
        if math.isfinite(pqj_err) and pqj_err > 0.0:
            points.append(SaturationPoint(result.setting_value, nbar_rel_uncertainty * result.setting_value, pqj, pqj_err))
        else:
            logger.warning("setting %d dropped from the saturation fit: uncertainty %g", result.setting_id, pqj_err)

    saturation = fit_saturation(points)
    logger.info("eta_QJ = %.4g +- %.2g (%s estimator)", saturation.estimate, saturation.std_error, estimator)
    return QeAnalysis(rule, settings, points, saturation, estimator)
