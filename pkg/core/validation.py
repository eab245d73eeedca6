"""Monte Carlo calibration of the threshold estimator against its predicted MSE."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from models.reports import CalibrationRow, DecisionRule

from .exceptions import DomainError
from .inference import mse_pqj
from .random_streams import make_generator

logger = logging.getLogger(__name__)

CALIBRATION_COLUMNS = ["p_detect", "true_pqj", "empirical_mse", "predicted_mse", "relative_error", "coverage", "passed"]


@dataclass
class EstimatorCalibration:
    """Outcome of the calibration suite."""

    rule: DecisionRule
    n_campaigns: int
    n_runs: int
    tolerance: float
    rows: List[CalibrationRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Return True when every probability passed."""
        return all(row.passed for row in self.rows)


def validate_estimators(
    rule: DecisionRule,
    master_seed: int,
    p_detect: Sequence[float] = (0.2, 0.5, 0.8),
    n_campaigns: int = 1000,
    n_runs: int = 300,
    tolerance: float = 0.10,
) -> EstimatorCalibration:
    """Compare the empirical MSE of the threshold estimator with its prediction.

    Each synthetic campaign draws D ~ Binomial(n_runs, P(D)); the estimator
    is taken before clamping, since the prediction describes the linear estimator.

    Args:
        rule: Decision rule supplying eps_fp and eps_fn
        master_seed: Seed of the calibration streams
        p_detect: True detection probabilities to check
        n_campaigns: Synthetic campaigns per probability
        n_runs: Runs per campaign
        tolerance: Allowed relative difference between empirical and predicted MSE

    Returns:
        EstimatorCalibration with one row per probability
    """
    if n_campaigns < 2:
        raise DomainError(f"n_campaigns must be at least 2, got {n_campaigns!r}")
    calibration = EstimatorCalibration(rule, n_campaigns, n_runs, tolerance)
    contrast = rule.contrast
    for idx, p_d in enumerate(p_detect):
        predicted = mse_pqj(p_d, rule, n_runs)
        true_pqj = (p_d - rule.eps_fp) / contrast
        rng = make_generator(master_seed, idx, label="estimator-calibration")
        detections = rng.binomial(n_runs, p_d, size=n_campaigns)
        raw = (detections / n_runs - rule.eps_fp) / contrast
        errors = raw - true_pqj
        empirical = float(np.mean(errors**2))
        relative = abs(empirical / predicted - 1.0) if predicted > 0.0 else (0.0 if empirical == 0.0 else math.inf)
        coverage = float(np.mean(np.abs(errors) <= 2.0 * math.sqrt(predicted)))
        row = CalibrationRow(p_d, true_pqj, empirical, predicted, relative, coverage, relative <= tolerance)
        calibration.rows.append(row)
        logger.info("P(D)=%.3f: empirical MSE %.4g, predicted %.4g (rel. diff %.3f)", p_d, empirical, predicted, relative)
    return calibration
