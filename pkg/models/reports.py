"""Decision rules, estimates and fit reports produced by the inference chain."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from core.constants import PROVENANCE_MODEL


@dataclass(frozen=True)
class DecisionRule:
    """Threshold rule D = (n_c > threshold) with its error probabilities.

    Attributes:
        threshold: n_thr
        eps_fp: P(n_c > n_thr | F1)
        eps_fn: P(n_c <= n_thr | F2)
        provenance: "model" or "empirical", what the error rates were computed from
    """

    threshold: int
    eps_fp: float
    eps_fn: float
    provenance: str = PROVENANCE_MODEL

    @property
    def fidelity(self) -> float:
        """Return F = 1 - (eps_fp + eps_fn) / 2."""
        return 1.0 - (self.eps_fp + self.eps_fn) / 2.0

    @property
    def contrast(self) -> float:
        """Return 1 - eps_fp - eps_fn, the denominator of the jump-probability estimator."""
        return 1.0 - self.eps_fp - self.eps_fn

    def to_record(self) -> Dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {
            "threshold": self.threshold,
            "eps_fp": self.eps_fp,
            "eps_fn": self.eps_fn,
            "fidelity": self.fidelity,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class PqjEstimate:
    """Jump probability inferred from a detection fraction.

    Attributes:
        estimate: Threshold estimate clamped to [0, 1]
        raw: Threshold estimate before clamping
        clamped: True when raw fell outside [0, 1]
    """

    estimate: float
    raw: float
    clamped: bool


@dataclass(frozen=True)
class SaturationPoint:
    """One point of the P(QJ) versus probe photon number curve."""

    nbar: float
    nbar_err: float
    pqj: float
    pqj_err: float


@dataclass(frozen=True)
class RatePoint:
    """Detections observed at one duration of a rate campaign."""

    duration: float
    detections: int
    n_runs: int


@dataclass
class FitReport:
    """Estimate with uncertainty and fit diagnostics.

    Attributes:
        estimate: Primary fitted value
        std_error: Standard error of estimate
        n: Number of points or runs entering the fit
        objective: Log-likelihood or chi-square at the optimum
        converged: Downstream code must not consume the estimate unless True
        diagnostics: Secondary parameters, flags and notes
    """

    estimate: float
    std_error: float
    n: int
    objective: float
    converged: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_error >= 0.0:
            raise ValueError(f"std_error must be nonnegative, got {self.std_error!r}")

    def within(self, truth: float, sigmas: float = 3.0) -> bool:
        """Return True when truth lies within sigmas standard errors of the estimate."""
        return abs(self.estimate - truth) <= sigmas * self.std_error

    def to_record(self) -> Dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n": self.n,
            "objective": self.objective,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class QeSettingEstimate:
    """Both jump-probability estimates at one probe setting.

    Attributes:
        nbar: Nominal mean probe photon number
        retained_runs: Runs entering the estimates
        detections: Runs with n_c above the threshold
        threshold_estimate: Threshold-count estimate (None for an empty setting)
        threshold_std_error: Square root of the predicted MSE
        mixture: Mixture-likelihood fit (None for an empty setting)
    """

    nbar: float
    retained_runs: int
    detections: int
    threshold_estimate: Optional[PqjEstimate]
    threshold_std_error: float
    mixture: Optional[FitReport]

    @property
    def p_detect(self) -> float:
        """Return the observed detection fraction D / N."""
        return self.detections / self.retained_runs if self.retained_runs else 0.0


@dataclass
class QeAnalysis:
    """Per-setting estimates and the saturation fit of a QE campaign."""

    rule: DecisionRule
    settings: List[QeSettingEstimate]
    points: List[SaturationPoint]
    saturation: FitReport
    estimator: str


@dataclass(frozen=True)
class CalibrationRow:
    """Monte Carlo check of the predicted MSE at one detection probability.

    Attributes:
        p_detect: True detection probability
        true_pqj: Jump probability implied by p_detect and the rule
        empirical_mse: Mean squared error of the unclamped threshold estimator
        predicted_mse: Binomial-propagation MSE
        relative_error: |empirical / predicted - 1|
        coverage: Fraction of campaigns whose estimate is within 2 predicted SE of the truth
        passed: relative_error within tolerance
    """

    p_detect: float
    true_pqj: float
    empirical_mse: float
    predicted_mse: float
    relative_error: float
    coverage: float
    passed: bool
