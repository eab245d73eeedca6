"""Model parameter types for the readout and exposure phases."""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from core.constants import (
    DEFAULT_ATOM_LOSS_RATE,
    DEFAULT_DET_EFFICIENCY,
    DEFAULT_SCATTER_SURVIVAL,
    ETA_QJ_AXIAL,
    F2_MODEL_GAUSSIAN,
    F2_MODEL_MARKOV,
    F2_MODELS,
    NOMINAL_BG_MEAN,
    NOMINAL_DARK_RATE,
    NOMINAL_EXPOSURE_DURATION,
    NOMINAL_GAUSS_MEAN,
    NOMINAL_GAUSS_VAR,
    NOMINAL_READOUT_DURATION,
    SINGLE_PASS_BOUND,
    STATE_F1,
    STATE_F2,
)
from core.exceptions import DomainError


class HyperfineState(str, Enum):
    """Ground hyperfine state of the atom at readout."""

    F1 = STATE_F1
    F2 = STATE_F2


def _require_probability(name: str, value: float, open_low: bool = False, open_high: bool = False):
    """Raise DomainError unless value lies in the requested unit interval."""
    low_ok = value > 0.0 if open_low else value >= 0.0
    high_ok = value < 1.0 if open_high else value <= 1.0
    if not (math.isfinite(value) and low_ok and high_ok):
        raise DomainError(f"{name} must be a probability, got {value!r}")


def _require_nonnegative(name: str, value: float):
    """Raise DomainError unless value is a finite nonnegative number."""
    if not (math.isfinite(value) and value >= 0.0):
        raise DomainError(f"{name} must be finite and nonnegative, got {value!r}")


@dataclass(frozen=True)
class CascadeParams:
    """Parameters of the minimal Markov scattering model for an F=2 readout.

    Attributes:
        scatter_survival: Probability p that a scattered photon leaves the atom in F=2
        det_efficiency: Probability eta that a scattered photon is detected
        bg_mean: Mean background counts mu per readout window
    """

    scatter_survival: float = DEFAULT_SCATTER_SURVIVAL
    det_efficiency: float = DEFAULT_DET_EFFICIENCY
    bg_mean: float = NOMINAL_BG_MEAN

    def __post_init__(self):
        _require_probability("scatter_survival", self.scatter_survival, open_low=True, open_high=True)
        _require_probability("det_efficiency", self.det_efficiency, open_low=True)
        _require_nonnegative("bg_mean", self.bg_mean)

    @property
    def x(self) -> float:
        """Return x = mu (1 - p) / (eta p), the argument shift of the closed form."""
        p = self.scatter_survival
        return self.bg_mean * (1.0 - p) / (self.det_efficiency * p)

    @property
    def mean_scattered(self) -> float:
        """Return E[n_scat] = 1 / (1 - p)."""
        return 1.0 / (1.0 - self.scatter_survival)

    @property
    def mean_detected(self) -> float:
        """Return E[n_det] = eta / (1 - p)."""
        return self.det_efficiency * self.mean_scattered

    def with_bg_mean(self, bg_mean: float) -> "CascadeParams":
        """Return a copy with a different background mean."""
        return replace(self, bg_mean=bg_mean)


@dataclass(frozen=True)
class DetectorParams:
    """Readout-phase measurement model.

    Attributes:
        cascade: Markov cascade and background parameters
        f2_model: "markov" or "gaussian_heuristic"
        gauss_mean: Mean of the Gaussian heuristic for F=2 counts
        gauss_var: Variance of the Gaussian heuristic
        readout_duration: Readout window t_rd in seconds
        gauss_convolve_background: Convolve the heuristic with Poisson(mu)
    """

    cascade: CascadeParams = CascadeParams()
    f2_model: str = F2_MODEL_MARKOV
    gauss_mean: float = NOMINAL_GAUSS_MEAN
    gauss_var: float = NOMINAL_GAUSS_VAR
    readout_duration: float = NOMINAL_READOUT_DURATION
    gauss_convolve_background: bool = False

    def __post_init__(self):
        if self.f2_model not in F2_MODELS:
            raise DomainError(f"f2_model must be one of {F2_MODELS}, got {self.f2_model!r}")
        if not (math.isfinite(self.gauss_mean) and math.isfinite(self.gauss_var) and self.gauss_var > 0.0):
            raise DomainError(f"gauss_var must be positive, got {self.gauss_var!r}")
        if not (math.isfinite(self.readout_duration) and self.readout_duration > 0.0):
            raise DomainError(f"readout_duration must be positive, got {self.readout_duration!r}")

    @property
    def bg_mean(self) -> float:
        """Return the background mean mu."""
        return self.cascade.bg_mean

    @property
    def is_markov(self) -> bool:
        """Return True when F=2 counts follow the appendix cascade model."""
        return self.f2_model == F2_MODEL_MARKOV

    @property
    def is_gaussian(self) -> bool:
        """Return True when F=2 counts follow the Gaussian heuristic."""
        return self.f2_model == F2_MODEL_GAUSSIAN

    def with_readout(self, readout_duration: float, bg_mean: float) -> "DetectorParams":
        """Return a copy with a different readout window and background mean.

        Args:
            readout_duration: New t_rd in seconds
            bg_mean: Background mean for that window

        Returns:
            New DetectorParams
        """
        return replace(self, cascade=self.cascade.with_bg_mean(bg_mean), readout_duration=readout_duration)

    def with_f2_model(self, f2_model: str) -> "DetectorParams":
        """Return a copy with a different F=2 readout model."""
        return replace(self, f2_model=f2_model)


@dataclass(frozen=True)
class ExposureParams:
    """Exposure-phase parameters.

    Attributes:
        eta_qj: Jump probability per probe photon
        mean_probe_photons: Mean probe photon number n_pr during the exposure
        dark_jump_rate: Rate of spurious jumps, per second
        exposure_duration: Exposure window t_exp in seconds
        atom_loss_rate: Rate of atom loss from the trap, per second
    """

    eta_qj: float = ETA_QJ_AXIAL
    mean_probe_photons: float = 0.0
    dark_jump_rate: float = NOMINAL_DARK_RATE
    exposure_duration: float = NOMINAL_EXPOSURE_DURATION
    atom_loss_rate: float = DEFAULT_ATOM_LOSS_RATE

    def __post_init__(self):
        _require_probability("eta_qj", self.eta_qj)
        _require_nonnegative("mean_probe_photons", self.mean_probe_photons)
        _require_nonnegative("dark_jump_rate", self.dark_jump_rate)
        _require_nonnegative("exposure_duration", self.exposure_duration)
        _require_nonnegative("atom_loss_rate", self.atom_loss_rate)

    @property
    def exceeds_single_pass_bound(self) -> bool:
        """Return True when eta_qj is above the 1/4 single-pass bound (allowed, flagged)."""
        return self.eta_qj > SINGLE_PASS_BOUND


@dataclass(frozen=True)
class BranchingParams:
    """Decomposition of the jump efficiency into branching and absorption.

    Attributes:
        q: Branching probability entering the jump efficiency
        eta_abs: Probability that a probe photon excites the atom
    """

    q: float
    eta_abs: float
    eta_qj_supplied: Optional[float] = None

    def __post_init__(self):
        _require_probability("q", self.q)
        _require_probability("eta_abs", self.eta_abs)
        if self.eta_qj_supplied is not None and not math.isclose(self.eta_qj_supplied, self.eta_qj, rel_tol=1e-12, abs_tol=1e-15):
            raise DomainError(f"eta_qj={self.eta_qj_supplied!r} disagrees with q * eta_abs = {self.eta_qj!r}")

    @property
    def eta_qj(self) -> float:
        """Return eta_QJ = q * eta_abs."""
        return self.q * self.eta_abs

    @property
    def single_pass_bound(self) -> float:
        """Return the single-pass upper bound q (1 - q)."""
        return self.q * (1.0 - self.q)

    @property
    def within_single_pass_bound(self) -> bool:
        """Return True when eta_QJ does not exceed q (1 - q)."""
        return self.eta_qj <= self.single_pass_bound
