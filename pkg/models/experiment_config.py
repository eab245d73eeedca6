"""Experiment configuration model: detector, exposure and campaign settings."""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from core.constants import (
    ESTIMATOR_THRESHOLD,
    NOMINAL_IDLE_WAIT,
    NOMINAL_READOUT_ERROR_RATE,
    PROBE_AXIS_AXIAL,
    VARIANTS,
)
from core.exceptions import DomainError

from .params import DetectorParams, ExposureParams

SCHEMA_VERSION = 1


def default_qe_sweep() -> Tuple[float, ...]:
    """Return 10 log-spaced probe photon numbers from 10 to 10^4."""
    return tuple(float(v) for v in np.logspace(1.0, 4.0, 10))


@dataclass(frozen=True)
class SequenceConfig:
    """Everything one prepare/expose/readout cycle needs.

    Attributes:
        detector: Readout model at this setting
        exposure: Exposure-phase parameters at this setting
        prep_error: Probability that preparation leaves the atom in F2
    """

    detector: DetectorParams = DetectorParams()
    exposure: ExposureParams = ExposureParams()
    prep_error: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.prep_error <= 1.0:
            raise DomainError(f"prep_error must be a probability, got {self.prep_error!r}")

    @property
    def sequence_duration(self) -> float:
        """Return t_exp + t_rd, the window over which the atom can be lost."""
        return self.exposure.exposure_duration + self.detector.readout_duration


@dataclass(frozen=True)
class CampaignConfig:
    """One sweep of repeated sequences.

    Attributes:
        n_runs: Runs per setting
        sweep: Setting values (photon numbers or durations in seconds)
        master_seed: Unsigned 64-bit seed all run streams derive from
        detector: Detector template
        exposure: Exposure template
        prep_error: Preparation error probability
        threshold: Fixed decision threshold, or None to choose by fidelity
        workers: Worker processes (1 runs serially)
        idle_duration: Probe-off wait before readout in the readout-noise campaign, seconds
        bg_rate: Background count rate for the readout-noise campaign, per second;
            None calibrates it so the expected regression slope equals readout_error_rate
        readout_error_rate: Target readout-noise slope, per second, used when bg_rate is None
        nbar_calibration_jitter: Relative error on the delivered photon number per QE setting
    """

    n_runs: int
    sweep: Tuple[float, ...]
    master_seed: int
    detector: DetectorParams = DetectorParams()
    exposure: ExposureParams = ExposureParams()
    prep_error: float = 0.0
    threshold: Optional[int] = None
    workers: int = 1
    idle_duration: float = NOMINAL_IDLE_WAIT
    bg_rate: Optional[float] = None
    nbar_calibration_jitter: float = 0.0
    readout_error_rate: float = NOMINAL_READOUT_ERROR_RATE

    def __post_init__(self):
        if self.n_runs < 1:
            raise DomainError(f"n_runs must be at least 1, got {self.n_runs!r}")
        if len(self.sweep) == 0:
            raise DomainError("sweep must not be empty")
        if any(v < 0 for v in self.sweep):
            raise DomainError("sweep values must be nonnegative")
        if self.readout_error_rate <= 0:
            raise DomainError(f"readout_error_rate must be positive, got {self.readout_error_rate!r}")
        object.__setattr__(self, "sweep", tuple(float(v) for v in self.sweep))

    def with_seed(self, master_seed: int) -> "CampaignConfig":
        """Return a copy with a different master seed."""
        return replace(self, master_seed=master_seed)

    def with_workers(self, workers: int) -> "CampaignConfig":
        """Return a copy with a different worker count."""
        return replace(self, workers=workers)


@dataclass(frozen=True)
class QeSettings:
    """Quantum-efficiency sweep settings."""

    n_runs: int = 300
    nbar_photons: Tuple[float, ...] = field(default_factory=default_qe_sweep)
    nbar_rel_uncertainty: float = 0.07
    nbar_calibration_jitter: float = 0.0
    estimator: str = ESTIMATOR_THRESHOLD


@dataclass(frozen=True)
class ReadoutNoiseSettings:
    """Readout-noise sweep settings."""

    n_runs: int = 500
    t_rd_s: Tuple[float, ...] = (0.5e-3, 1.0e-3, 1.5e-3, 2.0e-3)
    t_wait_s: float = NOMINAL_IDLE_WAIT
    bg_rate_per_s: Optional[float] = None
    readout_error_rate_per_s: float = NOMINAL_READOUT_ERROR_RATE


@dataclass(frozen=True)
class DarkCurrentSettings:
    """Dark-current sweep settings."""

    n_runs: int = 500
    t_exp_s: Tuple[float, ...] = (0.5, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class CharacterizeSettings:
    """Conditional-histogram characterization settings."""

    n_runs: int = 10_000


@dataclass(frozen=True)
class EstimatorValidationSettings:
    """Jump-probability estimator calibration settings."""

    n_campaigns: int = 1000
    n_runs: int = 300
    p_detect: Tuple[float, ...] = (0.2, 0.5, 0.8)
    tolerance: float = 0.10


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration of one invocation.

    Attributes:
        master_seed: Unsigned 64-bit seed
        detector: Detector parameters
        exposure: Exposure template (mean_probe_photons is overridden by sweeps)
        probe_axis: "axial" or "transverse", used when eta_qj was not given
        prep_error: Preparation error probability
        qe: QE sweep settings
        readout_noise: Readout-noise sweep settings
        dark_current: Dark-current sweep settings
        characterize: Characterization settings
        estimators: Estimator calibration settings
        threshold: Fixed decision threshold, or None to choose by fidelity
        output_dir: Directory for output files
        workers: Worker processes
        appendix_variants: Formula variants checked by validate-appendix
        schema_version: Configuration schema version
        config_hash: SHA-256 of the canonical resolved configuration
    """

    master_seed: int
    detector: DetectorParams = DetectorParams()
    exposure: ExposureParams = ExposureParams()
    probe_axis: str = PROBE_AXIS_AXIAL
    prep_error: float = 0.0
    qe: QeSettings = QeSettings()
    readout_noise: ReadoutNoiseSettings = ReadoutNoiseSettings()
    dark_current: DarkCurrentSettings = DarkCurrentSettings()
    characterize: CharacterizeSettings = CharacterizeSettings()
    estimators: EstimatorValidationSettings = EstimatorValidationSettings()
    threshold: Optional[int] = None
    output_dir: str = "results"
    workers: int = 1
    appendix_variants: Tuple[str, ...] = tuple(VARIANTS)
    schema_version: int = SCHEMA_VERSION
    config_hash: str = ""

    def _campaign(self, n_runs: int, sweep, **extra) -> CampaignConfig:
        return CampaignConfig(
            n_runs=n_runs,
            sweep=tuple(sweep),
            master_seed=self.master_seed,
            detector=self.detector,
            exposure=self.exposure,
            prep_error=self.prep_error,
            threshold=self.threshold,
            workers=self.workers,
            **extra,
        )

    def qe_campaign(self) -> CampaignConfig:
        """Return the QE sweep as a CampaignConfig."""
        return self._campaign(self.qe.n_runs, self.qe.nbar_photons, nbar_calibration_jitter=self.qe.nbar_calibration_jitter)

    def readout_noise_campaign(self) -> CampaignConfig:
        """Return the readout-noise sweep as a CampaignConfig."""
        return self._campaign(
            self.readout_noise.n_runs,
            self.readout_noise.t_rd_s,
            idle_duration=self.readout_noise.t_wait_s,
            bg_rate=self.readout_noise.bg_rate_per_s,
            readout_error_rate=self.readout_noise.readout_error_rate_per_s,
        )

    def dark_current_campaign(self) -> CampaignConfig:
        """Return the dark-current sweep as a CampaignConfig."""
        return self._campaign(self.dark_current.n_runs, self.dark_current.t_exp_s)
