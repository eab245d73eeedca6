"""Prepare, expose, read out and check presence: the simulated experiment.

Each run owns a counter-based generator keyed by (master seed, setting
index, run index), so campaign output does not depend on how runs are
split across worker processes.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from models.experiment_config import CampaignConfig, SequenceConfig
from models.outcomes import RunOutcome, SettingResult
from models.params import DetectorParams, ExposureParams, HyperfineState
from models.pmf import CountHistogram
from models.reports import RatePoint

from .constants import UNIT_PHOTONS, UNIT_SECONDS
from .detector_model import pmf_counts_given_state, sample_readout
from .exceptions import DomainError
from .inference import model_decision_rule
from .random_streams import make_generator

logger = logging.getLogger(__name__)

CAMPAIGN_QE = "qe"
CAMPAIGN_READOUT_NOISE = "readout_noise"
CAMPAIGN_DARK_CURRENT = "dark_current"
CAMPAIGN_CHARACTERIZE = "characterize"

BLOCK_SIZE = 250


def jump_probability(exposure: ExposureParams) -> float:
    """Return the probability of at least one jump during the exposure.

    Probe-induced and dark jumps are independent Poisson channels, so
    P = 1 - exp(-(eta_qj * n_pr + dark_rate * t_exp)).

    Args:
        exposure: Exposure parameters

    Returns:
        Jump probability in [0, 1]
    """
    drive = exposure.eta_qj * exposure.mean_probe_photons + exposure.dark_jump_rate * exposure.exposure_duration
    return float(-math.expm1(-drive))


def survival_probability(config: SequenceConfig) -> float:
    """Return exp(-loss_rate * (t_exp + t_rd)), the chance the atom is still trapped."""
    return math.exp(-config.exposure.atom_loss_rate * config.sequence_duration)


def f2_probability(config: SequenceConfig) -> float:
    """Return P(F=2 at readout start), folding in the preparation error."""
    p_jump = jump_probability(config.exposure)
    return config.prep_error + (1.0 - config.prep_error) * p_jump


def run_single_sequence(config: SequenceConfig, run_index: int, rng: np.random.Generator) -> RunOutcome:
    """Simulate one cycle.

    Draw order is fixed (preparation, jump, loss, readout) and every draw is
    made even when its outcome is already decided, so a run consumes the
    same numbers from its stream under any parameter values.

    Args:
        config: Sequence parameters
        run_index: Index of the run within its setting
        rng: Generator of this run's stream

    Returns:
        RunOutcome; n_c of a lost atom is drawn but must be ignored
    """
    prepared_f2 = rng.random() < config.prep_error
    jump = rng.random() < jump_probability(config.exposure)
    present = rng.random() < survival_probability(config)
    jumped = bool(prepared_f2 or jump)
    state = HyperfineState.F2 if jumped else HyperfineState.F1
    n_c = sample_readout(state, config.detector, rng)
    return RunOutcome(jumped=jumped, n_c=int(n_c), atom_present=bool(present), run_index=run_index)


def _simulate_block(task: Tuple[SequenceConfig, int, str, int, int, int]) -> List[RunOutcome]:
    """Simulate runs [start, stop) of one setting (worker entry point)."""
    config, master_seed, label, setting_idx, start, stop = task
    return [run_single_sequence(config, i, make_generator(master_seed, setting_idx, i, label=label)) for i in range(start, stop)]


def _run_settings(
    configs: Sequence[SequenceConfig],
    values: Sequence[float],
    unit: str,
    n_runs: int,
    master_seed: int,
    label: str,
    workers: int = 1,
    threshold: int = -1,
) -> List[SettingResult]:
    """Simulate every setting and assemble outcomes in run-index order."""
    tasks = []
    for setting_idx, config in enumerate(configs):
        for start in range(0, n_runs, BLOCK_SIZE):
            tasks.append((config, master_seed, label, setting_idx, start, min(start + BLOCK_SIZE, n_runs)))

    if workers > 1:
        logger.debug("distributing %d blocks over %d workers", len(tasks), workers)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(_simulate_block, tasks))
    else:
        blocks = [_simulate_block(task) for task in tasks]

    results = [SettingResult(i, float(v), unit, threshold=threshold) for i, v in enumerate(values)]
    for task, block in zip(tasks, blocks, strict=True):
        results[task[3]].outcomes.extend(block)

    for result in results:
        if result.is_empty:
            logger.warning("%s setting %d (%g %s): no retained runs", label, result.setting_id, result.setting_value, unit)
        else:
            logger.info("%s setting %d (%g %s): %d/%d runs retained", label, result.setting_id, result.setting_value, unit, result.retained_runs, n_runs)
    return results


def _campaign_threshold(config: CampaignConfig) -> int:
    """Return the fixed threshold, or the fidelity-maximizing one of the nominal detector."""
    if config.threshold is not None:
        return config.threshold
    return model_decision_rule(config.detector).threshold


def qe_sequence_configs(config: CampaignConfig) -> List[SequenceConfig]:
    """Return one SequenceConfig per probe photon number.

    A nonzero nbar_calibration_jitter scales each delivered photon number by
    an independent (1 + jitter * z) factor, drawn from a per-setting stream.
    """
    configs = []
    for setting_idx, nbar in enumerate(config.sweep):
        delivered = nbar
        if config.nbar_calibration_jitter > 0.0:
            z = make_generator(config.master_seed, setting_idx, label="calibration").standard_normal()
            delivered = max(0.0, nbar * (1.0 + config.nbar_calibration_jitter * z))
            logger.debug("setting %d: nominal %g photons, delivered %g", setting_idx, nbar, delivered)
        exposure = replace(config.exposure, mean_probe_photons=delivered)
        configs.append(SequenceConfig(config.detector, exposure, config.prep_error))
    return configs


def readout_noise_sequence_configs(config: CampaignConfig) -> List[SequenceConfig]:
    """Return one SequenceConfig per readout duration.

    The probe is off; the idle wait plays the exposure role (dark jumps
    and loss can occur during it) and mu = bg_rate * t_rd.
    """
    rate = resolve_background_rate(config).bg_rate
    exposure = replace(config.exposure, mean_probe_photons=0.0, exposure_duration=config.idle_duration)
    return [SequenceConfig(config.detector.with_readout(t_rd, rate * t_rd), exposure, config.prep_error) for t_rd in config.sweep]


def dark_current_sequence_configs(config: CampaignConfig) -> List[SequenceConfig]:
    """Return one SequenceConfig per exposure duration, probe off, nominal readout."""
    return [
        SequenceConfig(config.detector, replace(config.exposure, mean_probe_photons=0.0, exposure_duration=t_exp), config.prep_error)
        for t_exp in config.sweep
    ]


def run_qe_campaign(config: CampaignConfig) -> List[SettingResult]:
    """Run the quantum-efficiency sweep over probe photon numbers.

    Args:
        config: Campaign whose sweep lists mean probe photon numbers

    Returns:
        One SettingResult per photon number with the decision threshold attached
    """
    threshold = _campaign_threshold(config)
    logger.info("QE campaign: %d settings x %d runs, threshold %d", len(config.sweep), config.n_runs, threshold)
    return _run_settings(qe_sequence_configs(config), config.sweep, UNIT_PHOTONS, config.n_runs, config.master_seed, CAMPAIGN_QE, config.workers, threshold)


def run_readout_noise_campaign(config: CampaignConfig) -> List[SettingResult]:
    """Run the readout-noise sweep over readout durations.

    Args:
        config: Campaign whose sweep lists t_rd in seconds

    Returns:
        One SettingResult per t_rd; detections use the campaign threshold
    """
    config = resolve_background_rate(config)
    threshold = _campaign_threshold(config)
    logger.info("readout-noise campaign: %d settings x %d runs, bg rate %g /s, threshold %d", len(config.sweep), config.n_runs, config.bg_rate, threshold)
    return _run_settings(
        readout_noise_sequence_configs(config), config.sweep, UNIT_SECONDS, config.n_runs, config.master_seed, CAMPAIGN_READOUT_NOISE, config.workers, threshold
    )


def run_dark_current_campaign(config: CampaignConfig) -> List[SettingResult]:
    """Run the dark-current sweep over exposure durations."""
    threshold = _campaign_threshold(config)
    logger.info("dark-current campaign: %d settings x %d runs, threshold %d", len(config.sweep), config.n_runs, threshold)
    return _run_settings(
        dark_current_sequence_configs(config), config.sweep, UNIT_SECONDS, config.n_runs, config.master_seed, CAMPAIGN_DARK_CURRENT, config.workers, threshold
    )


def rate_points(results: Sequence[SettingResult]) -> List[RatePoint]:
    """Return (duration, D, retained runs) per non-empty setting for fit_rate."""
    return [RatePoint(r.setting_value, r.detections, r.retained_runs) for r in results if not r.is_empty]


def detection_probability(config: SequenceConfig, threshold: int) -> float:
    """Return the exact P(n_c > threshold) of a retained run."""
    p_f2 = f2_probability(config)
    fp = _tail_above(HyperfineState.F1, config.detector, threshold)
    tp = _tail_above(HyperfineState.F2, config.detector, threshold)
    return (1.0 - p_f2) * fp + p_f2 * tp


def _tail_above(state: HyperfineState, detector: DetectorParams, threshold: int) -> float:
    pmf = pmf_counts_given_state(state, detector)
    if threshold >= pmf.n_max:
        return pmf.tail_mass
    return float(pmf.sf()[threshold])


def expected_detection_probabilities(config: CampaignConfig, campaign: str, threshold: Optional[int] = None) -> np.ndarray:
    """Return the exact expected P(D) at each setting of a rate campaign.

    Args:
        config: Campaign configuration
        campaign: "readout_noise" or "dark_current"
        threshold: Decision threshold, defaulting to the campaign threshold

    Returns:
        Array of detection probabilities in sweep order

    Raises:
        DomainError: If campaign is not a rate campaign
    """
    if campaign == CAMPAIGN_READOUT_NOISE:
        configs = readout_noise_sequence_configs(config)
    elif campaign == CAMPAIGN_DARK_CURRENT:
        configs = dark_current_sequence_configs(config)
    else:
        raise DomainError(f"campaign must be {CAMPAIGN_READOUT_NOISE!r} or {CAMPAIGN_DARK_CURRENT!r}, got {campaign!r}")
    thr = _campaign_threshold(config) if threshold is None else threshold
    return np.array([detection_probability(c, thr) for c in configs])


def expected_rate_slope(durations: Sequence[float], probabilities: Sequence[float], n_runs: int) -> float:
    """Return the binomially weighted regression slope through exact P(D) values."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.5 / n_runs, 1.0 - 0.5 / n_runs)
    sigma = np.sqrt(p * (1.0 - p) / n_runs)
    slope, _ = np.polyfit(np.asarray(durations, dtype=float), np.asarray(probabilities, dtype=float), 1, w=1.0 / sigma)
    return float(slope)


def tune_background_rate(config: CampaignConfig, target_slope: float, threshold: Optional[int] = None, max_rate: float = 1e6) -> float:
    """Solve for the background rate whose readout-noise regression slope hits a target.

    P(D) rises then saturates as the background grows, so the root is
    bracketed on the rising branch by scanning a log grid of rates.

    Args:
        config: Readout-noise campaign template (its bg_rate is ignored)
        target_slope: Desired slope of P(D) versus t_rd, per second
        threshold: Decision threshold, defaulting to the campaign threshold
        max_rate: Largest background rate scanned, per second

    Returns:
        Background count rate in counts per second

    Raises:
        DomainError: If no rate up to max_rate reaches the target slope
    """
    thr = _campaign_threshold(config) if threshold is None else threshold

    def slope_gap(rate: float) -> float:
        trial = _with_bg_rate(config, rate)
        probabilities = expected_detection_probabilities(trial, CAMPAIGN_READOUT_NOISE, thr)
        return expected_rate_slope(trial.sweep, probabilities, trial.n_runs) - target_slope

    grid = np.logspace(0.0, math.log10(max_rate), 61)
    previous = grid[0]
    if slope_gap(previous) >= 0.0:
        raise DomainError(f"target slope {target_slope} /s is reached below {previous} counts/s")
    for rate in grid[1:]:
        if slope_gap(rate) >= 0.0:
            tuned = brentq(slope_gap, previous, rate, xtol=1e-10, rtol=1e-12)
            logger.info("tuned background rate %.6g counts/s for slope %g /s", tuned, target_slope)
            return float(tuned)
        previous = rate
    raise DomainError(f"no background rate below {max_rate} counts/s gives slope {target_slope} /s")


def _with_bg_rate(config: CampaignConfig, rate: float) -> CampaignConfig:
    return replace(config, bg_rate=rate)


def resolve_background_rate(config: CampaignConfig) -> CampaignConfig:
    """Return the readout-noise campaign with its background rate fixed.

    A campaign without an explicit bg_rate gets the rate whose expected
    regression slope equals its readout_error_rate.
    """
    if config.bg_rate is not None:
        return config
    return _with_bg_rate(config, tune_background_rate(config, config.readout_error_rate))


def simulate_conditional_histograms(detector: DetectorParams, n_runs: int, master_seed: int) -> Tuple[CountHistogram, CountHistogram]:
    """Simulate readouts of atoms prepared in F=1 and in F=2.

    Args:
        detector: Detector parameters
        n_runs: Readouts per state
        master_seed: Campaign seed

    Returns:
        Tuple of (F=1 histogram, F=2 histogram)
    """
    if n_runs < 1:
        raise DomainError(f"n_runs must be at least 1, got {n_runs!r}")
    histograms = []
    for state_idx, state in enumerate((HyperfineState.F1, HyperfineState.F2)):
        rng = make_generator(master_seed, state_idx, label=CAMPAIGN_CHARACTERIZE)
        counts = np.asarray(sample_readout(state, detector, rng, n_runs))
        histograms.append(CountHistogram(np.bincount(counts)))
    logger.info("characterized %d readouts per state", n_runs)
    return histograms[0], histograms[1]

