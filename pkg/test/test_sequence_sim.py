import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from core.detector_model import pmf_counts_given_state
from core.exceptions import DomainError
from core.inference import analyze_qe_campaign, model_decision_rule, saturation_curve
from core.random_streams import make_generator
from core.sequence_sim import (
    CAMPAIGN_DARK_CURRENT,
    CAMPAIGN_READOUT_NOISE,
    expected_detection_probabilities,
    expected_rate_slope,
    f2_probability,
    jump_probability,
    qe_sequence_configs,
    rate_points,
    resolve_background_rate,
    run_dark_current_campaign,
    run_qe_campaign,
    run_readout_noise_campaign,
    run_single_sequence,
    simulate_conditional_histograms,
    tune_background_rate,
)
from models.experiment_config import CampaignConfig, SequenceConfig
from models.outcomes import RunOutcome, SettingResult
from models.params import DetectorParams, ExposureParams, HyperfineState
from storage.config_loader import load_config

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "default.yaml"


def test_no_drive_means_no_jump():
    assert jump_probability(ExposureParams(mean_probe_photons=0.0, dark_jump_rate=0.0)) == 0.0


def test_jump_probability_at_inset_photon_number():
    exposure = ExposureParams(eta_qj=2.9e-3, mean_probe_photons=570.0, dark_jump_rate=0.0)
    assert jump_probability(exposure) == pytest.approx(1.0 - math.exp(-1.653), rel=1e-12)
    assert jump_probability(exposure) == pytest.approx(0.808, abs=1e-3)


def test_preparation_error_feeds_f2_probability():
    config = SequenceConfig(exposure=ExposureParams(mean_probe_photons=0.0, dark_jump_rate=0.0), prep_error=0.1)
    assert f2_probability(config) == pytest.approx(0.1)


def test_quiet_run_stays_dark(silent_detector, quiet_exposure):
    config = SequenceConfig(silent_detector, quiet_exposure)
    for i in range(200):
        outcome = run_single_sequence(config, i, make_generator(3, 0, i, label="qe"))
        assert (outcome.jumped, outcome.n_c, outcome.atom_present) == (False, 0, True)
        assert outcome.run_index == i


def test_qe_sweep_at_zero_photons_never_jumps(detector):
    exposure = ExposureParams(dark_jump_rate=0.0, atom_loss_rate=0.0)
    results = run_qe_campaign(CampaignConfig(2000, (0.0,), 11, detector, exposure))
    result = results[0]
    assert result.retained_runs == 2000
    assert result.jumped_fraction == 0.0
    hist = result.histogram
    assert abs(hist.mean() - 1.146) < 4.0 * math.sqrt(1.146 / hist.total)


def test_campaigns_are_identical_serial_and_parallel(detector):
    config = CampaignConfig(600, (10.0, 300.0, 3000.0), 42, detector, ExposureParams())
    serial = run_qe_campaign(config)
    parallel = run_qe_campaign(config.with_workers(3))
    assert [r.outcomes for r in serial] == [r.outcomes for r in parallel]
    assert [o.run_index for o in serial[1].outcomes] == list(range(600))


def test_seed_changes_the_stream(detector):
    config = CampaignConfig(300, (300.0,), 1, detector, ExposureParams())
    assert run_qe_campaign(config)[0].outcomes == run_qe_campaign(config)[0].outcomes
    assert run_qe_campaign(config)[0].outcomes != run_qe_campaign(config.with_seed(2))[0].outcomes


def test_no_background_and_no_dark_jumps_gives_no_detections(detector):
    exposure = ExposureParams(dark_jump_rate=0.0)
    config = CampaignConfig(300, (0.5e-3, 1e-3, 2e-3), 5, detector, exposure, bg_rate=0.0)
    results = run_readout_noise_campaign(config)
    assert all(r.detections == 0 for r in results)
    assert np.all(expected_detection_probabilities(config, CAMPAIGN_READOUT_NOISE) == 0.0)


def test_lost_atoms_leave_empty_settings(detector, caplog):
    exposure = ExposureParams(atom_loss_rate=1e6)
    config = CampaignConfig(50, (0.5, 1.0), 8, detector, exposure)
    with caplog.at_level(logging.WARNING, logger="core.sequence_sim"):
        results = run_dark_current_campaign(config)
    assert all(r.is_empty for r in results)
    assert rate_points(results) == []
    assert "no retained runs" in caplog.text


@pytest.mark.statistical
def test_survival_follows_exponential_loss(detector):
    exposure = ExposureParams(atom_loss_rate=1.0 / 3.0)
    result = run_dark_current_campaign(CampaignConfig(4000, (3.0,), 17, detector, exposure))[0]
    survival = math.exp(-(3.0 + detector.readout_duration) / 3.0)
    std_error = math.sqrt(survival * (1.0 - survival) / 4000)
    assert abs(result.retained_runs / 4000 - survival) < 3.0 * std_error


def test_calibration_jitter_is_per_setting_and_seeded(detector):
    config = CampaignConfig(10, (100.0, 100.0), 4, detector, ExposureParams(), nbar_calibration_jitter=0.1)
    first = [c.exposure.mean_probe_photons for c in qe_sequence_configs(config)]
    second = [c.exposure.mean_probe_photons for c in qe_sequence_configs(config)]
    assert first == second
    assert first[0] != first[1]
    plain = CampaignConfig(10, (100.0,), 4, detector, ExposureParams())
    assert qe_sequence_configs(plain)[0].exposure.mean_probe_photons == 100.0


def test_expected_probabilities_grow_with_exposure(detector):
    config = CampaignConfig(500, (0.5, 1.0, 2.0, 3.0), 1, detector, ExposureParams())
    expected = expected_detection_probabilities(config, CAMPAIGN_DARK_CURRENT)
    assert np.all(np.diff(expected) > 0.0)
    with pytest.raises(DomainError):
        expected_detection_probabilities(config, "qe")


def test_tuned_background_rate_hits_target_slope(detector):
    config = CampaignConfig(10_000, (0.5e-3, 1e-3, 1.5e-3, 2e-3), 1, detector, ExposureParams())
    rate = tune_background_rate(config, 18.0)
    tuned = CampaignConfig(10_000, config.sweep, 1, detector, ExposureParams(), bg_rate=rate)
    expected = expected_detection_probabilities(tuned, CAMPAIGN_READOUT_NOISE)
    assert expected_rate_slope(tuned.sweep, expected, tuned.n_runs) == pytest.approx(18.0, rel=1e-8)


def test_unset_background_rate_calibrates_to_readout_error_rate(detector):
    config = CampaignConfig(500, (0.5e-3, 1e-3, 1.5e-3, 2e-3), 1, detector, ExposureParams(), readout_error_rate=25.0)
    resolved = resolve_background_rate(config)
    assert resolved.bg_rate is not None
    expected = expected_detection_probabilities(resolved, CAMPAIGN_READOUT_NOISE)
    assert expected_rate_slope(resolved.sweep, expected, resolved.n_runs) == pytest.approx(25.0, rel=1e-6)
    explicit = CampaignConfig(500, config.sweep, 1, detector, ExposureParams(), bg_rate=700.0)
    assert resolve_background_rate(explicit) is explicit


def test_default_readout_noise_campaign_targets_18_per_second():
    campaign = resolve_background_rate(load_config(DEFAULT_CONFIG).readout_noise_campaign())
    assert campaign.readout_error_rate == 18.0
    expected = expected_detection_probabilities(campaign, CAMPAIGN_READOUT_NOISE)
    assert expected_rate_slope(campaign.sweep, expected, campaign.n_runs) == pytest.approx(18.0, rel=1e-6)


def test_conditional_histograms_have_requested_size(detector):
    hist1, hist2 = simulate_conditional_histograms(detector, 500, 3)
    assert hist1.total == hist2.total == 500
    assert hist2.mean() > hist1.mean()
    with pytest.raises(DomainError):
        simulate_conditional_histograms(detector, 0, 3)


def test_campaign_config_validation(detector):
    with pytest.raises(DomainError):
        CampaignConfig(0, (1.0,), 1, detector)
    with pytest.raises(DomainError):
        CampaignConfig(10, (), 1, detector)
    with pytest.raises(DomainError):
        CampaignConfig(10, (-1.0,), 1, detector)
    assert CampaignConfig(10, (1.0,), 1, DetectorParams()).bg_rate is None


def test_jump_probability_is_monotone_and_saturates():
    base = ExposureParams(eta_qj=2.9e-3, mean_probe_photons=570.0, dark_jump_rate=9e-3, exposure_duration=0.01)
    sweeps = {
        "mean_probe_photons": np.logspace(-2, 5, 60),
        "eta_qj": np.linspace(0.0, 0.25, 60),
        "dark_jump_rate": np.linspace(0.0, 50.0, 60),
        "exposure_duration": np.linspace(0.0, 5.0, 60),
    }
    for name, values in sweeps.items():
        probabilities = np.array([jump_probability(replace(base, **{name: float(v)})) for v in values])
        assert np.all(np.diff(probabilities) >= 0.0), name
    assert jump_probability(replace(base, mean_probe_photons=1e5)) == pytest.approx(1.0, abs=1e-12)
    weak = ExposureParams(eta_qj=2.9e-3, mean_probe_photons=1e-3, dark_jump_rate=0.0)
    assert jump_probability(weak) / weak.mean_probe_photons == pytest.approx(2.9e-3, rel=1e-5)


@pytest.mark.statistical
def test_jumped_fraction_at_even_odds(detector):
    exposure = ExposureParams(eta_qj=2.9e-3, mean_probe_photons=math.log(2.0) / 2.9e-3, dark_jump_rate=0.0)
    config = SequenceConfig(detector, exposure)
    assert jump_probability(exposure) == pytest.approx(0.5, rel=1e-12)
    n_runs = 10_000
    jumped = sum(run_single_sequence(config, i, make_generator(21, 0, i, label="even-odds")).jumped for i in range(n_runs))
    assert abs(jumped / n_runs - 0.5) < 3.0 * math.sqrt(0.25 / n_runs)


def test_discard_rule_ignores_counts_of_lost_runs(detector):
    campaign = CampaignConfig(400, (30.0, 300.0, 1000.0), 5, detector, ExposureParams(atom_loss_rate=20.0))
    results = run_qe_campaign(campaign)
    assert all(0 < r.retained_runs < len(r.outcomes) for r in results)
    altered = [
        SettingResult(
            r.setting_id,
            r.setting_value,
            r.setting_unit,
            [o if o.atom_present else RunOutcome(o.jumped, 10**6, False, o.run_index) for o in r.outcomes],
            r.threshold,
        )
        for r in results
    ]
    for original, changed in zip(results, altered, strict=True):
        assert np.array_equal(original.histogram.counts, changed.histogram.counts)
        assert original.detections == changed.detections
        assert original.jumped_fraction == changed.jumped_fraction
    assert rate_points(results) == rate_points(altered)
    rule = model_decision_rule(detector, results[0].threshold)
    before = analyze_qe_campaign(results, detector, rule).saturation
    after = analyze_qe_campaign(altered, detector, rule).saturation
    assert (before.estimate, before.std_error) == (after.estimate, after.std_error)


@pytest.mark.slow
@pytest.mark.statistical
def test_sequence_composition_follows_saturation_curve(detector, chi_square_pvalue):
    eta_qj, nbar = 2.9e-3, 570.0
    campaign = CampaignConfig(100_000, (nbar,), 31, detector, ExposureParams(eta_qj=eta_qj, dark_jump_rate=0.0, atom_loss_rate=0.0))
    result = run_qe_campaign(campaign)[0]
    p_jump = float(saturation_curve(eta_qj, [nbar])[0])
    n_runs = len(result.outcomes)
    assert abs(result.jumped_fraction - p_jump) < 3.0 * math.sqrt(p_jump * (1.0 - p_jump) / n_runs)

    pmf1 = pmf_counts_given_state(HyperfineState.F1, detector)
    pmf2 = pmf_counts_given_state(HyperfineState.F2, detector)
    length = max(pmf1.masses.size, pmf2.masses.size)
    masses = (1.0 - p_jump) * pmf1.padded(length) + p_jump * pmf2.padded(length)
    draws = np.array([o.n_c for o in result.outcomes])
    assert chi_square_pvalue(draws, masses) > 1e-3
