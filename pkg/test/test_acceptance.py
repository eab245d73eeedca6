"""End-to-end recovery of injected efficiencies and rates from simulated campaigns."""

import pytest

from core.constants import ETA_QJ_AXIAL, ETA_QJ_TRANSVERSE
from core.inference import analyze_qe_campaign, fit_rate, model_decision_rule
from core.sequence_sim import (
    rate_points,
    run_dark_current_campaign,
    run_qe_campaign,
    run_readout_noise_campaign,
    tune_background_rate,
)
from models.experiment_config import CampaignConfig, default_qe_sweep
from models.params import DetectorParams, ExposureParams

pytestmark = [pytest.mark.slow, pytest.mark.statistical]

REPLICATIONS = 100


@pytest.mark.parametrize("eta_qj", [ETA_QJ_AXIAL, ETA_QJ_TRANSVERSE])
def test_qe_fit_covers_injected_efficiency(eta_qj):
    detector = DetectorParams()
    rule = model_decision_rule(detector, threshold=4)
    covered = 0
    for replication in range(REPLICATIONS):
        campaign = CampaignConfig(
            n_runs=300,
            sweep=default_qe_sweep(),
            master_seed=1000 + replication,
            detector=detector,
            exposure=ExposureParams(eta_qj=eta_qj),
            threshold=4,
        )
        fit = analyze_qe_campaign(run_qe_campaign(campaign), detector, rule).saturation
        assert fit.converged
        covered += fit.within(eta_qj, sigmas=3.0)
    assert covered >= 0.95 * REPLICATIONS


def test_readout_noise_recovers_tuned_slope():
    template = CampaignConfig(n_runs=10_000, sweep=(0.5e-3, 1.0e-3, 1.5e-3, 2.0e-3), master_seed=77)
    rate = tune_background_rate(template, 18.0)
    campaign = CampaignConfig(n_runs=10_000, sweep=template.sweep, master_seed=77, bg_rate=rate)
    fit = fit_rate(rate_points(run_readout_noise_campaign(campaign)))
    assert fit.within(18.0, sigmas=3.0)
    assert not fit.diagnostics["consistent_with_zero"]


def test_dark_current_recovers_injected_rate():
    campaign = CampaignConfig(n_runs=10_000, sweep=(0.5, 1.0, 2.0, 3.0), master_seed=78)
    results = run_dark_current_campaign(campaign)
    rule = model_decision_rule(campaign.detector, results[0].threshold)
    fit = fit_rate(rate_points(results), rule)
    assert fit.within(9e-3, sigmas=3.0)


def test_dark_current_null_is_flagged():
    campaign = CampaignConfig(n_runs=10_000, sweep=(0.5, 1.0, 2.0, 3.0), master_seed=79, exposure=ExposureParams(dark_jump_rate=0.0))
    results = run_dark_current_campaign(campaign)
    fit = fit_rate(rate_points(results), model_decision_rule(campaign.detector, results[0].threshold))
    assert fit.diagnostics["consistent_with_zero"]
