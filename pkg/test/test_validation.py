import pytest

from core.exceptions import DomainError
from core.inference import model_decision_rule
from core.validation import CALIBRATION_COLUMNS, validate_estimators
from models.reports import DecisionRule


@pytest.mark.statistical
def test_predicted_mse_matches_monte_carlo(detector):
    rule = model_decision_rule(detector)
    calibration = validate_estimators(rule, 20240601, n_campaigns=20_000)
    assert calibration.passed
    for row in calibration.rows:
        assert row.relative_error < 0.10
        assert row.coverage > 0.93
        assert row.true_pqj == pytest.approx((row.p_detect - rule.eps_fp) / rule.contrast)


def test_calibration_is_seeded():
    rule = DecisionRule(2, 0.1, 0.3)
    first = validate_estimators(rule, 7, n_campaigns=200)
    second = validate_estimators(rule, 7, n_campaigns=200)
    assert first.rows == second.rows
    assert len(first.rows) == 3
    assert set(CALIBRATION_COLUMNS) <= set(vars(first.rows[0]))


def test_tight_tolerance_fails():
    calibration = validate_estimators(DecisionRule(2, 0.1, 0.3), 7, n_campaigns=50, tolerance=0.0)
    assert not calibration.passed


def test_too_few_campaigns_is_rejected():
    with pytest.raises(DomainError):
        validate_estimators(DecisionRule(2, 0.1, 0.3), 7, n_campaigns=1)
